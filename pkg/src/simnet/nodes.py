from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Dict, Iterable, List, Optional, Tuple

from src.actors import ForeignNetwork, HomeNetwork, MobileUser
from src.crypto_suite import CryptoSuite, KeyPair
from src.errors import BadSignature, MalformedMessage, RejectReason, RejectService, RejectVisa, ScenarioError
from src.messages import (
    ForwardToHN,
    HNDecision,
    PassportRevoke,
    ProtocolMessage,
    Reject,
    ServiceRequest,
    ServiceResponse,
    VisaGrant,
    VisaRequest,
    VisaRevoke,
)
from src.simnet.audit import TrustLevel, fresh, shared_key
from src.simnet.trace import Outcome, SessionKeys
from src.wire_codec import decode, encode

if TYPE_CHECKING:
    from src.simnet.coordinator import Envelope, SimNet


@dataclass
class Delivery:
    outcome: Outcome
    replies: List[Tuple[str, bytes]] = field(default_factory=list)


# === Node Interface ===
class Node(ABC):
    """Bus adapter around one actor: decodes bytes, calls the actor, routes replies."""

    answers_malformed = False

    def __init__(self, name: str) -> None:
        self.name = name
        self.net: Optional["SimNet"] = None

    @property
    def bus(self) -> "SimNet":
        if self.net is None:
            raise ScenarioError(f"{self.name} is not attached to a bus")
        return self.net

    def receive(self, envelope: "Envelope") -> Delivery:
        try:
            message = decode(envelope.raw)
        except MalformedMessage:
            replies = [(envelope.sender, encode(Reject(RejectReason.MALFORMED)))] if self.answers_malformed else []
            return Delivery(Outcome.rejected(self.name, RejectReason.MALFORMED.label), replies)
        if isinstance(message, Reject):
            return Delivery(Outcome.neutral(self.name, f"notified {message.reason.label}"))
        return self.handle(envelope.sender, message)

    @abstractmethod
    def handle(self, sender: str, message: ProtocolMessage) -> Delivery: ...

    def check_invariants(self) -> List[str]:
        return []

    def _ignored(self, message: ProtocolMessage) -> Delivery:
        return Delivery(Outcome.neutral(self.name, f"ignored {type(message).__name__}"))

    def _rejected(self, reject: Reject, to: str) -> Delivery:
        return Delivery(Outcome.rejected(self.name, reject.reason.label), [(to, encode(reject))])


class HomeNetworkNode(Node):
    answers_malformed = True

    def __init__(self, actor: HomeNetwork) -> None:
        super().__init__(actor.network_id)
        self.actor = actor

    def handle(self, sender: str, message: ProtocolMessage) -> Delivery:
        if not isinstance(message, ForwardToHN):
            return self._ignored(message)
        result = self.actor.handle_forward(message)
        if isinstance(result, Reject):
            return self._rejected(result, sender)
        self.bus.audit.raise_trust(self.name, message.cert_fn.subject_id, TrustLevel.PARTIAL)
        return Delivery(Outcome.accepted(self.name), [(sender, encode(result))])

    def revoke(self, pass_no: int, recipients: Optional[Iterable[str]] = None) -> int:
        """Queues one PassportRevoke per FN; the default recipients are the passport's visa hosts."""
        if recipients is None:
            targets = self.actor.visa_hosts(pass_no)
        else:
            targets = [(fn, self._fn_public_key(fn)) for fn in recipients]
        messages = self.actor.revoke_passport(pass_no, targets)
        for (fn, _), message in zip(targets, messages):
            self.bus.send(self.name, fn, encode(message))
        return len(messages)

    def _fn_public_key(self, fn: str) -> bytes:
        node = self.bus.node(fn)
        if not isinstance(node, ForeignNetworkNode):
            raise ScenarioError(f"{fn!r} is not a foreign network")
        return node.actor.cert.subject_public_key


def default_service(holder: str, count: int) -> bytes:
    return f"service payload {count} for {holder}".encode("utf-8")


class ForeignNetworkNode(Node):
    answers_malformed = True

    def __init__(self, actor: ForeignNetwork, service: Callable[[str, int], bytes] = default_service) -> None:
        super().__init__(actor.network_id)
        self.actor = actor
        self.service = service
        self.routes: Dict[Tuple[str, int], str] = {}  # (HN id, Pass_No) → requesting node
        self.holders: Dict[int, str] = {}  # Visa_No → MU node
        self.served = 0

    def handle(self, sender: str, message: ProtocolMessage) -> Delivery:
        if isinstance(message, VisaRequest):
            return self._visa_request(sender, message)
        if isinstance(message, HNDecision):
            return self._hn_decision(sender, message)
        if isinstance(message, ServiceRequest):
            return self._service_request(sender, message)
        if isinstance(message, PassportRevoke):
            try:
                outcome = self.actor.handle_passport_revoke(message)
            except BadSignature:
                return Delivery(Outcome.rejected(self.name, RejectReason.BAD_SIGNATURE.label))
            self.bus.trace.note(self.bus.now(), f"{self.name} passport revocation {outcome.value}")
            return Delivery(Outcome.accepted(self.name))
        if isinstance(message, VisaRevoke):
            result = self.actor.handle_visa_revoke(message)
            if isinstance(result, Reject):
                return self._rejected(result, sender)
            return Delivery(Outcome.accepted(self.name))
        return self._ignored(message)

    def _visa_request(self, sender: str, message: VisaRequest) -> Delivery:
        result = self.actor.handle_visa_request(message)
        if isinstance(result, Reject):
            return self._rejected(result, sender)
        hn = message.cert_hn.subject_id
        self.routes[(hn, message.pass_no)] = sender
        self.bus.audit.raise_trust(self.name, hn, TrustLevel.PARTIAL)
        return Delivery(Outcome.accepted(self.name), [(hn, encode(result))])

    def _hn_decision(self, sender: str, message: HNDecision) -> Delivery:
        result = self.actor.handle_hn_decision(message)
        if isinstance(result, Reject):
            return self._rejected(result, sender)
        issued = self.actor.issuance_log[-1]
        holder = self.routes.get((issued.home_network, issued.pass_no))
        self.bus.trace.master_keys.append(issued.master_key)
        if holder is None:
            return Delivery(Outcome.neutral(self.name, f"unroutable visa {issued.visa_no}"))
        self.holders[issued.visa_no] = holder
        audit = self.bus.audit
        audit.believe(self.name, fresh("r_FN"))
        audit.believe(self.name, shared_key(holder, self.name, "SK_MU-FN"))
        audit.raise_trust(self.name, holder, TrustLevel.PARTIAL)
        return Delivery(Outcome.accepted(self.name), [(holder, encode(result))])

    def _service_request(self, sender: str, message: ServiceRequest) -> Delivery:
        self.served += 1
        result = self.actor.handle_service_request(message, self.service(sender, self.served))
        if isinstance(result, Reject):
            return self._rejected(result, sender)
        session = self.actor.served_sessions[-1]
        holder = self.holders.get(session.visa_no, sender)
        audit = self.bus.audit
        audit.believe(self.name, fresh("r'_MU"))
        audit.believe(self.name, shared_key(holder, self.name, "SK''"))
        audit.believe(self.name, shared_key(holder, self.name, "SK'''"))
        return Delivery(Outcome.accepted(self.name), [(sender, encode(result))])

    def check_invariants(self) -> List[str]:
        return [f"{self.name}: {problem}" for problem in self.actor.audit()]


class MobileUserNode(Node):
    def __init__(self, actor: MobileUser) -> None:
        super().__init__(actor.id_mu)
        self.actor = actor
        self.received: List[bytes] = []
        self.last_visa_no: Optional[int] = None

    # ---------- script-driven sends ----------
    def acquire(self, fn: str, descriptor: str = "roaming") -> None:
        request = self.actor.begin_visa_acquisition(fn, descriptor)
        self.bus.send(self.name, fn, encode(request))

    def service(self, visa_no: Optional[int] = None, descriptor: str = "network-access") -> None:
        visa_no = self._visa_no(visa_no)
        request = self.actor.begin_service(visa_no, descriptor)
        self.bus.send(self.name, self.actor.visas[visa_no].id_fn, encode(request))

    def revoke(self, visa_no: Optional[int] = None) -> None:
        visa_no = self._visa_no(visa_no)
        fn = self.actor.held_visa(visa_no).id_fn
        self.bus.send(self.name, fn, encode(self.actor.revoke_visa(visa_no)))

    def _visa_no(self, visa_no: Optional[int]) -> int:
        if visa_no is not None:
            return visa_no
        if self.last_visa_no is None:
            raise ScenarioError(f"{self.name} holds no visa yet")
        return self.last_visa_no

    # ---------- deliveries ----------
    def handle(self, sender: str, message: ProtocolMessage) -> Delivery:
        if isinstance(message, VisaGrant):
            return self._visa_grant(message)
        if isinstance(message, ServiceResponse):
            return self._service_response(message)
        return self._ignored(message)

    def _visa_grant(self, message: VisaGrant) -> Delivery:
        try:
            visa_no = self.actor.complete_visa_acquisition(message)
        except RejectVisa as exc:
            return Delivery(Outcome.rejected(self.name, exc.reason))
        self.last_visa_no = visa_no
        visa = self.actor.visas[visa_no]
        fn = self._foreign_network(visa.id_fn)
        if fn is not None:
            issued = next((i for i in fn.actor.issuance_log if i.visa_no == visa_no), None)
            if issued is None or (issued.session_key, issued.master_key) != (visa.session_key, visa.master_key):
                self.bus.violations.append(f"{self.name}: visa {visa_no} keys differ from {fn.name}")
        audit = self.bus.audit
        audit.believe(self.name, fresh("r_MU"))
        audit.believe(self.name, shared_key(self.name, visa.id_fn, "SK_MU-FN"))
        audit.raise_trust(self.name, visa.id_fn, TrustLevel.PARTIAL)
        return Delivery(Outcome.accepted(self.name))

    def _service_response(self, message: ServiceResponse) -> Delivery:
        try:
            payload = self.actor.complete_service(message)
        except RejectService as exc:
            return Delivery(Outcome.rejected(self.name, exc.reason))
        self.received.append(payload)
        record = self.actor.sessions[-1]
        id_fn = self.actor.visas[record.visa_no].id_fn
        audit = self.bus.audit
        audit.believe(self.name, fresh("r'_FN"))
        audit.believe(self.name, shared_key(self.name, id_fn, "SK''"))
        audit.believe(self.name, shared_key(self.name, id_fn, "SK'''"))

        fn = self._foreign_network(id_fn)
        served = None
        if fn is not None:
            served = next((s for s in reversed(fn.actor.served_sessions) if s.visa_no == record.visa_no), None)
        agreed = served is not None and (served.first, served.second, served.third) == (
            record.first,
            record.second,
            record.third,
        )
        audit.record_session(self.name, id_fn, agreed)
        if agreed:
            self.bus.trace.sessions.append(
                SessionKeys(self.name, id_fn, record.visa_no, record.first, record.second, record.third)
            )
        if served is not None and served.payload != payload:
            self.bus.violations.append(f"{self.name}: accepted a payload {id_fn} never sent")
        return Delivery(Outcome.accepted(self.name))

    def _foreign_network(self, name: str) -> Optional[ForeignNetworkNode]:
        node = self.bus.nodes.get(name)
        return node if isinstance(node, ForeignNetworkNode) else None


class AttackerNode(Node):
    """Owns its own key pair and keeps whatever reaches it."""

    def __init__(self, name: str, suite: CryptoSuite, keys: KeyPair) -> None:
        super().__init__(name)
        self.suite = suite
        self.keys = keys
        self.captured: List[ProtocolMessage] = []

    def handle(self, sender: str, message: ProtocolMessage) -> Delivery:
        self.captured.append(message)
        return Delivery(Outcome.neutral(self.name, f"captured {type(message).__name__}"))
