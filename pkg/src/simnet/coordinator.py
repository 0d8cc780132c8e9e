import heapq
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Dict, List, Optional

from logging_config import simnet_logger
from src.crypto_suite import SimClock
from src.errors import ScenarioError
from src.simnet.audit import TrustAudit
from src.simnet.trace import Outcome, Trace, TraceEntry

if TYPE_CHECKING:
    from src.simnet.nodes import Node


@dataclass(order=True)
class Envelope:
    deliver_at: int
    seq: int
    sender: str = field(compare=False)
    recipient: str = field(compare=False)
    raw: bytes = field(compare=False, repr=False)
    origin: str = field(compare=False, default="honest")


class SimNet:
    """
    In-memory message bus. Messages wait in a queue ordered by delivery time, then
    by send order; the scenario decides when each one is delivered, dropped,
    delayed, duplicated or altered. Only script steps move the clocks.
    """

    def __init__(self, start: int = 0) -> None:
        self.clock = SimClock(start)
        self.clocks: Dict[str, SimClock] = {}
        self.nodes: Dict[str, "Node"] = {}
        self.trace = Trace()
        self.audit = TrustAudit()
        self.violations: List[str] = []
        self._queue: List[Envelope] = []
        self._seq = 0

    # ---------- actors ----------
    def clock_for(self, actor: str) -> SimClock:
        if actor not in self.clocks:
            self.clocks[actor] = SimClock(self.clock.now())
        return self.clocks[actor]

    def attach(self, node: "Node") -> "Node":
        if node.name in self.nodes:
            raise ScenarioError(f"actor {node.name!r} declared twice")
        node.net = self
        self.nodes[node.name] = node
        return node

    def node(self, name: str) -> "Node":
        if name not in self.nodes:
            raise ScenarioError(f"undeclared actor {name!r}")
        return self.nodes[name]

    # ---------- time ----------
    def now(self) -> int:
        return self.clock.now()

    def advance(self, ticks: int) -> None:
        self.clock.advance(ticks)
        for clock in self.clocks.values():
            clock.advance(ticks)

    def skew(self, actor: str, ticks: int) -> None:
        self.node(actor)
        self.clock_for(actor).advance(ticks)
        self.trace.note(self.now(), f"clock of {actor} skewed by {ticks}")

    # ---------- queue ----------
    def send(self, sender: str, recipient: str, raw: bytes, origin: str = "honest") -> Envelope:
        envelope = Envelope(self.now(), self._seq, sender, recipient, raw, origin)
        self._seq += 1
        heapq.heappush(self._queue, envelope)
        simnet_logger.debug(f"queued {sender} -> {recipient} ({len(raw)}B, {origin})")
        return envelope

    def peek(self) -> Optional[Envelope]:
        return self._queue[0] if self._queue else None

    def pending(self) -> List[Envelope]:
        return sorted(self._queue)

    def _top(self) -> Envelope:
        if not self._queue:
            raise ScenarioError("no message in flight")
        return self._queue[0]

    def _replace_top(self, envelope: Envelope) -> None:
        self._queue[0] = envelope
        heapq.heapify(self._queue)

    def drop(self) -> Envelope:
        self._top()
        envelope = heapq.heappop(self._queue)
        self._record(envelope, Outcome.neutral(envelope.recipient, "dropped"))
        simnet_logger.info(f"dropped {envelope.sender} -> {envelope.recipient}")
        return envelope

    def delay(self, ticks: int) -> None:
        if ticks < 0:
            raise ScenarioError("cannot delay by a negative amount")
        top = self._top()
        self._replace_top(replace(top, deliver_at=top.deliver_at + ticks))

    def duplicate(self) -> None:
        top = self._top()
        self.send(top.sender, top.recipient, top.raw, origin="duplicate")

    def tamper(self, byte_index: int) -> None:
        top = self._top()
        if not 0 <= byte_index < len(top.raw):
            raise ScenarioError(f"tamper index {byte_index} outside a {len(top.raw)}-byte message")
        altered = bytearray(top.raw)
        altered[byte_index] ^= 0xFF
        self._replace_top(replace(top, raw=bytes(altered), origin="tampered"))
        simnet_logger.info(f"tampered byte {byte_index} of {top.sender} -> {top.recipient}")

    def redirect(self, recipient: str) -> None:
        self.node(recipient)
        top = self._top()
        self._replace_top(replace(top, recipient=recipient, origin="redirected"))
        simnet_logger.info(f"redirected {top.sender} -> {top.recipient} to {recipient}")

    def rewrite(self, raw: bytes, origin: str) -> None:
        top = self._top()
        self._replace_top(replace(top, raw=raw, origin=origin))

    # ---------- delivery ----------
    def deliver(self, count: int = 1) -> int:
        delivered = 0
        while delivered < count and self._queue:
            envelope = heapq.heappop(self._queue)
            if envelope.deliver_at > self.now():
                self.advance(envelope.deliver_at - self.now())
            self._dispatch(envelope)
            delivered += 1
        return delivered

    def deliver_all(self, limit: int = 10_000) -> int:
        delivered = self.deliver(limit)
        if self._queue:
            raise ScenarioError(f"message storm: more than {limit} deliveries")
        return delivered

    def _dispatch(self, envelope: Envelope) -> None:
        node = self.node(envelope.recipient)
        delivery = node.receive(envelope)
        self._record(envelope, delivery.outcome)
        for recipient, raw in delivery.replies:
            self.send(node.name, recipient, raw)
        for name in sorted(self.nodes):
            for problem in self.nodes[name].check_invariants():
                self.violations.append(f"after #{len(self.trace.entries) - 1}: {problem}")

    def _record(self, envelope: Envelope, outcome: Outcome) -> None:
        entry = TraceEntry(
            index=len(self.trace.entries),
            time=self.now(),
            sender=envelope.sender,
            recipient=envelope.recipient,
            raw=envelope.raw,
            outcome=outcome,
            origin=envelope.origin,
        )
        self.trace.record(entry)
        simnet_logger.info(f"#{entry.index} {envelope.sender} -> {envelope.recipient}: {outcome}")

    def outcomes_since(self, mark: int) -> List[Outcome]:
        return [entry.outcome for entry in self.trace.entries[mark:]]
