from dataclasses import dataclass, field
from typing import Dict, List, Optional

from logging_config import protocol_logger
from src.actors.key_schedule import (
    first_session_key,
    second_session_key,
    session_key_mu_fn,
    session_key_mu_hn,
    third_session_key,
)
from src.actors.smart_card import SmartCard
from src.crypto_suite import CryptoSuite, SimClock, SymmetricKey
from src.encoding import pack_fields, read_flag, read_text, read_u64, text, u64, unpack_fields
from src.errors import (
    DecryptionFailure,
    LocallyExpired,
    MalformedMessage,
    NotProvisioned,
    RejectService,
    RejectVisa,
    UnknownVisa,
)
from src.messages import (
    REVOKE_LITERAL,
    ServiceRequest,
    ServiceResponse,
    VisaGrant,
    VisaRequest,
    VisaRevoke,
)
from src.tokens import SealedVisa


@dataclass
class InFlightAcquisition:
    id_fn: str
    r_mu: bytes
    key_nonce_mu: bytes
    t_mu: int
    session_key: SymmetricKey = field(repr=False)  # SK_MU-HN


@dataclass
class StoredVisa:
    visa_no: int
    sealed_visa: SealedVisa = field(repr=False)
    id_fn: str
    pass_no: int
    expiry: int
    master_key: SymmetricKey = field(repr=False)  # K_MU-FN
    session_key: SymmetricKey = field(repr=False)  # SK_MU-FN as delivered
    chain_key: SymmetricKey = field(repr=False)


@dataclass
class InFlightService:
    visa_no: int
    first: SymmetricKey
    service_nonce_mu: bytes


@dataclass(frozen=True)
class SessionRecord:
    visa_no: int
    first: SymmetricKey
    second: SymmetricKey
    third: SymmetricKey
    mutual_auth_achieved: bool


class MobileUser:
    """
    Mobile user: drives visa acquisition, service sessions and visa revocation.

    Uses only the symmetric half of the crypto suite and the KDF. Its chain key per
    visa moves only when a ServiceResponse is accepted.
    """

    def __init__(
        self,
        id_mu: str,
        suite: CryptoSuite,
        clock: SimClock,
        smart_card: Optional[SmartCard] = None,
        freshness_window: int = 120_000,
    ) -> None:
        self.id_mu = id_mu
        self.suite = suite
        self.clock = clock
        self.smart_card = smart_card
        self.freshness_window = freshness_window
        self.nonces = suite.nonce_generator()
        self.in_flight: Dict[str, InFlightAcquisition] = {}
        self.visas: Dict[int, StoredVisa] = {}
        self.in_service: Dict[int, InFlightService] = {}
        self.sessions: List[SessionRecord] = []

    def provision(self, card: SmartCard) -> None:
        if card.id_mu != self.id_mu:
            raise ValueError(f"smart card belongs to {card.id_mu}, not {self.id_mu}")
        self.smart_card = card

    @property
    def card(self) -> SmartCard:
        if self.smart_card is None:
            raise NotProvisioned(f"{self.id_mu} has no smart card")
        return self.smart_card

    # ---------- visa acquisition ----------
    def begin_visa_acquisition(self, id_fn: str, visa_request_descriptor: str) -> VisaRequest:
        card = self.card
        session_key = session_key_mu_hn(self.suite, card.master_key, card.id_mu, id_fn)
        r_mu = self.nonces.next()
        key_nonce_mu = self.nonces.next()
        t_mu = self.clock.now()
        self.in_flight[id_fn] = InFlightAcquisition(id_fn, r_mu, key_nonce_mu, t_mu, session_key)
        protocol_logger.info(f"{self.id_mu}: requesting visa from {id_fn}")
        return VisaRequest(
            sealed_passport=card.sealed_passport,
            cipher_to_hn=self.suite.enc_sym(session_key, pack_fields([text(id_fn), r_mu, u64(t_mu)])),
            pass_no=card.pass_no,
            t_mu=t_mu,
            cert_hn=card.cert_hn,
            visa_request_descriptor=visa_request_descriptor,
            key_nonce_mu=key_nonce_mu,
        )

    def complete_visa_acquisition(self, msg: VisaGrant) -> int:
        """
        Accepts a VisaGrant and stores the visa.

        The grant carries no FN identity in clear, so each in-flight acquisition's
        SK_MU-HN is tried against for_MU in turn.

        Returns:
            int: The Visa_No delivered in the key delivery field.

        Raises:
            RejectVisa: With one of id_mismatch, nonce_mismatch, stale, invalid_fn,
                bad_key_delivery.
        """
        card = self.card
        entry, opened = self._match_acquisition(msg.for_mu)
        if entry is None or opened is None:
            raise self._reject_visa("nonce_mismatch")
        id_fn, valid_fn, r_fn, r_mu_echo, t_hn = opened
        if id_fn != entry.id_fn:
            raise self._reject_visa("id_mismatch")
        if r_mu_echo != entry.r_mu:
            raise self._reject_visa("nonce_mismatch")
        if abs(self.clock.now() - t_hn) > self.freshness_window:
            raise self._reject_visa("stale")
        if not valid_fn:
            raise self._reject_visa("invalid_fn")

        session_key = session_key_mu_fn(
            self.suite, card.pass_no, id_fn, entry.r_mu, r_fn, entry.key_nonce_mu, msg.key_nonce_fn
        )
        try:
            master_key, visa_no_raw, expiry_raw = unpack_fields(self.suite.dec_sym(session_key, msg.key_delivery), 3)
            delivered = SymmetricKey(master_key)
            visa_no = read_u64(visa_no_raw)
            expiry = read_u64(expiry_raw)
        except (DecryptionFailure, MalformedMessage, ValueError):
            raise self._reject_visa("bad_key_delivery")

        del self.in_flight[entry.id_fn]
        self.visas[visa_no] = StoredVisa(
            visa_no=visa_no,
            sealed_visa=msg.sealed_visa,
            id_fn=id_fn,
            pass_no=card.pass_no,
            expiry=expiry,
            master_key=delivered,
            session_key=session_key,
            chain_key=session_key,
        )
        protocol_logger.info(f"{self.id_mu}: holds visa {visa_no} from {id_fn}")
        return visa_no

    def _match_acquisition(self, for_mu: bytes) -> tuple[InFlightAcquisition | None, tuple | None]:
        entry = None
        for candidate in sorted(self.in_flight.values(), key=lambda e: e.id_fn):
            try:
                plaintext = self.suite.dec_sym(candidate.session_key, for_mu)
            except DecryptionFailure:
                continue
            entry = candidate
            try:
                id_fn, valid, r_fn, r_mu, t_hn = unpack_fields(plaintext, 5)
                return entry, (read_text(id_fn), read_flag(valid), r_fn, r_mu, read_u64(t_hn))
            except MalformedMessage:
                continue
        return entry, None

    # ---------- service provision ----------
    def begin_service(self, visa_no: int, service_descriptor: str) -> ServiceRequest:
        visa = self.held_visa(visa_no)
        if visa.expiry < self.clock.now():
            raise LocallyExpired(f"visa {visa_no} expired at {visa.expiry}")
        first = first_session_key(self.suite, visa.chain_key, visa_no, visa.pass_no)
        service_nonce_mu = self.nonces.next()
        self.in_service[visa_no] = InFlightService(visa_no, first, service_nonce_mu)
        return ServiceRequest(
            service_descriptor=service_descriptor,
            sealed_visa=visa.sealed_visa,
            proof=self.suite.enc_sym(first, pack_fields([service_nonce_mu, u64(visa_no)])),
        )

    def complete_service(self, msg: ServiceResponse) -> bytes:
        """
        Accepts a ServiceResponse for whichever in-flight session it answers, advances
        that visa's chain key to SK‴ and returns the service payload.
        """
        for pending in sorted(self.in_service.values(), key=lambda p: p.visa_no):
            visa = self.visas[pending.visa_no]
            second = second_session_key(self.suite, pending.first, visa.master_key, pending.service_nonce_mu)
            try:
                confirmation = self.suite.dec_sym(second, msg.confirmation)
            except DecryptionFailure:
                continue
            try:
                service_nonce_fn, pass_no_echo = unpack_fields(confirmation, 2)
                echoed = read_u64(pass_no_echo)
            except MalformedMessage:
                raise self._reject_service("bad_response")
            if echoed != visa.pass_no:
                raise self._reject_service("pass_mismatch")
            third = third_session_key(self.suite, second, pending.first, service_nonce_fn)
            try:
                payload = self.suite.dec_sym(third, msg.payload)
            except DecryptionFailure:
                raise self._reject_service("bad_response")

            visa.chain_key = third
            del self.in_service[pending.visa_no]
            self.sessions.append(SessionRecord(visa.visa_no, pending.first, second, third, mutual_auth_achieved=True))
            protocol_logger.info(f"{self.id_mu}: session {len(self.sessions)} on visa {visa.visa_no} established")
            return payload
        raise self._reject_service("bad_response")

    # ---------- revocation ----------
    def revoke_visa(self, visa_no: int) -> VisaRevoke:
        visa = self.held_visa(visa_no)
        first = first_session_key(self.suite, visa.chain_key, visa_no, visa.pass_no)
        fields = [u64(visa.pass_no), u64(visa_no), REVOKE_LITERAL]
        inner = self.suite.enc_sym(first, pack_fields(fields))
        outer = self.suite.enc_sym(visa.chain_key, pack_fields([*fields, inner]))
        del self.visas[visa_no]
        self.in_service.pop(visa_no, None)
        protocol_logger.info(f"{self.id_mu}: revoking visa {visa_no}")
        return VisaRevoke(outer)

    def held_visa(self, visa_no: int) -> StoredVisa:
        visa = self.visas.get(visa_no)
        if visa is None:
            raise UnknownVisa(f"{self.id_mu} holds no visa {visa_no}")
        return visa

    def _reject_visa(self, reason: str) -> RejectVisa:
        protocol_logger.warning(f"{self.id_mu}: visa rejected: {reason}")
        return RejectVisa(reason)

    def _reject_service(self, reason: str) -> RejectService:
        protocol_logger.warning(f"{self.id_mu}: service rejected: {reason}")
        return RejectService(reason)
