from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Set, Tuple

from logging_config import protocol_logger
from src.actors.home_network import decision_for_fn, revocation_body
from src.actors.key_schedule import (
    first_session_key,
    second_session_key,
    session_key_mu_fn,
    third_session_key,
)
from src.actors.ledger import VisaLedger, VisaRecord
from src.actors.policy import AdmissionPolicy, OpenMarketPolicy
from src.crypto_suite import CryptoSuite, KeyPair, SimClock, SymmetricKey
from src.encoding import (
    pack_fields,
    read_flag,
    read_u64,
    u64,
    unpack_fields,
)
from src.errors import (
    BadSignature,
    CryptoError,
    DecryptionFailure,
    Expired,
    MalformedMessage,
    RejectReason,
)
from src.messages import (
    REVOKE_LITERAL,
    ForwardToHN,
    HNDecision,
    PassportRevoke,
    Reject,
    ServiceRequest,
    ServiceResponse,
    VisaGrant,
    VisaRequest,
    VisaRevoke,
)
from src.tokens import (
    Certificate,
    ProviderRole,
    VisaBody,
    check_certificate,
    make_visa,
    open_visa,
)


class RevocationOutcome(Enum):
    APPLIED = "applied"  # at least one visa row went valid=FALSE
    RECORDED = "recorded"  # no visa held; the passport is remembered as revoked


@dataclass
class PendingAcquisition:
    r_fn: bytes
    key_nonce_mu: bytes
    t_mu: int
    pass_no_claimed: int
    cert_hn: Certificate
    created_at: int


@dataclass(frozen=True)
class VisaTerms:
    visa_type: str = "roaming"
    validity: int = 86_400_000
    max_accesses: int = 0
    service_type: str = "network-access"
    service_name: str = "internet"
    issuer_place: str = "visited-network"


@dataclass(frozen=True)
class IssuedVisa:
    """Issuance audit entry, read by the harness to cross-check both ends."""

    visa_no: int
    pass_no: int
    home_network: str
    session_key: SymmetricKey = field(repr=False)
    master_key: SymmetricKey = field(repr=False)


@dataclass(frozen=True)
class ServedSession:
    visa_no: int
    first: SymmetricKey
    second: SymmetricKey
    third: SymmetricKey
    payload: bytes = field(repr=False)


class ForeignNetwork:
    """
    Foreign network: relays visa acquisition to the home network, issues visas,
    serves sessions against them, and keeps the visa ledger.
    """

    def __init__(
        self,
        network_id: str,
        suite: CryptoSuite,
        keys: KeyPair,
        cert: Certificate,
        ca_pk: bytes,
        clock: SimClock,
        freshness_window: int = 120_000,
        policy: Optional[AdmissionPolicy] = None,
        terms: Optional[VisaTerms] = None,
        first_visa_no: int = 1,
    ) -> None:
        self.network_id = network_id
        self.suite = suite
        self.keys = keys
        self.cert = cert
        self.ca_pk = ca_pk
        self.clock = clock
        self.freshness_window = freshness_window
        self.policy = policy or OpenMarketPolicy()
        self.terms = terms or VisaTerms()
        self.nonces = suite.nonce_generator()
        self.pending: Dict[bytes, PendingAcquisition] = {}
        self.visa_ledger = VisaLedger()
        self.chain_keys: Dict[int, SymmetricKey] = {}
        self.next_visa_no = first_visa_no
        self.home_networks: Dict[str, bytes] = {}  # HN id → PK_HN from a verified Cert_HN
        self.revoked_passports: Set[Tuple[str, int]] = set()
        self.issuance_log: List[IssuedVisa] = []
        self.served_sessions: List[ServedSession] = []
        self._visa_home: Dict[int, str] = {}

    def trust_home_network(self, cert: Certificate) -> bool:
        if not check_certificate(self.suite, self.ca_pk, cert, ProviderRole.IDENTITY_PROVIDER, self.clock.now()):
            return False
        self.home_networks[cert.subject_id] = cert.subject_public_key
        return True

    # ---------- visa acquisition ----------
    def handle_visa_request(self, msg: VisaRequest) -> ForwardToHN | Reject:
        now = self.clock.now()
        self._prune_pending(now)
        if abs(now - msg.t_mu) > self.freshness_window:
            return self._reject(RejectReason.STALE, "T_MU outside freshness window")
        if not self.trust_home_network(msg.cert_hn):
            return self._reject(RejectReason.BAD_CERT, f"Cert_HN for {msg.cert_hn.subject_id!r} refused")
        if (msg.cert_hn.subject_id, msg.pass_no) in self.revoked_passports:
            return self._reject(RejectReason.REVOKED, f"passport {msg.pass_no} was revoked")
        if not self.policy.admit(msg, now):
            return self._reject(RejectReason.POLICY_DENIED, f"policy refused passport {msg.pass_no}")

        r_fn = self.nonces.next()
        try:
            sealed_r_fn = self.suite.seal_asym(msg.cert_hn.subject_public_key, r_fn)
        except CryptoError:
            return self._reject(RejectReason.BAD_CERT, "Cert_HN public key unusable")
        self.pending[r_fn] = PendingAcquisition(
            r_fn=r_fn,
            key_nonce_mu=msg.key_nonce_mu,
            t_mu=msg.t_mu,
            pass_no_claimed=msg.pass_no,
            cert_hn=msg.cert_hn,
            created_at=now,
        )
        protocol_logger.info(f"{self.network_id}: forwarding passport {msg.pass_no} to {msg.cert_hn.subject_id}")
        return ForwardToHN(
            sealed_passport=msg.sealed_passport,
            cipher_to_hn=msg.cipher_to_hn,
            t_mu=msg.t_mu,
            cert_fn=self.cert,
            t_fn=now,
            sealed_r_fn=sealed_r_fn,
        )

    def handle_hn_decision(self, msg: HNDecision) -> VisaGrant | Reject:
        now = self.clock.now()
        try:
            plaintext = self.suite.unseal_asym(self.keys.private_key, msg.for_fn)
            body, signature = unpack_fields(plaintext, 2)
            pass_no_raw, valid_raw, r_mu, r_fn = unpack_fields(body, 4)
            pass_no = read_u64(pass_no_raw)
            valid_mu = read_flag(valid_raw)
        except (DecryptionFailure, MalformedMessage):
            return self._reject(RejectReason.BAD_SIGNATURE, "HN decision does not open")

        pending = self.pending.get(r_fn)
        if pending is None:
            return self._reject(RejectReason.NONCE_MISMATCH, "r_FN matches no pending acquisition")
        if now - pending.created_at > self.freshness_window:
            del self.pending[r_fn]
            return self._reject(RejectReason.STALE, "pending acquisition expired")
        hn_id = pending.cert_hn.subject_id
        if not self.suite.verify(pending.cert_hn.subject_public_key, body, signature):
            return self._reject(RejectReason.BAD_SIGNATURE, f"Sig_{hn_id} does not verify")
        if body != decision_for_fn(pass_no, valid_mu, r_mu, r_fn):
            return self._reject(RejectReason.BAD_SIGNATURE, "HN decision is not canonical")
        if pass_no != pending.pass_no_claimed or not valid_mu:
            return self._reject(RejectReason.INVALID_USER, f"HN did not vouch for passport {pending.pass_no_claimed}")
        if (hn_id, pass_no) in self.revoked_passports:
            del self.pending[r_fn]
            return self._reject(RejectReason.REVOKED, f"passport {pass_no} was revoked")
        del self.pending[r_fn]

        master_key = self.suite.random_key()
        key_nonce_fn = self.nonces.next()
        session_key = session_key_mu_fn(
            self.suite, pass_no, self.network_id, r_mu, r_fn, pending.key_nonce_mu, key_nonce_fn
        )
        visa_no = self.next_visa_no
        self.next_visa_no += 1
        expiry = now + self.terms.validity
        body_out = VisaBody(
            pass_no=pass_no,
            visa_no=visa_no,
            expiry=expiry,
            master_key=master_key,
            data=self._visa_data(now),
        )
        # the ledger row exists before the visa leaves the FN
        self.visa_ledger.add(
            VisaRecord(pass_no=pass_no, visa_no=visa_no, expiry=expiry, max_accesses=self.terms.max_accesses)
        )
        self.chain_keys[visa_no] = session_key
        self._visa_home[visa_no] = hn_id
        self.issuance_log.append(IssuedVisa(visa_no, pass_no, hn_id, session_key, master_key))
        key_delivery = self.suite.enc_sym(session_key, pack_fields([master_key.raw, u64(visa_no), u64(expiry)]))
        protocol_logger.info(f"{self.network_id}: issued visa {visa_no} for passport {pass_no}")
        return VisaGrant(
            sealed_visa=make_visa(self.suite, self.keys, body_out),
            for_mu=msg.for_mu,
            key_delivery=key_delivery,
            key_nonce_fn=key_nonce_fn,
        )

    # ---------- service provision ----------
    def handle_service_request(self, msg: ServiceRequest, service_bytes: bytes) -> ServiceResponse | Reject:
        now = self.clock.now()
        try:
            visa = open_visa(self.suite, self.keys, msg.sealed_visa, now)
        except (DecryptionFailure, BadSignature):
            return self._reject(RejectReason.BAD_VISA, "visa does not open or verify")
        except Expired:
            return self._reject(RejectReason.EXPIRED, "visa expired")

        record = self.visa_ledger.get(visa.visa_no)
        if record is None or record.pass_no != visa.pass_no:
            return self._reject(RejectReason.BAD_VISA, f"visa {visa.visa_no} not in ledger")
        if not record.valid or (self._visa_home.get(visa.visa_no), visa.pass_no) in self.revoked_passports:
            return self._reject(RejectReason.REVOKED, f"visa {visa.visa_no} revoked")
        if record.expiry < now:
            return self._reject(RejectReason.EXPIRED, f"visa {visa.visa_no} expired")
        if record.exhausted():
            return self._reject(RejectReason.ACCESS_EXHAUSTED, f"visa {visa.visa_no} used {record.access_count} times")
        if not record.first_use_seen:
            protocol_logger.info(f"{self.network_id}: first use of visa {visa.visa_no}")

        chain_key = self.chain_keys[visa.visa_no]
        first = first_session_key(self.suite, chain_key, visa.visa_no, visa.pass_no)
        try:
            nonce_mu, claimed_visa = unpack_fields(self.suite.dec_sym(first, msg.proof), 2)
            proven_visa_no = read_u64(claimed_visa)
        except (DecryptionFailure, MalformedMessage):
            return self._reject(RejectReason.BAD_PROOF, f"proof for visa {visa.visa_no} does not open under SK′")
        if proven_visa_no != visa.visa_no or not nonce_mu:
            return self._reject(RejectReason.BAD_PROOF, "proof names a different visa")

        second = second_session_key(self.suite, first, visa.master_key, nonce_mu)
        nonce_fn = self.nonces.next()
        third = third_session_key(self.suite, second, first, nonce_fn)
        response = ServiceResponse(
            confirmation=self.suite.enc_sym(second, pack_fields([nonce_fn, u64(visa.pass_no)])),
            payload=self.suite.enc_sym(third, service_bytes),
        )
        record.mark_used()
        self.chain_keys[visa.visa_no] = third
        self.served_sessions.append(ServedSession(visa.visa_no, first, second, third, service_bytes))
        protocol_logger.info(f"{self.network_id}: served visa {visa.visa_no} (access {record.access_count})")
        return response

    # ---------- revocation ----------
    def handle_passport_revoke(self, msg: PassportRevoke) -> RevocationOutcome:
        """
        Raises:
            BadSignature: The message does not open or no trusted HN signed it; it is dropped.
        """
        try:
            body, signature = unpack_fields(self.suite.unseal_asym(self.keys.private_key, msg.sealed), 2)
            pass_no_raw, literal = unpack_fields(body, 2)
            pass_no = read_u64(pass_no_raw)
        except (DecryptionFailure, MalformedMessage) as exc:
            protocol_logger.warning(f"{self.network_id}: dropped passport revocation: {exc}")
            raise BadSignature("passport revocation does not open") from exc
        signer = next(
            (hn for hn, pk in sorted(self.home_networks.items()) if self.suite.verify(pk, body, signature)),
            None,
        )
        if signer is None or literal != REVOKE_LITERAL or body != revocation_body(pass_no):
            protocol_logger.warning(f"{self.network_id}: dropped unsigned passport revocation")
            raise BadSignature("passport revocation is not signed by a trusted home network")

        self.revoked_passports.add((signer, pass_no))
        affected = [r for r in self.visa_ledger.by_pass_no(pass_no) if self._visa_home.get(r.visa_no) == signer]
        if not affected:
            protocol_logger.info(f"{self.network_id}: no visa under passport {pass_no}; revocation recorded")
            return RevocationOutcome.RECORDED
        for record in affected:
            self._invalidate(record.visa_no)
        protocol_logger.info(f"{self.network_id}: passport {pass_no} revoked, {len(affected)} visa(s) invalidated")
        return RevocationOutcome.APPLIED

    def handle_visa_revoke(self, msg: VisaRevoke) -> RevocationOutcome | Reject:
        for visa_no, chain_key in sorted(self.chain_keys.items()):
            try:
                outer = unpack_fields(self.suite.dec_sym(chain_key, msg.sealed), 4)
            except (DecryptionFailure, MalformedMessage):
                continue
            record = self.visa_ledger.get(visa_no)
            if record is None:
                continue
            claimed = pack_fields([u64(record.pass_no), u64(visa_no), REVOKE_LITERAL])
            if pack_fields(outer[:3]) != claimed:
                return self._reject(RejectReason.BAD_REVOKE, f"revocation fields disagree with visa {visa_no}")
            first = first_session_key(self.suite, chain_key, visa_no, record.pass_no)
            try:
                inner = self.suite.dec_sym(first, outer[3])
            except DecryptionFailure:
                return self._reject(RejectReason.BAD_REVOKE, "inner layer does not open under SK′")
            if inner != claimed:
                return self._reject(RejectReason.BAD_REVOKE, "inner layer disagrees with outer layer")
            self._invalidate(visa_no)
            protocol_logger.info(f"{self.network_id}: visa {visa_no} revoked by its holder")
            return RevocationOutcome.APPLIED
        return self._reject(RejectReason.BAD_REVOKE, "no chain key opens the revocation")

    # ---------- bookkeeping ----------
    def audit(self) -> List[str]:
        """Coupling check: a chain key exists exactly for the valid ledger rows."""
        problems = []
        valid = {record.visa_no for record in self.visa_ledger if record.valid}
        for visa_no in sorted(valid - set(self.chain_keys)):
            problems.append(f"valid visa {visa_no} has no chain key")
        for visa_no in sorted(set(self.chain_keys) - valid):
            problems.append(f"chain key held for invalid or unknown visa {visa_no}")
        return problems

    def _invalidate(self, visa_no: int) -> None:
        self.visa_ledger.revoke(visa_no)
        self.chain_keys.pop(visa_no, None)

    def _prune_pending(self, now: int) -> None:
        expired = [r_fn for r_fn, entry in self.pending.items() if now - entry.created_at > self.freshness_window]
        for r_fn in expired:
            del self.pending[r_fn]

    def _visa_data(self, now: int) -> Dict[str, str]:
        terms = self.terms
        return {
            "visa_type": terms.visa_type,
            "number_of_accesses": str(terms.max_accesses) if terms.max_accesses else "unlimited",
            "duration_of_access": str(terms.validity),
            "issuer_place": terms.issuer_place,
            "issuer_id": self.network_id,
            "issuer_name": self.network_id,
            "issued_time": str(now),
            "service_type": terms.service_type,
            "service_name": terms.service_name,
            "times_of_access": "any",
        }

    def _reject(self, reason: RejectReason, detail: str) -> Reject:
        protocol_logger.warning(f"{self.network_id}: reject {reason.label}: {detail}")
        return Reject(reason)
