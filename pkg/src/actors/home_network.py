import json
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Set, Tuple

from logging_config import protocol_logger
from src.crypto_suite import CryptoSuite, KeyPair, SimClock, SymmetricKey
from src.actors.key_schedule import session_key_mu_hn
from src.encoding import flag, pack_fields, read_text, read_u64, text, u64, unpack_fields
from src.errors import (
    BadSignature,
    CryptoError,
    DecryptionFailure,
    DuplicateRegistration,
    Expired,
    MalformedMessage,
    RejectReason,
    UnknownPassport,
)
from src.messages import REVOKE_LITERAL, ForwardToHN, HNDecision, PassportRevoke, Reject
from src.tokens import (
    Certificate,
    PassportBody,
    ProviderRole,
    SealedPassport,
    check_certificate,
    make_passport,
    open_passport,
    seal_signed,
)


@dataclass
class IssuedPassport:
    id_mu: str
    sc_id: bytes
    master_key: SymmetricKey
    expiry: int
    revoked: bool = False
    visa_hosts: Dict[str, bytes] = field(default_factory=dict)  # FN id → PK_FN


def decision_for_fn(pass_no: int, valid_mu: bool, r_mu: bytes, r_fn: bytes) -> bytes:
    return pack_fields([u64(pass_no), flag(valid_mu), r_mu, r_fn])


def revocation_body(pass_no: int) -> bytes:
    return pack_fields([u64(pass_no), REVOKE_LITERAL])


class HomeNetwork:
    """
    Home network: issues passports, vouches for its users during visa acquisition,
    and originates passport revocation.
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
    ) -> None:
        self.network_id = network_id
        self.suite = suite
        self.keys = keys
        self.cert = cert
        self.ca_pk = ca_pk
        self.clock = clock
        self.freshness_window = freshness_window
        self.issued_passports: Dict[int, IssuedPassport] = {}
        self.next_pass_no = 1
        self._registrations: Set[Tuple[str, bytes]] = set()

    # ---------- passport acquisition ----------
    def register_mobile_user(
        self,
        id_mu: str,
        sc_id: bytes,
        biometric: bytes,
        validity: int,
        data: Optional[Dict[str, str]] = None,
    ) -> Tuple[SealedPassport, SymmetricKey]:
        """
        Issues a passport over the offline registration channel.

        Args:
            id_mu (str): Mobile user identity.
            sc_id (bytes): Smart card identifier.
            biometric (bytes): Opaque biometric sample bound into the master key.
            validity (int): Passport lifetime in ticks.
            data (dict | None): Extra passport data fields.

        Returns:
            (SealedPassport, SymmetricKey): The passport and K_MU-HN for the smart card.
        """
        if not id_mu:
            raise ValueError("id_MU must be non-empty")
        if validity <= 0:
            raise ValueError("passport validity must be positive")
        if (id_mu, sc_id) in self._registrations:
            raise DuplicateRegistration(f"{id_mu} already registered with this smart card")

        now = self.clock.now()
        master_key = self.suite.kdf([sc_id, biometric])
        pass_no = self.next_pass_no
        self.next_pass_no += 1
        body = PassportBody(
            id_mu=id_mu,
            pass_no=pass_no,
            expiry=now + validity,
            master_key=master_key,
            data={
                "passport_type": "P",
                "mu_type": "individual",
                "mu_name": id_mu,
                "date_of_issue": str(now),
                "issuer_id": self.network_id,
                "issuer_name": self.network_id,
                **(data or {}),
            },
        )
        sealed = make_passport(self.suite, self.keys, body)
        self.issued_passports[pass_no] = IssuedPassport(id_mu, sc_id, master_key, body.expiry)
        self._registrations.add((id_mu, sc_id))
        protocol_logger.info(f"{self.network_id}: issued passport {pass_no} to {id_mu}")
        return sealed, master_key

    # ---------- visa acquisition ----------
    def handle_forward(self, msg: ForwardToHN) -> HNDecision | Reject:
        now = self.clock.now()
        if abs(now - msg.t_mu) > self.freshness_window or abs(now - msg.t_fn) > self.freshness_window:
            return self._reject(RejectReason.STALE, "T_MU or T_FN outside freshness window")

        if not check_certificate(self.suite, self.ca_pk, msg.cert_fn, ProviderRole.NETWORK_PROVIDER, now):
            return self._reject(RejectReason.BAD_CERT, f"Cert_FN for {msg.cert_fn.subject_id!r} refused")

        try:
            body = open_passport(self.suite, self.keys, msg.sealed_passport, now)
        except (DecryptionFailure, BadSignature, Expired) as exc:
            return self._reject(RejectReason.BAD_PASSPORT, f"passport refused: {exc}")
        record = self.issued_passports.get(body.pass_no)
        if record is None or record.revoked or record.id_mu != body.id_mu:
            return self._reject(RejectReason.BAD_PASSPORT, f"passport {body.pass_no} unknown or revoked")

        id_fn = msg.cert_fn.subject_id
        session_key = session_key_mu_hn(self.suite, body.master_key, body.id_mu, id_fn)
        try:
            claimed_fn, r_mu, t_mu = unpack_fields(self.suite.dec_sym(session_key, msg.cipher_to_hn), 3)
            claimed_id = read_text(claimed_fn)
            inner_t_mu = read_u64(t_mu)
        except (DecryptionFailure, MalformedMessage):
            return self._reject(RejectReason.ID_MISMATCH, f"cipher_to_HN not bound to {id_fn!r}")
        if claimed_id != id_fn:
            return self._reject(RejectReason.ID_MISMATCH, f"MU addressed {claimed_id!r}, cert names {id_fn!r}")
        if inner_t_mu != msg.t_mu:
            return self._reject(RejectReason.STALE, "sealed T_MU differs from cleartext T_MU")

        try:
            r_fn = self.suite.unseal_asym(self.keys.private_key, msg.sealed_r_fn)
        except DecryptionFailure:
            return self._reject(RejectReason.MALFORMED, "sealed r_FN does not open")

        try:
            for_fn = seal_signed(
                self.suite,
                self.keys,
                msg.cert_fn.subject_public_key,
                decision_for_fn(body.pass_no, True, r_mu, r_fn),
            )
        except CryptoError:
            return self._reject(RejectReason.BAD_CERT, "Cert_FN public key unusable")
        for_mu = self.suite.enc_sym(
            session_key,
            pack_fields([text(id_fn), flag(True), r_fn, r_mu, u64(now)]),
        )
        record.visa_hosts[id_fn] = msg.cert_fn.subject_public_key
        protocol_logger.info(f"{self.network_id}: vouched for passport {body.pass_no} at {id_fn}")
        return HNDecision(for_fn=for_fn, for_mu=for_mu)

    # ---------- revocation ----------
    def revoke_passport(
        self, pass_no: int, known_fns: Optional[Iterable[Tuple[str, bytes]]] = None
    ) -> List[PassportRevoke]:
        """
        Marks a passport revoked and builds one signed revocation per foreign network.
        When `known_fns` is None, every FN that forwarded this passport is notified.
        """
        record = self.issued_passports.get(pass_no)
        if record is None:
            raise UnknownPassport(f"passport {pass_no} was never issued here")
        record.revoked = True
        recipients = list(record.visa_hosts.items()) if known_fns is None else list(known_fns)
        protocol_logger.info(f"{self.network_id}: revoked passport {pass_no}, notifying {len(recipients)} FN(s)")
        return [
            PassportRevoke(seal_signed(self.suite, self.keys, pk_fn, revocation_body(pass_no)))
            for _, pk_fn in recipients
        ]

    def visa_hosts(self, pass_no: int) -> List[Tuple[str, bytes]]:
        record = self.issued_passports.get(pass_no)
        if record is None:
            raise UnknownPassport(f"passport {pass_no} was never issued here")
        return sorted(record.visa_hosts.items())

    # ---------- persistence ----------
    def save_registry(self, path: str) -> None:
        registry = {
            "network_id": self.network_id,
            "next_pass_no": self.next_pass_no,
            "passports": {
                str(pass_no): {
                    "id_mu": record.id_mu,
                    "sc_id": record.sc_id.hex(),
                    "master_key": record.master_key.raw.hex(),
                    "expiry": record.expiry,
                    "revoked": record.revoked,
                    "visa_hosts": {fn: pk.hex() for fn, pk in sorted(record.visa_hosts.items())},
                }
                for pass_no, record in sorted(self.issued_passports.items())
            },
        }
        with open(path, "w") as f:
            json.dump(registry, f, indent=4)

    def load_registry(self, path: str) -> None:
        with open(path, "r") as f:
            registry = json.load(f)
        self.next_pass_no = int(registry["next_pass_no"])
        self.issued_passports.clear()
        self._registrations.clear()
        for pass_no, entry in registry["passports"].items():
            record = IssuedPassport(
                id_mu=entry["id_mu"],
                sc_id=bytes.fromhex(entry["sc_id"]),
                master_key=SymmetricKey(bytes.fromhex(entry["master_key"])),
                expiry=int(entry["expiry"]),
                revoked=bool(entry["revoked"]),
                visa_hosts={fn: bytes.fromhex(pk) for fn, pk in entry["visa_hosts"].items()},
            )
            self.issued_passports[int(pass_no)] = record
            self._registrations.add((record.id_mu, record.sc_id))

    def _reject(self, reason: RejectReason, detail: str) -> Reject:
        protocol_logger.warning(f"{self.network_id}: reject {reason.label}: {detail}")
        return Reject(reason)
