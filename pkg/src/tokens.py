"""
Passport, Visa and CA certificate tokens.

Both tokens are sign-then-seal envelopes: the canonical body is signed by its issuer,
body and signature are packed together, and the pair is sealed under the issuer's own
public key. Only the issuer can open the token again.
"""

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Dict

from src.crypto_suite import CryptoSuite, KeyPair, SymmetricKey
from src.encoding import (
    pack_fields,
    pack_map,
    read_text,
    read_u64,
    text,
    u64,
    unpack_fields,
    unpack_map,
)
from src.errors import BadSignature, Expired, MalformedMessage

PASSPORT_DATA_FIELDS = (
    "passport_type",
    "mu_type",
    "mu_name",
    "date_of_birth",
    "date_of_issue",
    "place_of_issue",
    "issuer_id",
    "issuer_name",
)

VISA_DATA_FIELDS = (
    "visa_type",
    "number_of_accesses",
    "duration_of_access",
    "issuer_place",
    "issuer_id",
    "issuer_name",
    "issued_time",
    "service_type",
    "service_name",
    "times_of_access",
)


class ProviderRole(IntEnum):
    NETWORK_PROVIDER = 1
    IDENTITY_PROVIDER = 2


# === Certificates ===
@dataclass(frozen=True)
class Certificate:
    subject_id: str
    subject_public_key: bytes
    role: ProviderRole
    expiry: int
    ca_signature: bytes = b""

    def signed_bytes(self) -> bytes:
        return pack_fields(
            [
                text(self.subject_id),
                self.subject_public_key,
                bytes([self.role]),
                u64(self.expiry),
            ]
        )

    def to_bytes(self) -> bytes:
        return pack_fields([self.signed_bytes(), self.ca_signature])

    @classmethod
    def from_bytes(cls, data: bytes) -> "Certificate":
        signed, signature = unpack_fields(data, 2)
        subject_id, public_key, role, expiry = unpack_fields(signed, 4)
        if len(role) != 1 or role[0] not in ProviderRole._value2member_map_:
            raise MalformedMessage("unknown certificate role")
        return cls(
            subject_id=read_text(subject_id),
            subject_public_key=public_key,
            role=ProviderRole(role[0]),
            expiry=read_u64(expiry),
            ca_signature=signature,
        )


def issue_certificate(
    suite: CryptoSuite,
    ca_keys: KeyPair,
    subject_id: str,
    subject_pk: bytes,
    role: ProviderRole,
    expiry: int,
) -> Certificate:
    unsigned = Certificate(subject_id, subject_pk, role, expiry)
    return Certificate(
        subject_id,
        subject_pk,
        role,
        expiry,
        ca_signature=suite.sign(ca_keys.private_key, unsigned.signed_bytes()),
    )


def check_certificate(
    suite: CryptoSuite, ca_pk: bytes, cert: Certificate, required_role: ProviderRole, now: int
) -> bool:
    """Accept iff the CA signature holds, the certificate is unexpired, and the role matches."""
    if cert.role != required_role or cert.expiry < now:
        return False
    return suite.verify(ca_pk, cert.signed_bytes(), cert.ca_signature)


# === Token bodies ===
@dataclass(frozen=True)
class PassportBody:
    id_mu: str
    pass_no: int
    expiry: int
    master_key: SymmetricKey
    data: Dict[str, str] = field(default_factory=dict)

    def to_bytes(self) -> bytes:
        return pack_fields(
            [
                text(self.id_mu),
                u64(self.pass_no),
                u64(self.expiry),
                pack_map(self.data),
                self.master_key.raw,
            ]
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "PassportBody":
        id_mu, pass_no, expiry, block, key = unpack_fields(data, 5)
        return cls(
            id_mu=read_text(id_mu),
            pass_no=read_u64(pass_no),
            expiry=read_u64(expiry),
            master_key=_key(key),
            data=unpack_map(block),
        )


@dataclass(frozen=True)
class VisaBody:
    pass_no: int
    visa_no: int
    expiry: int
    master_key: SymmetricKey
    data: Dict[str, str] = field(default_factory=dict)

    def to_bytes(self) -> bytes:
        return pack_fields(
            [
                u64(self.pass_no),
                u64(self.visa_no),
                u64(self.expiry),
                pack_map(self.data),
                self.master_key.raw,
            ]
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "VisaBody":
        pass_no, visa_no, expiry, block, key = unpack_fields(data, 5)
        return cls(
            pass_no=read_u64(pass_no),
            visa_no=read_u64(visa_no),
            expiry=read_u64(expiry),
            master_key=_key(key),
            data=unpack_map(block),
        )


@dataclass(frozen=True)
class SealedPassport:
    ciphertext: bytes


@dataclass(frozen=True)
class SealedVisa:
    ciphertext: bytes


def _key(raw: bytes) -> SymmetricKey:
    try:
        return SymmetricKey(raw)
    except ValueError as exc:
        raise MalformedMessage(str(exc)) from exc


# === Sign-then-seal helpers ===
def seal_signed(suite: CryptoSuite, signer: KeyPair, recipient_pk: bytes, body: bytes) -> bytes:
    signature = suite.sign(signer.private_key, body)
    return suite.seal_asym(recipient_pk, pack_fields([body, signature]))


def open_signed(suite: CryptoSuite, own_keys: KeyPair, signer_pk: bytes, sealed: bytes) -> bytes:
    """
    Unseal with `own_keys` and check the embedded signature under `signer_pk`.

    Raises:
        DecryptionFailure: The envelope does not open under `own_keys`.
        BadSignature: The envelope opens but the signature is absent or wrong.
    """
    plaintext = suite.unseal_asym(own_keys.private_key, sealed)
    try:
        body, signature = unpack_fields(plaintext, 2)
    except MalformedMessage as exc:
        raise BadSignature("sealed envelope does not hold body and signature") from exc
    if not suite.verify(signer_pk, body, signature):
        raise BadSignature("signature does not verify")
    return body


def make_passport(suite: CryptoSuite, hn_keys: KeyPair, body: PassportBody) -> SealedPassport:
    return SealedPassport(seal_signed(suite, hn_keys, hn_keys.public_key, body.to_bytes()))


def open_passport(
    suite: CryptoSuite, hn_keys: KeyPair, sp: SealedPassport, now: int
) -> PassportBody:
    raw = open_signed(suite, hn_keys, hn_keys.public_key, sp.ciphertext)
    try:
        body = PassportBody.from_bytes(raw)
    except MalformedMessage as exc:
        raise BadSignature("signed passport body is malformed") from exc
    if body.expiry < now:
        raise Expired(f"passport {body.pass_no} expired at {body.expiry}")
    return body


def make_visa(suite: CryptoSuite, fn_keys: KeyPair, body: VisaBody) -> SealedVisa:
    return SealedVisa(seal_signed(suite, fn_keys, fn_keys.public_key, body.to_bytes()))


def open_visa(suite: CryptoSuite, fn_keys: KeyPair, sv: SealedVisa, now: int) -> VisaBody:
    raw = open_signed(suite, fn_keys, fn_keys.public_key, sv.ciphertext)
    try:
        body = VisaBody.from_bytes(raw)
    except MalformedMessage as exc:
        raise BadSignature("signed visa body is malformed") from exc
    if body.expiry < now:
        raise Expired(f"visa {body.visa_no} expired at {body.expiry}")
    return body
