from dataclasses import dataclass
from typing import Dict, Type, Union

from src.errors import RejectReason
from src.tokens import Certificate, SealedPassport, SealedVisa

REVOKE_LITERAL = b"RevOke"


@dataclass(frozen=True)
class VisaRequest:
    """MU → FN: passport, HN-bound cipher, cleartext Pass_No, T_MU, Cert_HN, request, r″_MU."""

    sealed_passport: SealedPassport
    cipher_to_hn: bytes
    pass_no: int
    t_mu: int
    cert_hn: Certificate
    visa_request_descriptor: str
    key_nonce_mu: bytes


@dataclass(frozen=True)
class ForwardToHN:
    """FN → HN: relayed passport and cipher, plus Cert_FN, T_FN and the sealed r_FN."""

    sealed_passport: SealedPassport
    cipher_to_hn: bytes
    t_mu: int
    cert_fn: Certificate
    t_fn: int
    sealed_r_fn: bytes


@dataclass(frozen=True)
class HNDecision:
    for_fn: bytes
    for_mu: bytes


@dataclass(frozen=True)
class VisaGrant:
    sealed_visa: SealedVisa
    for_mu: bytes
    key_delivery: bytes
    key_nonce_fn: bytes


@dataclass(frozen=True)
class ServiceRequest:
    service_descriptor: str
    sealed_visa: SealedVisa
    proof: bytes


@dataclass(frozen=True)
class ServiceResponse:
    confirmation: bytes
    payload: bytes


@dataclass(frozen=True)
class PassportRevoke:
    sealed: bytes


@dataclass(frozen=True)
class VisaRevoke:
    sealed: bytes


@dataclass(frozen=True)
class Reject:
    reason: RejectReason


ProtocolMessage = Union[
    VisaRequest,
    ForwardToHN,
    HNDecision,
    VisaGrant,
    ServiceRequest,
    ServiceResponse,
    PassportRevoke,
    VisaRevoke,
    Reject,
]

# Idealized flow labels used by the belief auditor.
FLOW_LABELS: Dict[Type[object], str] = {
    VisaRequest: "M1",
    ForwardToHN: "M2",
    HNDecision: "M3",
    VisaGrant: "M4",
    ServiceRequest: "M5",
    ServiceResponse: "M6",
}
