from enum import IntEnum
from typing import Iterable, Tuple


class RejectReason(IntEnum):
    """One-byte reason codes carried by the Reject wire message."""

    STALE = 1
    BAD_CERT = 2
    BAD_PASSPORT = 3
    ID_MISMATCH = 4
    POLICY_DENIED = 5
    BAD_SIGNATURE = 6
    NONCE_MISMATCH = 7
    INVALID_USER = 8
    BAD_VISA = 9
    REVOKED = 10
    EXPIRED = 11
    BAD_PROOF = 12
    BAD_REVOKE = 13
    ACCESS_EXHAUSTED = 14
    MALFORMED = 15

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "RejectReason":
        return cls[label.strip().upper().replace("-", "_")]


class PassportVisaError(Exception):
    """Base class for every error raised by pvkit."""


# --- crypto ---
class CryptoError(PassportVisaError):
    pass


class InvalidKdfInput(CryptoError, ValueError):
    pass


class PlaintextTooLarge(CryptoError, ValueError):
    pass


class DecryptionFailure(CryptoError):
    pass


# --- tokens ---
class TokenError(PassportVisaError):
    pass


class BadSignature(TokenError):
    pass


class Expired(TokenError):
    pass


# --- codec ---
class MalformedMessage(PassportVisaError, ValueError):
    pass


# --- home network ---
class DuplicateRegistration(PassportVisaError):
    pass


class UnknownPassport(PassportVisaError, KeyError):
    pass


# --- mobile user ---
class NotProvisioned(PassportVisaError):
    pass


class UnknownVisa(PassportVisaError, KeyError):
    pass


class LocallyExpired(PassportVisaError):
    pass


class RejectVisa(PassportVisaError):
    """The MU refused a VisaGrant. `reason` is one of the labels below."""

    REASONS = ("id_mismatch", "nonce_mismatch", "stale", "invalid_fn", "bad_key_delivery")

    def __init__(self, reason: str) -> None:
        if reason not in self.REASONS:
            raise ValueError(f"Unknown visa rejection reason: {reason}")
        super().__init__(f"visa rejected: {reason}")
        self.reason = reason


class RejectService(PassportVisaError):
    """The MU refused a ServiceResponse."""

    REASONS = ("bad_response", "pass_mismatch")

    def __init__(self, reason: str) -> None:
        if reason not in self.REASONS:
            raise ValueError(f"Unknown service rejection reason: {reason}")
        super().__init__(f"service rejected: {reason}")
        self.reason = reason


# --- harness ---
class ScenarioError(PassportVisaError):
    pass


class ScenarioParseError(ScenarioError):
    def __init__(self, line_no: int, message: str) -> None:
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class AuditPreconditionError(PassportVisaError):
    pass


class FreshnessViolation(PassportVisaError):
    """Two derived session keys collided, or a master key was used on the wire."""

    def __init__(self, collisions: Iterable[Tuple[int, int]], message: str = "") -> None:
        self.collisions = sorted(set(collisions))
        super().__init__(message or f"session key collision between sessions {self.collisions}")
