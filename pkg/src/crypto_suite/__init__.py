from src.crypto_suite.interfaces import (
    DIGEST_SIZE,
    MESSAGE_BOUND,
    CryptoSuite,
    KeyPair,
    SymmetricKey,
    fingerprint,
)
from src.crypto_suite.managers import SuiteManager
from src.crypto_suite.metering import OperationCounter, OpKind
from src.crypto_suite.randomness import (
    NONCE_SIZE,
    DeterministicRandom,
    Nonce,
    NonceGenerator,
    SimClock,
    Timestamp,
)

__all__ = [
    "DIGEST_SIZE",
    "MESSAGE_BOUND",
    "NONCE_SIZE",
    "CryptoSuite",
    "DeterministicRandom",
    "KeyPair",
    "Nonce",
    "NonceGenerator",
    "OperationCounter",
    "OpKind",
    "SimClock",
    "SuiteManager",
    "SymmetricKey",
    "Timestamp",
    "fingerprint",
]
