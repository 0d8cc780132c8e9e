import os
import threading
from typing import NewType

from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms

from src.encoding import pack_fields, u64

Nonce = NewType("Nonce", bytes)
Timestamp = NewType("Timestamp", int)

NONCE_SIZE = 16


def sha256(data: bytes) -> bytes:
    digest = hashes.Hash(hashes.SHA256())
    digest.update(data)
    return digest.finalize()


def fingerprint(raw: bytes) -> str:
    """Short, non-reversible label for key material in logs and traces."""
    return sha256(raw)[:8].hex()


class DeterministicRandom:
    """
    Seeded byte source: a ChaCha20 keystream over a 32-byte key.

    `fork(label)` derives an independent child stream from the current state, so each
    actor can own its randomness while the whole run stays a function of the seed.
    """

    def __init__(self, key: bytes) -> None:
        if len(key) != 32:
            raise ValueError("DRBG key must be 32 bytes")
        self._stream = Cipher(algorithms.ChaCha20(key, b"\x00" * 16), mode=None).encryptor()
        self._lock = threading.Lock()

    @classmethod
    def from_seed(cls, seed: int) -> "DeterministicRandom":
        return cls(sha256(pack_fields([b"pvkit-drbg", u64(seed)])))

    @classmethod
    def from_os(cls) -> "DeterministicRandom":
        return cls(os.urandom(32))

    def bytes(self, n: int) -> bytes:
        with self._lock:
            return self._stream.update(b"\x00" * n)

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise ValueError("upper bound must be positive")
        # rejection sampling keeps the result unbiased
        width = (n.bit_length() + 7) // 8 + 1
        limit = (256**width // n) * n
        while True:
            value = int.from_bytes(self.bytes(width), "big")
            if value < limit:
                return value % n

    def fork(self, label: str) -> "DeterministicRandom":
        return DeterministicRandom(sha256(pack_fields([self.bytes(32), label.encode("utf-8")])))


class NonceGenerator:
    """Fresh 16-byte nonces (r_MU, r_FN, ...) drawn from one actor's stream."""

    def __init__(self, rng: DeterministicRandom) -> None:
        self._rng = rng
        self.issued = 0

    def next(self) -> Nonce:
        self.issued += 1
        return Nonce(self._rng.bytes(NONCE_SIZE))


class SimClock:
    """Simulated millisecond clock. It only moves when told to."""

    def __init__(self, start: int = 0) -> None:
        if start < 0:
            raise ValueError("clock cannot start before the epoch")
        self._ticks = start

    def now(self) -> Timestamp:
        return Timestamp(self._ticks)

    def advance(self, ticks: int) -> Timestamp:
        if ticks < 0:
            raise ValueError("clock is monotone; cannot advance by a negative amount")
        self._ticks += ticks
        return self.now()
