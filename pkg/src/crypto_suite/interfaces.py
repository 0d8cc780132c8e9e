from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Optional, Sequence

from src.crypto_suite.metering import OperationCounter, OpKind
from src.crypto_suite.randomness import DeterministicRandom, NonceGenerator, fingerprint
from src.encoding import pack_fields
from src.errors import InvalidKdfInput, PlaintextTooLarge

DIGEST_SIZE = 32
MESSAGE_BOUND = 64 * 1024


@dataclass(frozen=True)
class SymmetricKey:
    raw: bytes = field(repr=False)

    def __post_init__(self) -> None:
        if len(self.raw) != DIGEST_SIZE:
            raise ValueError(f"symmetric keys are {DIGEST_SIZE} bytes, got {len(self.raw)}")

    def __repr__(self) -> str:
        return f"SymmetricKey(fp={fingerprint(self.raw)})"


@dataclass(frozen=True)
class KeyPair:
    public_key: bytes
    private_key: bytes = field(repr=False)
    role_label: str = ""


# === Suite Interface ===
class CryptoSuite(ABC):
    """
    Crypto services for every actor.

    Public methods meter each call against `caller` and validate arguments; concrete
    suites implement the underscore primitives. `bind(caller)` returns a sibling suite
    with its own forked randomness and the same shared counter.
    """

    name = "abstract"

    def __init__(
        self,
        rng: Optional[DeterministicRandom] = None,
        caller: str = "anonymous",
        counter: Optional[OperationCounter] = None,
    ) -> None:
        self.rng = rng or DeterministicRandom.from_os()
        self.caller = caller
        self.counter = counter if counter is not None else OperationCounter()

    def bind(self, caller: str) -> "CryptoSuite":
        return type(self)(rng=self.rng.fork(caller), caller=caller, counter=self.counter)

    # ---------- key material ----------
    def generate_keypair(self, role_label: str) -> KeyPair:
        self.counter.record(self.caller, OpKind.ASYMMETRIC)
        return self._generate_keypair(role_label)

    def random_key(self) -> SymmetricKey:
        return SymmetricKey(self.rng.bytes(DIGEST_SIZE))

    def nonce_generator(self) -> NonceGenerator:
        return NonceGenerator(self.rng.fork(f"{self.caller}/nonces"))

    # ---------- hashing ----------
    def kdf(self, parts: Sequence[bytes]) -> SymmetricKey:
        if not parts:
            raise InvalidKdfInput("kdf needs at least one part")
        if any(len(part) == 0 for part in parts):
            raise InvalidKdfInput("kdf parts must be non-empty")
        self.counter.record(self.caller, OpKind.HASH)
        return SymmetricKey(self._hash(pack_fields(parts)))

    # ---------- asymmetric ----------
    def seal_asym(self, public_key: bytes, plaintext: bytes) -> bytes:
        if len(plaintext) > MESSAGE_BOUND:
            raise PlaintextTooLarge(f"{len(plaintext)} bytes exceeds {MESSAGE_BOUND}")
        self.counter.record(self.caller, OpKind.ASYMMETRIC)
        return self._seal_asym(public_key, plaintext)

    def unseal_asym(self, private_key: bytes, ciphertext: bytes) -> bytes:
        self.counter.record(self.caller, OpKind.ASYMMETRIC)
        return self._unseal_asym(private_key, ciphertext)

    def sign(self, private_key: bytes, message: bytes) -> bytes:
        self.counter.record(self.caller, OpKind.ASYMMETRIC)
        return self._sign(private_key, message)

    def verify(self, public_key: bytes, message: bytes, signature: bytes) -> bool:
        self.counter.record(self.caller, OpKind.ASYMMETRIC)
        return self._verify(public_key, message, signature)

    # ---------- symmetric ----------
    def enc_sym(self, key: SymmetricKey, plaintext: bytes) -> bytes:
        self.counter.record(self.caller, OpKind.SYMMETRIC)
        self.counter.record_key(self.caller, "enc_sym", key.raw)
        return self._enc_sym(key.raw, plaintext)

    def dec_sym(self, key: SymmetricKey, ciphertext: bytes) -> bytes:
        self.counter.record(self.caller, OpKind.SYMMETRIC)
        self.counter.record_key(self.caller, "dec_sym", key.raw)
        return self._dec_sym(key.raw, ciphertext)

    # ---------- primitives ----------
    @abstractmethod
    def _generate_keypair(self, role_label: str) -> KeyPair: ...

    @abstractmethod
    def _hash(self, data: bytes) -> bytes: ...

    @abstractmethod
    def _seal_asym(self, public_key: bytes, plaintext: bytes) -> bytes: ...

    @abstractmethod
    def _unseal_asym(self, private_key: bytes, ciphertext: bytes) -> bytes: ...

    @abstractmethod
    def _sign(self, private_key: bytes, message: bytes) -> bytes: ...

    @abstractmethod
    def _verify(self, public_key: bytes, message: bytes, signature: bytes) -> bool: ...

    @abstractmethod
    def _enc_sym(self, key: bytes, plaintext: bytes) -> bytes: ...

    @abstractmethod
    def _dec_sym(self, key: bytes, ciphertext: bytes) -> bytes: ...
