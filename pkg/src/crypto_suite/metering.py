from collections import Counter, defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import DefaultDict, List, Set

from src.crypto_suite.randomness import fingerprint


class OpKind(Enum):
    ASYMMETRIC = "asymmetric"
    SYMMETRIC = "symmetric"
    HASH = "hash"


@dataclass(frozen=True)
class KeyUse:
    caller: str
    operation: str
    key_fp: str


class OperationCounter:
    """
    Per-caller tally of crypto operations, shared by every suite bound from one root.
    Also remembers which symmetric keys touched traffic (enc_sym / dec_sym), by
    fingerprint and once per caller and operation.
    """

    def __init__(self) -> None:
        self._counts: DefaultDict[str, Counter[OpKind]] = defaultdict(Counter)
        self.key_usage: List[KeyUse] = []
        self._seen: Set[KeyUse] = set()

    def record(self, caller: str, kind: OpKind) -> None:
        self._counts[caller][kind] += 1

    def record_key(self, caller: str, operation: str, key: bytes) -> None:
        use = KeyUse(caller, operation, fingerprint(key))
        if use not in self._seen:
            self._seen.add(use)
            self.key_usage.append(use)

    def count(self, caller: str, kind: OpKind) -> int:
        return self._counts[caller][kind] if caller in self._counts else 0

    def asymmetric_count(self, caller: str) -> int:
        return self.count(caller, OpKind.ASYMMETRIC)

    def callers(self) -> List[str]:
        return sorted(self._counts)
