from dataclasses import dataclass, field
from enum import IntEnum
from typing import Dict, List, Set, Tuple

from src.crypto_suite import fingerprint
from src.errors import AuditPreconditionError, FreshnessViolation
from src.simnet.trace import Trace


class TrustLevel(IntEnum):
    NONE = 0
    PARTIAL = 1  # established through a CA certificate or a token only
    FULL = 2  # a shared session key has been confirmed by both ends

    @classmethod
    def from_label(cls, label: str) -> "TrustLevel":
        return cls[label.strip().upper()]


@dataclass(frozen=True)
class Belief:
    holder: str
    fact: str


def fresh(nonce_name: str) -> str:
    return f"fresh({nonce_name})"


def shared_key(a: str, b: str, key_name: str) -> str:
    first, second = sorted((a, b))
    return f"{first} <-{key_name}-> {second}"


# Keys each side must believe shared once the M1 to M6 flow has run.
BAN_KEYS = ("SK_MU-FN", "SK''", "SK'''")


@dataclass
class TrustAudit:
    """
    Trust levels per ordered actor pair, plus the belief ledger the protocol's
    authentication goals are checked against.
    """

    levels: Dict[Tuple[str, str], TrustLevel] = field(default_factory=dict)
    beliefs: List[Belief] = field(default_factory=list)
    mutual_auth: Dict[Tuple[str, str], List[bool]] = field(default_factory=dict)
    transitions: List[str] = field(default_factory=list)

    def trust(self, a: str, b: str) -> TrustLevel:
        return self.levels.get((a, b), TrustLevel.NONE)

    def raise_trust(self, a: str, b: str, level: TrustLevel) -> None:
        current = self.trust(a, b)
        if level > current:
            self.levels[(a, b)] = level
            self.transitions.append(f"trust {a}->{b} {current.name} -> {level.name}")

    def believe(self, holder: str, fact: str) -> None:
        belief = Belief(holder, fact)
        if belief not in self.beliefs:
            self.beliefs.append(belief)
            self.transitions.append(f"{holder} believes {fact}")

    def holds(self, holder: str, fact: str) -> bool:
        return Belief(holder, fact) in self.beliefs

    def record_session(self, mu: str, fn: str, agreed: bool) -> None:
        """Full trust both ways only when the two ends hold the same SK‴."""
        self.mutual_auth.setdefault((mu, fn), []).append(agreed)
        if agreed:
            self.raise_trust(mu, fn, TrustLevel.FULL)
            self.raise_trust(fn, mu, TrustLevel.FULL)

    def mutually_authenticated(self, mu: str, fn: str) -> bool:
        outcomes = self.mutual_auth.get((mu, fn), [])
        return bool(outcomes) and outcomes[-1]

    def missing_ban_goals(self, mu: str, fn: str) -> List[str]:
        missing = []
        for key_name in BAN_KEYS:
            fact = shared_key(mu, fn, key_name)
            for holder in (mu, fn):
                if not self.holds(holder, fact):
                    missing.append(f"{holder} believes {fact}")
        return missing

    def full_trust_with(self, actor: str) -> Set[str]:
        """Honest actors that reached FULL trust with `actor`, in either direction."""
        return {
            b if a == actor else a
            for (a, b), level in self.levels.items()
            if level is TrustLevel.FULL and actor in (a, b)
        }


@dataclass(frozen=True)
class FreshnessReport:
    session_count: int
    rows: List[Tuple[int, str, str, str]]

    @property
    def key_count(self) -> int:
        return 3 * self.session_count

    def to_text(self) -> str:
        lines = [f"{self.key_count} session keys across {self.session_count} sessions, all distinct"]
        lines += [f"  {index}: SK'={a} SK''={b} SK'''={c}" for index, a, b, c in self.rows]
        return "\n".join(lines)


def audit_key_freshness(trace: Trace) -> FreshnessReport:
    """
    Checks that every SK′, SK″ and SK‴ in the trace is unique and that no K_MU-FN
    was ever used to encrypt or decrypt traffic.

    Raises:
        AuditPreconditionError: Fewer than two sessions in the trace.
        FreshnessViolation: A key repeats (with the colliding session indices), or a
            master key shows up in the traffic-key log.
    """
    if len(trace.sessions) < 2:
        raise AuditPreconditionError(f"need at least 2 sessions, trace has {len(trace.sessions)}")

    seen: Dict[bytes, int] = {}
    collisions: List[Tuple[int, int]] = []
    for index, session in enumerate(trace.sessions):
        for key in (session.first, session.second, session.third):
            if key.raw in seen:
                collisions.append((seen[key.raw], index))
            else:
                seen[key.raw] = index
    if collisions:
        raise FreshnessViolation(collisions)

    master = {fingerprint(key.raw) for key in trace.master_keys}
    leaked = [use for use in trace.key_usage if use.key_fp in master]
    if leaked:
        use = leaked[0]
        raise FreshnessViolation([], message=f"K_MU-FN used as a traffic key by {use.caller} ({use.operation})")

    rows = [
        (index, fingerprint(s.first.raw), fingerprint(s.second.raw), fingerprint(s.third.raw))
        for index, s in enumerate(trace.sessions)
    ]
    return FreshnessReport(len(trace.sessions), rows)
