from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

from src.crypto_suite import SymmetricKey, fingerprint
from src.crypto_suite.metering import KeyUse
from src.errors import MalformedMessage
from src.wire_codec import annotate, decode, message_name


class OutcomeKind(Enum):
    ACCEPTED = "accepted"
    REJECTED = "reject"
    NEUTRAL = "neutral"  # dropped, captured, or a Reject notice reaching its addressee


@dataclass(frozen=True)
class Outcome:
    kind: OutcomeKind
    label: str = ""
    actor: str = ""

    @classmethod
    def accepted(cls, actor: str) -> "Outcome":
        return cls(OutcomeKind.ACCEPTED, "", actor)

    @classmethod
    def rejected(cls, actor: str, label: str) -> "Outcome":
        return cls(OutcomeKind.REJECTED, label, actor)

    @classmethod
    def neutral(cls, actor: str, label: str) -> "Outcome":
        return cls(OutcomeKind.NEUTRAL, label, actor)

    def __str__(self) -> str:
        if self.kind is OutcomeKind.ACCEPTED:
            return f"accepted by {self.actor}"
        if self.kind is OutcomeKind.REJECTED:
            return f"reject {self.label} by {self.actor}"
        return f"{self.label} at {self.actor}"


@dataclass(frozen=True)
class TraceEntry:
    index: int
    time: int
    sender: str
    recipient: str
    raw: bytes
    outcome: Outcome
    origin: str = "honest"

    @property
    def name(self) -> str:
        try:
            return message_name(decode(self.raw))
        except MalformedMessage:
            return "<malformed>"

    def render(self) -> str:
        header = f"#{self.index} t={self.time} {self.sender} -> {self.recipient} [{self.origin}] {self.outcome}"
        return f"{header}\n{annotate(self.raw)}"


@dataclass(frozen=True)
class SessionKeys:
    """Keys one MU/FN service session ended on; both ends agreed on them."""

    mu: str
    fn: str
    visa_no: int
    first: SymmetricKey
    second: SymmetricKey
    third: SymmetricKey


@dataclass
class Trace:
    entries: List[TraceEntry] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    sessions: List[SessionKeys] = field(default_factory=list)
    master_keys: List[SymmetricKey] = field(default_factory=list)  # every K_MU-FN issued
    key_usage: List[KeyUse] = field(default_factory=list)

    def record(self, entry: TraceEntry) -> None:
        self.entries.append(entry)

    def note(self, time: int, text: str) -> None:
        self.notes.append(f"t={time} {text}")

    def entry(self, index: int) -> TraceEntry:
        if not 0 <= index < len(self.entries):
            raise IndexError(f"trace has no message #{index}")
        return self.entries[index]

    def last_of(self, name: str) -> Optional[TraceEntry]:
        for entry in reversed(self.entries):
            if entry.name.split("(")[0] == name:
                return entry
        return None

    def to_text(self) -> str:
        parts = [entry.render() for entry in self.entries]
        if self.notes:
            parts.append("notes:\n" + "\n".join(f"  {line}" for line in self.notes))
        if self.sessions:
            rows = [
                f"  {i}: {s.mu}<->{s.fn} visa {s.visa_no} "
                f"SK'={fingerprint(s.first.raw)} SK''={fingerprint(s.second.raw)} SK'''={fingerprint(s.third.raw)}"
                for i, s in enumerate(self.sessions)
            ]
            parts.append("sessions:\n" + "\n".join(rows))
        return "\n\n".join(parts) + "\n"

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(self.to_text())
