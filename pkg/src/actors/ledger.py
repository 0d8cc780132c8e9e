from dataclasses import dataclass
from typing import Dict, Iterator, List

from src.errors import MalformedMessage


@dataclass
class VisaRecord:
    """
    FN-side ledger row {Pass_No; Visa_No; expiry; valid}.

    `valid` only ever goes TRUE → FALSE and `first_use_seen` is set once;
    use `VisaLedger.revoke` and `mark_used` rather than assigning the fields.
    """

    pass_no: int
    visa_no: int
    expiry: int
    valid: bool = True
    first_use_seen: bool = False
    access_count: int = 0
    max_accesses: int = 0  # 0 = unlimited

    def exhausted(self) -> bool:
        return self.max_accesses > 0 and self.access_count >= self.max_accesses

    def mark_used(self) -> None:
        self.first_use_seen = True
        self.access_count += 1


def _flag(value: bool) -> str:
    return "TRUE" if value else "FALSE"


def _read_flag(value: str) -> bool:
    if value not in ("TRUE", "FALSE"):
        raise MalformedMessage(f"expected TRUE/FALSE, got {value!r}")
    return value == "TRUE"


class VisaLedger:
    def __init__(self) -> None:
        self._records: Dict[int, VisaRecord] = {}

    def __contains__(self, visa_no: int) -> bool:
        return visa_no in self._records

    def __iter__(self) -> Iterator[VisaRecord]:
        return iter(self._records[no] for no in sorted(self._records))

    def __len__(self) -> int:
        return len(self._records)

    def add(self, record: VisaRecord) -> None:
        if record.visa_no in self._records:
            raise ValueError(f"visa {record.visa_no} already recorded")
        self._records[record.visa_no] = record

    def get(self, visa_no: int) -> VisaRecord | None:
        return self._records.get(visa_no)

    def by_pass_no(self, pass_no: int) -> List[VisaRecord]:
        return [record for record in self if record.pass_no == pass_no]

    def revoke(self, visa_no: int) -> bool:
        """Sets valid=FALSE. Returns True when the row was valid before."""
        record = self._records[visa_no]
        was_valid = record.valid
        record.valid = False
        return was_valid

    # ---------- persistence ----------
    def to_text(self) -> str:
        """
        One row per line, tab-separated: Pass_No, Visa_No, expiry, valid, then the
        operational columns first_use_seen, access_count, max_accesses.
        """
        lines = [
            "\t".join(
                [
                    str(r.pass_no),
                    str(r.visa_no),
                    str(r.expiry),
                    _flag(r.valid),
                    _flag(r.first_use_seen),
                    str(r.access_count),
                    str(r.max_accesses),
                ]
            )
            for r in self
        ]
        return "".join(line + "\n" for line in lines)

    @classmethod
    def from_text(cls, content: str) -> "VisaLedger":
        ledger = cls()
        for line_no, line in enumerate(content.splitlines(), start=1):
            if not line:
                continue
            columns = line.split("\t")
            if len(columns) not in (4, 7):
                raise MalformedMessage(f"ledger line {line_no}: expected 4 or 7 columns")
            try:
                record = VisaRecord(
                    pass_no=int(columns[0]),
                    visa_no=int(columns[1]),
                    expiry=int(columns[2]),
                    valid=_read_flag(columns[3]),
                )
                if len(columns) == 7:
                    record.first_use_seen = _read_flag(columns[4])
                    record.access_count = int(columns[5])
                    record.max_accesses = int(columns[6])
            except ValueError as exc:
                raise MalformedMessage(f"ledger line {line_no}: {exc}") from exc
            ledger.add(record)
        return ledger

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(self.to_text())

    @classmethod
    def load(cls, path: str) -> "VisaLedger":
        with open(path, "r", encoding="utf-8", newline="\n") as f:
            return cls.from_text(f.read())
