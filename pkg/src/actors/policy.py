from abc import ABC, abstractmethod
from typing import Iterable, Set, Tuple

from src.messages import VisaRequest


# === Admission Policy Interface ===
class AdmissionPolicy(ABC):
    """The FN's accept/deny decision for a visa request whose Cert_HN already verified."""

    @abstractmethod
    def admit(self, request: VisaRequest, now: int) -> bool: ...


class OpenMarketPolicy(AdmissionPolicy):
    """Admit anyone vouched for by a certified identity provider, minus explicit deny-lists."""

    def __init__(
        self,
        denied_issuers: Iterable[str] = (),
        denied_passports: Iterable[Tuple[str, int]] = (),
    ) -> None:
        self.denied_issuers: Set[str] = set(denied_issuers)
        self.denied_passports: Set[Tuple[str, int]] = set(denied_passports)

    def admit(self, request: VisaRequest, now: int) -> bool:
        issuer = request.cert_hn.subject_id
        if issuer in self.denied_issuers:
            return False
        return (issuer, request.pass_no) not in self.denied_passports


class DenyAllPolicy(AdmissionPolicy):
    def admit(self, request: VisaRequest, now: int) -> bool:
        return False
