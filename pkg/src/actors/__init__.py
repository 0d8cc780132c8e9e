from src.actors.foreign_network import ForeignNetwork, RevocationOutcome, VisaTerms
from src.actors.home_network import HomeNetwork
from src.actors.ledger import VisaLedger, VisaRecord
from src.actors.mobile_user import MobileUser
from src.actors.policy import AdmissionPolicy, DenyAllPolicy, OpenMarketPolicy
from src.actors.smart_card import SmartCard

__all__ = [
    "AdmissionPolicy",
    "DenyAllPolicy",
    "ForeignNetwork",
    "HomeNetwork",
    "MobileUser",
    "OpenMarketPolicy",
    "RevocationOutcome",
    "SmartCard",
    "VisaLedger",
    "VisaRecord",
    "VisaTerms",
]
