from src.simnet.adversary import adversary_forge_token, adversary_replay
from src.simnet.attack_suite import ClaimResult, SuiteReport, run_attack_suite
from src.simnet.audit import FreshnessReport, TrustAudit, TrustLevel, audit_key_freshness
from src.simnet.coordinator import SimNet
from src.simnet.provisioning import Provisioner, World, provision_default
from src.simnet.scenario import Scenario, ScenarioResult, load_scenario, parse_scenario, run_scenario
from src.simnet.trace import Outcome, OutcomeKind, Trace

__all__ = [
    "ClaimResult",
    "FreshnessReport",
    "Outcome",
    "OutcomeKind",
    "Provisioner",
    "Scenario",
    "ScenarioResult",
    "SimNet",
    "SuiteReport",
    "Trace",
    "TrustAudit",
    "TrustLevel",
    "World",
    "adversary_forge_token",
    "adversary_replay",
    "audit_key_freshness",
    "load_scenario",
    "parse_scenario",
    "provision_default",
    "run_attack_suite",
    "run_scenario",
]
