from dataclasses import dataclass
from typing import Any, Dict

from utils import ConfigManager, TimeParser

parser = TimeParser()

DEFAULTS: Dict[str, Any] = {
    "freshness_window": "120s",
    "passport_validity": "365d",
    "visa_validity": "1d",
    "suite": "default",
    "seed": 0,
    "max_accesses": 0,
}


@dataclass(frozen=True)
class Settings:
    """
    Runtime knobs shared by the actors and the harness.
    Durations are simulation ticks (milliseconds).
    """

    freshness_window: int = 120_000
    passport_validity: int = 365 * 86_400_000
    visa_validity: int = 86_400_000
    suite: str = "default"
    seed: int = 0
    max_accesses: int = 0

    @classmethod
    def load(cls) -> "Settings":
        """Build settings from the JSON config file, falling back to DEFAULTS."""
        config = {**DEFAULTS, **ConfigManager.load_config()}
        return cls(
            freshness_window=_duration(config, "freshness_window"),
            passport_validity=_duration(config, "passport_validity"),
            visa_validity=_duration(config, "visa_validity"),
            suite=str(config["suite"]),
            seed=int(config["seed"]),
            max_accesses=int(config["max_accesses"]),
        )

    def describe(self) -> str:
        limit = self.max_accesses or "unlimited"
        return (
            f"suite={self.suite} seed={self.seed} window={parser.humanize(self.freshness_window)} "
            f"passport={parser.humanize(self.passport_validity)} visa={parser.humanize(self.visa_validity)} "
            f"max-accesses={limit}"
        )


def _duration(config: Dict[str, Any], key: str) -> int:
    ticks = parser.dehumanize(config[key])
    if ticks is None:
        raise ValueError(f"Invalid duration for '{key}': {config[key]!r}")
    return ticks
