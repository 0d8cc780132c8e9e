from typing import Dict, List, Optional, Type

from src.crypto_suite.interfaces import CryptoSuite
from src.crypto_suite.metering import OperationCounter
from src.crypto_suite.randomness import DeterministicRandom
from src.crypto_suite.suites import DefaultSuite, UnauthenticatedSuite


class SuiteManager:
    _registry: Dict[str, Type[CryptoSuite]] = {}  # suite name → suite class

    @classmethod
    def register(cls, name: str, suite_cls: Type[CryptoSuite]) -> Type["SuiteManager"]:
        cls._registry[name.lower()] = suite_cls
        return cls

    @classmethod
    def get_suite(
        cls,
        name: str = "default",
        seed: Optional[int] = None,
        caller: str = "root",
        counter: Optional[OperationCounter] = None,
    ) -> CryptoSuite:
        """
        Instantiates a registered suite.

        Args:
            name (str): Registered suite name.
            seed (int | None): Seed for the deterministic byte source; None draws from the OS.
            caller (str): Label the suite's operations are metered against.
            counter (OperationCounter | None): Shared counter, or a fresh one.

        Returns:
            CryptoSuite: The suite instance.
        """
        name = name.lower()
        if name not in cls._registry:
            raise ValueError(f"Unsupported crypto suite: {name}")
        rng = DeterministicRandom.from_seed(seed) if seed is not None else DeterministicRandom.from_os()
        return cls._registry[name](rng=rng, caller=caller, counter=counter)

    @classmethod
    def available(cls) -> List[str]:
        return sorted(cls._registry)


SuiteManager.register("default", DefaultSuite)
SuiteManager.register("unauthenticated", UnauthenticatedSuite)
