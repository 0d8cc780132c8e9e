import os
import tempfile

# the loggers open their files at import time
os.environ.setdefault("PVKIT_LOG_DIR", tempfile.mkdtemp(prefix="pvkit-logs-"))
os.environ.setdefault("PVKIT_CONFIG", os.path.join(tempfile.mkdtemp(prefix="pvkit-config-"), "pvkit.json"))

from typing import Callable, Optional  # noqa: E402

import pytest  # noqa: E402

from src.crypto_suite import CryptoSuite, SimClock, SuiteManager  # noqa: E402
from src.simnet.provisioning import Provisioner, provision_default  # noqa: E402

SCENARIO_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "scenarios")


@pytest.fixture
def suite() -> CryptoSuite:
    return SuiteManager.get_suite("default", seed=1234, caller="test")


@pytest.fixture
def clock() -> SimClock:
    return SimClock(1_000)


@pytest.fixture
def world() -> Provisioner:
    """CA, HN1, FN1, FN2, alice (home HN1) and the attacker eve, all on one bus."""
    provisioner = provision_default(seed=0)
    provisioner.add_attacker("eve")
    return provisioner


@pytest.fixture
def roam() -> Callable[..., int]:
    """Runs a full visa acquisition over the bus and returns the new Visa_No."""

    def acquire(provisioner: Provisioner, mu: str = "alice", fn: str = "FN1") -> int:
        node = provisioner.world.mobile_users[mu]
        before = set(node.actor.visas)
        node.acquire(fn)
        provisioner.world.net.deliver_all()
        (visa_no,) = set(node.actor.visas) - before
        return visa_no

    return acquire


@pytest.fixture
def serve() -> Callable[..., None]:
    """Runs one service session over the bus."""

    def session(provisioner: Provisioner, mu: str = "alice", visa_no: Optional[int] = None) -> None:
        provisioner.world.mobile_users[mu].service(visa_no)
        provisioner.world.net.deliver_all()

    return session


@pytest.fixture
def parties(world):
    """The HN1, FN1 and alice actors of the default world, for handler-level tests."""
    w = world.world
    return w.home_networks["HN1"].actor, w.foreign_networks["FN1"].actor, w.mobile_users["alice"].actor
