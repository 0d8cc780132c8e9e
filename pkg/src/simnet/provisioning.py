import json
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from logging_config import simnet_logger
from src.actors import ForeignNetwork, HomeNetwork, MobileUser, SmartCard, VisaTerms
from src.actors.policy import AdmissionPolicy
from src.crypto_suite import CryptoSuite, KeyPair, OperationCounter, SuiteManager
from src.encoding import pack_fields, read_text, text, unpack_fields
from src.errors import ScenarioError
from src.settings import Settings
from src.simnet.audit import TrustLevel
from src.simnet.coordinator import SimNet
from src.simnet.nodes import AttackerNode, ForeignNetworkNode, HomeNetworkNode, MobileUserNode
from src.tokens import Certificate, ProviderRole, issue_certificate

CERT_VALIDITY = 10 * 365 * 86_400_000
VISA_NUMBER_BLOCK = 1000  # FN n numbers its visas from 1 + n * block
DIRECTORY = "directory.json"


def write_keys(path: str, keys: KeyPair) -> None:
    with open(path, "wb") as f:
        f.write(pack_fields([text(keys.role_label), keys.public_key, keys.private_key]))


def read_keys(path: str) -> KeyPair:
    with open(path, "rb") as f:
        role, public_key, private_key = unpack_fields(f.read(), 3)
    return KeyPair(public_key, private_key, read_text(role))


@dataclass
class World:
    """Every actor of one run, already attached to its bus."""

    net: SimNet
    suite: CryptoSuite
    settings: Settings
    ca_name: Optional[str] = None
    ca_keys: Optional[KeyPair] = None
    home_networks: Dict[str, HomeNetworkNode] = field(default_factory=dict)
    foreign_networks: Dict[str, ForeignNetworkNode] = field(default_factory=dict)
    mobile_users: Dict[str, MobileUserNode] = field(default_factory=dict)
    attackers: Dict[str, AttackerNode] = field(default_factory=dict)
    homes: Dict[str, str] = field(default_factory=dict)  # MU → HN

    @property
    def counter(self) -> OperationCounter:
        return self.suite.counter

    @property
    def ca_pk(self) -> bytes:
        if self.ca_keys is None:
            raise ScenarioError("no certificate authority declared")
        return self.ca_keys.public_key

    def honest_actors(self) -> List[str]:
        return sorted([*self.home_networks, *self.foreign_networks, *self.mobile_users])


class Provisioner:
    """
    Builds a world actor by actor. Each actor gets its own metered suite bound from
    one seeded root, so the same declarations in the same order give the same keys.
    """

    def __init__(self, settings: Optional[Settings] = None, seed: Optional[int] = None, suite: Optional[str] = None):
        self.settings = settings or Settings()
        self.seed = self.settings.seed if seed is None else seed
        self.suite_name = suite or self.settings.suite
        root = SuiteManager.get_suite(self.suite_name, seed=self.seed, caller="provisioner")
        self.world = World(net=SimNet(), suite=root, settings=self.settings)
        self._ca_suite: Optional[CryptoSuite] = None

    def _check_free(self, name: str) -> None:
        if name in self.world.net.nodes or name == self.world.ca_name:
            raise ScenarioError(f"actor {name!r} declared twice")

    def _certify(self, name: str, keys: KeyPair, role: ProviderRole) -> Certificate:
        ca_keys = self.world.ca_keys
        if ca_keys is None:
            raise ScenarioError(f"declare the certificate authority before {name!r}")
        return issue_certificate(self._ca_suite or self.world.suite, ca_keys, name, keys.public_key, role, CERT_VALIDITY)

    # ---------- declarations ----------
    def add_ca(self, name: str = "CA", keys: Optional[KeyPair] = None) -> KeyPair:
        if self.world.ca_name is not None:
            raise ScenarioError("only one certificate authority per world")
        self._check_free(name)
        suite = self._ca_suite = self.world.suite.bind(name)
        self.world.ca_name = name
        self.world.ca_keys = keys or suite.generate_keypair("ca")
        return self.world.ca_keys

    def add_home_network(
        self, name: str, keys: Optional[KeyPair] = None, cert: Optional[Certificate] = None
    ) -> HomeNetworkNode:
        self._check_free(name)
        suite = self.world.suite.bind(name)
        keys = keys or suite.generate_keypair("hn")
        cert = cert or self._certify(name, keys, ProviderRole.IDENTITY_PROVIDER)
        actor = HomeNetwork(
            name, suite, keys, cert, self.world.ca_pk, self.world.net.clock_for(name), self.settings.freshness_window
        )
        node = HomeNetworkNode(actor)
        self.world.net.attach(node)
        self.world.home_networks[name] = node
        return node

    def add_foreign_network(
        self,
        name: str,
        keys: Optional[KeyPair] = None,
        cert: Optional[Certificate] = None,
        policy: Optional[AdmissionPolicy] = None,
        max_accesses: Optional[int] = None,
    ) -> ForeignNetworkNode:
        self._check_free(name)
        suite = self.world.suite.bind(name)
        keys = keys or suite.generate_keypair("fn")
        cert = cert or self._certify(name, keys, ProviderRole.NETWORK_PROVIDER)
        terms = VisaTerms(
            validity=self.settings.visa_validity,
            max_accesses=self.settings.max_accesses if max_accesses is None else max_accesses,
        )
        actor = ForeignNetwork(
            name,
            suite,
            keys,
            cert,
            self.world.ca_pk,
            self.world.net.clock_for(name),
            self.settings.freshness_window,
            policy=policy,
            terms=terms,
            first_visa_no=1 + VISA_NUMBER_BLOCK * len(self.world.foreign_networks),
        )
        node = ForeignNetworkNode(actor)
        self.world.net.attach(node)
        self.world.foreign_networks[name] = node
        return node

    def add_mobile_user(self, name: str, home: str, card: Optional[SmartCard] = None) -> MobileUserNode:
        self._check_free(name)
        hn = self.world.home_networks.get(home)
        if hn is None:
            raise ScenarioError(f"undeclared home network {home!r}")
        suite = self.world.suite.bind(name)
        if card is None:
            enrolment = self.world.suite.rng.fork(f"enrol/{name}")
            sc_id = enrolment.bytes(16)
            sealed, master_key = hn.actor.register_mobile_user(
                name, sc_id, enrolment.bytes(32), self.settings.passport_validity
            )
            pass_no = max(hn.actor.issued_passports)
            card = SmartCard(name, sc_id, master_key, sealed, pass_no, hn.actor.cert)
        actor = MobileUser(name, suite, self.world.net.clock_for(name), card, self.settings.freshness_window)
        node = MobileUserNode(actor)
        self.world.net.attach(node)
        self.world.mobile_users[name] = node
        self.world.homes[name] = home
        self.world.net.audit.raise_trust(name, home, TrustLevel.FULL)
        self.world.net.audit.raise_trust(home, name, TrustLevel.FULL)
        return node

    def add_attacker(self, name: str) -> AttackerNode:
        self._check_free(name)
        suite = self.world.suite.bind(name)
        node = AttackerNode(name, suite, suite.generate_keypair("attacker"))
        self.world.net.attach(node)
        self.world.attackers[name] = node
        return node

    def trust(self, fn: str, hn: str) -> None:
        fn_node = self.world.foreign_networks.get(fn)
        hn_node = self.world.home_networks.get(hn)
        if fn_node is None or hn_node is None:
            raise ScenarioError(f"trust needs a declared FN and HN, got {fn!r} and {hn!r}")
        if not fn_node.actor.trust_home_network(hn_node.actor.cert):
            raise ScenarioError(f"{fn} refused the certificate of {hn}")

    # ---------- persistence ----------
    def save(self, out_dir: str) -> List[str]:
        """
        Writes key, certificate, smart card and registry files plus a directory manifest.

        Raises:
            FileExistsError: `out_dir` already holds a provisioned world.
            OSError: `out_dir` cannot be created or written.
        """
        world = self.world
        if world.ca_name is None or world.ca_keys is None:
            raise ScenarioError("nothing to save without a certificate authority")
        os.makedirs(out_dir, exist_ok=True)
        if os.path.exists(os.path.join(out_dir, DIRECTORY)):
            raise FileExistsError(f"{out_dir} is already provisioned; refusing to overwrite")

        written = []

        def target(name: str) -> str:
            path = os.path.join(out_dir, name)
            written.append(path)
            return path

        write_keys(target(f"{world.ca_name}.key"), world.ca_keys)
        for name, hn in sorted(world.home_networks.items()):
            write_keys(target(f"{name}.key"), hn.actor.keys)
            with open(target(f"{name}.cert"), "wb") as f:
                f.write(hn.actor.cert.to_bytes())
            hn.actor.save_registry(target(f"{name}.registry.json"))
        for name, fn in sorted(world.foreign_networks.items()):
            write_keys(target(f"{name}.key"), fn.actor.keys)
            with open(target(f"{name}.cert"), "wb") as f:
                f.write(fn.actor.cert.to_bytes())
        for name, mu in sorted(world.mobile_users.items()):
            if mu.actor.smart_card is not None:
                mu.actor.smart_card.save(target(f"{name}.card"))

        manifest = {
            "suite": self.suite_name,
            "seed": self.seed,
            "ca": world.ca_name,
            "home_networks": sorted(world.home_networks),
            "foreign_networks": sorted(world.foreign_networks),
            "mobile_users": dict(sorted(world.homes.items())),
        }
        with open(target(DIRECTORY), "w") as f:
            json.dump(manifest, f, indent=4)
        simnet_logger.info(f"provisioned {len(written)} files into {out_dir}")
        return written

    def load(self, out_dir: str) -> None:
        """Declares every actor listed in a saved manifest, with its saved key material."""
        path = os.path.join(out_dir, DIRECTORY)
        if not os.path.exists(path):
            raise ScenarioError(f"{out_dir} holds no {DIRECTORY}")
        with open(path, "r") as f:
            manifest = json.load(f)

        def file(name: str) -> str:
            return os.path.join(out_dir, name)

        def cert(name: str) -> Certificate:
            with open(file(f"{name}.cert"), "rb") as f:
                return Certificate.from_bytes(f.read())

        self.add_ca(manifest["ca"], read_keys(file(f"{manifest['ca']}.key")))
        for name in manifest["home_networks"]:
            node = self.add_home_network(name, read_keys(file(f"{name}.key")), cert(name))
            node.actor.load_registry(file(f"{name}.registry.json"))
        for name in manifest["foreign_networks"]:
            self.add_foreign_network(name, read_keys(file(f"{name}.key")), cert(name))
        for name, home in manifest["mobile_users"].items():
            self.add_mobile_user(name, home, SmartCard.load(file(f"{name}.card")))


def provision_default(
    settings: Optional[Settings] = None, seed: Optional[int] = None, suite: Optional[str] = None
) -> Provisioner:
    """CA, one home network, two foreign networks, one mobile user."""
    provisioner = Provisioner(settings, seed, suite)
    provisioner.add_ca("CA")
    provisioner.add_home_network("HN1")
    provisioner.add_foreign_network("FN1")
    provisioner.add_foreign_network("FN2")
    provisioner.add_mobile_user("alice", "HN1")
    return provisioner

