"""
Scenario files: one step per line, `#` starts a comment.

Declarations build the world (`ca`, `hn`, `fn`, `mu`, `attacker`, `trust`, `load`);
`seed`, `suite` and `window` set run parameters wherever they appear. Every other line
is a script step acting on the bus or an `expect` assertion, which is checked against
whatever happened since the previous `expect`.
"""

import shlex
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Tuple

from logging_config import simnet_logger
from src.actors import DenyAllPolicy
from src.errors import (
    FreshnessViolation,
    AuditPreconditionError,
    PassportVisaError,
    ScenarioError,
    ScenarioParseError,
)
from src.settings import Settings
from src.simnet.adversary import adversary_replay, forge_in_flight, substitute_certificate
from src.simnet.audit import TrustLevel, audit_key_freshness
from src.simnet.coordinator import SimNet
from src.simnet.nodes import ForeignNetworkNode, HomeNetworkNode, MobileUserNode
from src.simnet.provisioning import Provisioner, World
from src.simnet.trace import OutcomeKind, Trace
from utils import TimeParser

parser = TimeParser()

SETTINGS_VERBS = ("seed", "suite", "window")

# verb → (min args, max args)
ARITY: Dict[str, Tuple[int, int]] = {
    "load": (1, 1),
    "ca": (1, 1),
    "hn": (1, 1),
    "fn": (1, 3),
    "mu": (2, 2),
    "attacker": (1, 1),
    "trust": (2, 2),
    "acquire": (2, 3),
    "service": (1, 2),
    "revoke-visa": (1, 2),
    "revoke-passport": (2, 3),
    "deliver": (0, 1),
    "drop": (0, 0),
    "delay": (1, 1),
    "duplicate": (0, 0),
    "tamper": (1, 1),
    "redirect": (1, 1),
    "inject": (3, 3),
    "replay": (2, 2),
    "forge": (3, 3),
    "swap-cert": (1, 1),
    "advance": (1, 1),
    "skew": (2, 2),
    "expect": (1, 4),
}

EXPECT_ARITY: Dict[str, int] = {
    "accepted": 0,
    "reject": 1,
    "error": 1,
    "trust": 3,
    "visa-valid": 3,
    "mutual-auth": 2,
    "ban-goals": 2,
    "no-full-trust": 1,
    "freshness": 0,
}


@dataclass(frozen=True)
class Step:
    line_no: int
    verb: str
    args: Tuple[str, ...]


@dataclass
class Scenario:
    steps: List[Step] = field(default_factory=list)
    seed: Optional[int] = None
    suite: Optional[str] = None
    window: Optional[int] = None
    source: str = "<memory>"


# === Parsing ===
def _duration(line_no: int, value: str) -> int:
    ticks = parser.dehumanize(value)
    if ticks is None:
        raise ScenarioParseError(line_no, f"invalid duration {value!r}")
    return ticks


def _integer(line_no: int, value: str) -> int:
    try:
        number = int(value, 0)
    except ValueError:
        raise ScenarioParseError(line_no, f"expected an integer, got {value!r}") from None
    if number < 0:
        raise ScenarioParseError(line_no, f"expected a non-negative integer, got {value!r}")
    return number


def _check_step(step: Step) -> None:
    n, verb, args = step.line_no, step.verb, step.args
    if verb in ("delay", "advance"):
        _duration(n, args[0])
    elif verb == "skew":
        _duration(n, args[1])
    elif verb == "tamper":
        _integer(n, args[0])
    elif verb == "deliver" and args and args[0] != "all":
        _integer(n, args[0])
    elif verb in ("service", "revoke-visa") and len(args) == 2:
        _integer(n, args[1])
    elif verb == "inject":
        try:
            bytes.fromhex(args[2])
        except ValueError:
            raise ScenarioParseError(n, f"inject payload is not hex: {args[2]!r}") from None
    elif verb == "forge" and args[0] not in ("passport", "visa"):
        raise ScenarioParseError(n, f"can only forge passport or visa, not {args[0]!r}")
    elif verb == "fn":
        for option in args[1:]:
            if option != "deny-all" and not option.startswith("max-accesses="):
                raise ScenarioParseError(n, f"unknown fn option {option!r}")
            if option.startswith("max-accesses="):
                _integer(n, option.split("=", 1)[1])
    elif verb == "expect":
        kind = args[0]
        if kind not in EXPECT_ARITY:
            raise ScenarioParseError(n, f"unknown expectation {kind!r}")
        if len(args) - 1 != EXPECT_ARITY[kind]:
            raise ScenarioParseError(n, f"expect {kind} takes {EXPECT_ARITY[kind]} argument(s)")
        if kind == "trust" and args[3].upper() not in TrustLevel.__members__:
            raise ScenarioParseError(n, f"unknown trust level {args[3]!r}")
        if kind == "visa-valid":
            _integer(n, args[2])
            if args[3] not in ("true", "false"):
                raise ScenarioParseError(n, "visa-valid expects true or false")


def parse_scenario(content: str, source: str = "<memory>") -> Scenario:
    """
    Raises:
        ScenarioParseError: Unknown verb, wrong argument count, or a malformed value.
    """
    scenario = Scenario(source=source)
    for line_no, line in enumerate(content.splitlines(), start=1):
        try:
            tokens = shlex.split(line, comments=True)
        except ValueError as exc:
            raise ScenarioParseError(line_no, str(exc)) from exc
        if not tokens:
            continue
        verb, args = tokens[0].lower(), tuple(tokens[1:])
        if verb in SETTINGS_VERBS:
            if len(args) != 1:
                raise ScenarioParseError(line_no, f"{verb} takes exactly one argument")
            if verb == "seed":
                scenario.seed = _integer(line_no, args[0])
            elif verb == "suite":
                scenario.suite = args[0]
            else:
                scenario.window = _duration(line_no, args[0])
            continue
        if verb not in ARITY:
            raise ScenarioParseError(line_no, f"unknown step {verb!r}")
        low, high = ARITY[verb]
        if not low <= len(args) <= high:
            raise ScenarioParseError(line_no, f"{verb} takes {low}..{high} arguments, got {len(args)}")
        step = Step(line_no, verb, args)
        _check_step(step)
        scenario.steps.append(step)
    return scenario


def load_scenario(path: str) -> Scenario:
    with open(path, "r", encoding="utf-8") as f:
        return parse_scenario(f.read(), source=path)


# === Running ===
@dataclass
class ScenarioResult:
    trace: Trace
    world: World
    failures: List[str] = field(default_factory=list)
    checked: int = 0

    @property
    def passed(self) -> bool:
        return not self.failures


def _kebab(name: str) -> str:
    return "".join(f"-{c.lower()}" if c.isupper() else c for c in name).lstrip("-")


class ScenarioRunner:
    """Executes a scenario's steps in order against a freshly provisioned world."""

    def __init__(self, scenario: Scenario, settings: Optional[Settings] = None, seed: Optional[int] = None) -> None:
        settings = settings or Settings()
        if scenario.window is not None:
            settings = replace(settings, freshness_window=scenario.window)
        if seed is None:
            seed = scenario.seed if scenario.seed is not None else settings.seed
        self.scenario = scenario
        try:
            self.provisioner = Provisioner(settings, seed, scenario.suite)
        except ValueError as exc:
            raise ScenarioError(f"{scenario.source}: {exc}") from exc
        self.result = ScenarioResult(self.net.trace, self.world)
        self._mark = 0
        self._errors: List[str] = []  # kebab-case names of errors raised by script steps
        self.net.trace.key_usage = self.world.counter.key_usage
        self._handlers: Dict[str, Callable[..., None]] = {
            verb: getattr(self, f"_step_{verb.replace('-', '_')}") for verb in ARITY
        }

    @property
    def world(self) -> World:
        return self.provisioner.world

    @property
    def net(self) -> SimNet:
        return self.provisioner.world.net

    def run(self) -> ScenarioResult:
        for step in self.scenario.steps:
            try:
                self._handlers[step.verb](step, *step.args)
            except ScenarioError as exc:
                raise ScenarioError(f"{self.scenario.source} line {step.line_no}: {exc}") from exc
            except PassportVisaError as exc:
                name = _kebab(type(exc).__name__)
                self._errors.append(name)
                self.net.trace.note(self.net.now(), f"line {step.line_no}: {step.verb} raised {name}: {exc}")
        for violation in self.net.violations:
            self.result.failures.append(f"invariant broken {violation}")
        for line in self.net.audit.transitions:
            simnet_logger.debug(line)
        return self.result

    # ---------- lookups ----------
    def _mu(self, name: str) -> MobileUserNode:
        node = self.net.node(name)
        if not isinstance(node, MobileUserNode):
            raise ScenarioError(f"{name!r} is not a mobile user")
        return node

    def _hn(self, name: str) -> HomeNetworkNode:
        node = self.net.node(name)
        if not isinstance(node, HomeNetworkNode):
            raise ScenarioError(f"{name!r} is not a home network")
        return node

    def _fn(self, name: str) -> ForeignNetworkNode:
        node = self.net.node(name)
        if not isinstance(node, ForeignNetworkNode):
            raise ScenarioError(f"{name!r} is not a foreign network")
        return node

    # ---------- declarations ----------
    def _step_load(self, step: Step, directory: str) -> None:
        self.provisioner.load(directory)

    def _step_ca(self, step: Step, name: str) -> None:
        self.provisioner.add_ca(name)

    def _step_hn(self, step: Step, name: str) -> None:
        self.provisioner.add_home_network(name)

    def _step_fn(self, step: Step, name: str, *options: str) -> None:
        policy = DenyAllPolicy() if "deny-all" in options else None
        limits = [int(o.split("=", 1)[1], 0) for o in options if o.startswith("max-accesses=")]
        self.provisioner.add_foreign_network(name, policy=policy, max_accesses=limits[-1] if limits else None)

    def _step_mu(self, step: Step, name: str, home: str) -> None:
        self.provisioner.add_mobile_user(name, home)

    def _step_attacker(self, step: Step, name: str) -> None:
        self.provisioner.add_attacker(name)

    def _step_trust(self, step: Step, fn: str, hn: str) -> None:
        self.provisioner.trust(fn, hn)

    # ---------- protocol steps ----------
    def _step_acquire(self, step: Step, mu: str, fn: str, descriptor: str = "roaming") -> None:
        self.net.node(fn)
        self._mu(mu).acquire(fn, descriptor)

    def _step_service(self, step: Step, mu: str, visa_no: Optional[str] = None) -> None:
        self._mu(mu).service(int(visa_no, 0) if visa_no else None)

    def _step_revoke_visa(self, step: Step, mu: str, visa_no: Optional[str] = None) -> None:
        self._mu(mu).revoke(int(visa_no, 0) if visa_no else None)

    def _step_revoke_passport(self, step: Step, hn: str, mu: str, recipients: Optional[str] = None) -> None:
        pass_no = self._mu(mu).actor.card.pass_no
        fns = recipients.split(",") if recipients else None
        self._hn(hn).revoke(pass_no, fns)

    # ---------- bus steps ----------
    def _step_deliver(self, step: Step, count: Optional[str] = None) -> None:
        if count == "all":
            self.net.deliver_all()
        else:
            self.net.deliver(int(count, 0) if count else 1)

    def _step_drop(self, step: Step) -> None:
        self.net.drop()

    def _step_delay(self, step: Step, duration: str) -> None:
        self.net.delay(_duration(step.line_no, duration))

    def _step_duplicate(self, step: Step) -> None:
        self.net.duplicate()

    def _step_tamper(self, step: Step, index: str) -> None:
        self.net.tamper(int(index, 0))

    def _step_redirect(self, step: Step, recipient: str) -> None:
        self.net.redirect(recipient)

    def _step_inject(self, step: Step, sender: str, recipient: str, payload: str) -> None:
        self.net.node(sender)
        self.net.node(recipient)
        self.net.send(sender, recipient, bytes.fromhex(payload), origin="inject")

    def _step_replay(self, step: Step, which: str, recipient: str) -> None:
        if which.isdigit():
            index = int(which)
        else:
            entry = self.net.trace.last_of(which)
            if entry is None:
                raise ScenarioError(f"no {which} in the trace to replay")
            index = entry.index
        adversary_replay(self.net, index, recipient)

    def _step_forge(self, step: Step, kind: str, attacker: str, target: str) -> None:
        node = self.world.attackers.get(attacker)
        if node is None:
            raise ScenarioError(f"{attacker!r} is not a declared attacker")
        verifier = self._hn(target) if kind == "passport" else self._fn(target)
        forge_in_flight(self.net, node.suite, kind, node.keys, verifier.actor.keys.public_key)

    def _step_swap_cert(self, step: Step, fn: str) -> None:
        top = self.net.peek()
        if top is None:
            raise ScenarioError("no message in flight")
        self.net.rewrite(substitute_certificate(top.raw, self._fn(fn).actor.cert), origin="swapped-cert")

    def _step_advance(self, step: Step, duration: str) -> None:
        self.net.advance(_duration(step.line_no, duration))

    def _step_skew(self, step: Step, actor: str, duration: str) -> None:
        self.net.skew(actor, _duration(step.line_no, duration))

    # ---------- assertions ----------
    def _step_expect(self, step: Step, kind: str, *args: str) -> None:
        problem = self._evaluate(kind, args)
        said = " ".join((kind, *args))
        self.result.checked += 1
        if problem:
            self.result.failures.append(f"line {step.line_no}: expect {said}: {problem}")
            simnet_logger.warning(self.result.failures[-1])
        else:
            simnet_logger.info(f"line {step.line_no}: expect {said} held")
        self._mark = len(self.net.trace.entries)
        self._errors.clear()

    def _evaluate(self, kind: str, args: Tuple[str, ...]) -> str:
        outcomes = self.net.outcomes_since(self._mark)
        seen = ", ".join(str(o) for o in outcomes) or "nothing"
        audit = self.net.audit
        if kind == "accepted":
            if any(o.kind is OutcomeKind.REJECTED for o in outcomes):
                return f"saw {seen}"
            if not any(o.kind is OutcomeKind.ACCEPTED for o in outcomes):
                return "nothing was accepted"
            return ""
        if kind == "reject":
            hit = any(o.kind is OutcomeKind.REJECTED and o.label == args[0].replace("-", "_") for o in outcomes)
            return "" if hit else f"saw {seen}"
        if kind == "error":
            return "" if args[0] in self._errors else f"raised {self._errors or 'nothing'}"
        if kind == "trust":
            a, b, level = args
            actual = audit.trust(self.net.node(a).name, self.net.node(b).name)
            return "" if actual is TrustLevel.from_label(level) else f"trust is {actual.name}"
        if kind == "visa-valid":
            fn, visa_no, expected = args
            record = self._fn(fn).actor.visa_ledger.get(int(visa_no, 0))
            if record is None:
                return f"{fn} has no visa {visa_no}"
            return "" if record.valid == (expected == "true") else f"valid is {record.valid}"
        if kind == "mutual-auth":
            mu, fn = self._mu(args[0]).name, self._fn(args[1]).name
            return "" if audit.mutually_authenticated(mu, fn) else "no agreed SK''' yet"
        if kind == "ban-goals":
            missing = audit.missing_ban_goals(self._mu(args[0]).name, self._fn(args[1]).name)
            return "" if not missing else f"missing {missing}"
        if kind == "no-full-trust":
            peers = audit.full_trust_with(self.net.node(args[0]).name)
            return "" if not peers else f"full trust with {sorted(peers)}"
        try:
            report = audit_key_freshness(self.net.trace)
        except (AuditPreconditionError, FreshnessViolation) as exc:
            return str(exc)
        self.net.trace.note(self.net.now(), report.to_text().splitlines()[0])
        return ""


def run_scenario(scenario: Scenario, settings: Optional[Settings] = None, seed: Optional[int] = None) -> ScenarioResult:
    """
    Runs `scenario` and returns its trace with any assertion failures.

    Raises:
        ScenarioError: A step names an undeclared actor or does something the bus cannot
            (tamper index out of range, no message in flight, ...).
    """
    return ScenarioRunner(scenario, settings, seed).run()
