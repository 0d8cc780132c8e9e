from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Tuple

from logging_config import simnet_logger
from src.encoding import unpack_fields
from src.errors import PassportVisaError
from src.messages import ServiceRequest, VisaRequest
from src.settings import Settings
from src.simnet.adversary import adversary_forge_token, adversary_replay, substitute_certificate
from src.simnet.audit import TrustLevel, audit_key_freshness
from src.simnet.coordinator import SimNet
from src.simnet.provisioning import Provisioner, provision_default
from src.simnet.trace import OutcomeKind
from src.tokens import PassportBody, SealedPassport, SealedVisa, VisaBody
from src.wire_codec import encode

MU, HN, FN, OTHER_FN, ATTACKER = "alice", "HN1", "FN1", "FN2", "eve"


@dataclass
class ClaimResult:
    claim: str
    upheld: bool
    details: List[str] = field(default_factory=list)


@dataclass
class SuiteReport:
    suite: str
    seed: int
    claims: List[ClaimResult]

    @property
    def all_upheld(self) -> bool:
        return all(claim.upheld for claim in self.claims)

    def to_text(self) -> str:
        lines = [f"attack suite (crypto suite {self.suite}, seed {self.seed})"]
        for claim in self.claims:
            lines.append(f"[{'PASS' if claim.upheld else 'FAIL'}] {claim.claim}")
            lines += [f"    {detail}" for detail in claim.details]
        upheld = sum(claim.upheld for claim in self.claims)
        lines.append(f"{upheld}/{len(self.claims)} claims upheld")
        return "\n".join(lines)


def _world(suite: str, seed: int, settings: Optional[Settings]) -> Provisioner:
    provisioner = provision_default(settings, seed, suite)
    provisioner.add_attacker(ATTACKER)
    return provisioner


def _acquire(provisioner: Provisioner, fn: str = FN) -> int:
    mu = provisioner.world.mobile_users[MU]
    mu.acquire(fn)
    provisioner.world.net.deliver_all()
    if mu.last_visa_no is None:
        raise PassportVisaError(f"{MU} could not acquire a visa from {fn}")
    return mu.last_visa_no


def _session(provisioner: Provisioner) -> None:
    provisioner.world.mobile_users[MU].service()
    provisioner.world.net.deliver_all()


def _accepted_by(net: SimNet, mark: int, actor: str) -> bool:
    return any(o.kind is OutcomeKind.ACCEPTED and o.actor == actor for o in net.outcomes_since(mark))


def _rejected(net: SimNet, mark: int, label: Optional[str] = None) -> bool:
    return any(
        o.kind is OutcomeKind.REJECTED and (label is None or o.label == label) for o in net.outcomes_since(mark)
    )


# === Claims ===
def forgery_claim(suite: str = "default", seed: int = 0, settings: Optional[Settings] = None, trials: int = 100) -> ClaimResult:
    """Passports and visas signed by anyone but their issuer are refused."""
    provisioner = _world(suite, seed, settings)
    world = provisioner.world
    net = world.net
    alice, eve = world.mobile_users[MU], world.attackers[ATTACKER]
    hn, fn = world.home_networks[HN], world.foreign_networks[FN]
    visa_no = _acquire(provisioner)
    visa_request: VisaRequest = alice.actor.begin_visa_acquisition(FN, "roaming")
    service_request: ServiceRequest = alice.actor.begin_service(visa_no, "network-access")

    def attempt(raw: bytes, origin: str, verifier: str) -> bool:
        mark = len(net.trace.entries)
        net.send(MU, FN, raw, origin=origin)
        net.deliver_all()
        return _accepted_by(net, mark, verifier)

    passports = visas = 0
    for _ in range(trials):
        forged = adversary_forge_token(eve.suite, "passport", eve.keys, hn.actor.keys.public_key)
        passports += attempt(encode(replace(visa_request, sealed_passport=SealedPassport(forged))), "forged", HN)
        forged = adversary_forge_token(eve.suite, "visa", eve.keys, fn.actor.keys.public_key)
        visas += attempt(encode(replace(service_request, sealed_visa=SealedVisa(forged))), "forged", FN)

    # honest signatures over relabelled fields
    body_raw, signature = unpack_fields(
        hn.actor.suite.unseal_asym(hn.actor.keys.private_key, alice.actor.card.sealed_passport.ciphertext), 2
    )
    relabelled = replace(PassportBody.from_bytes(body_raw), id_mu=ATTACKER)
    forged = adversary_forge_token(
        eve.suite, "passport", eve.keys, hn.actor.keys.public_key, body=relabelled, signature=signature
    )
    relabels = attempt(encode(replace(visa_request, sealed_passport=SealedPassport(forged))), "relabelled", HN)
    body_raw, signature = unpack_fields(
        fn.actor.suite.unseal_asym(fn.actor.keys.private_key, service_request.sealed_visa.ciphertext), 2
    )
    visa_body = VisaBody.from_bytes(body_raw)
    forged = adversary_forge_token(
        eve.suite, "visa", eve.keys, fn.actor.keys.public_key, body=replace(visa_body, pass_no=visa_body.pass_no + 1),
        signature=signature,
    )
    relabels += attempt(encode(replace(service_request, sealed_visa=SealedVisa(forged))), "relabelled", FN)

    return ClaimResult(
        "forgery",
        passports == visas == relabels == 0,
        [
            f"{trials} forged passports, {passports} accepted",
            f"{trials} forged visas, {visas} accepted",
            f"2 relabelled tokens with honest signatures, {relabels} accepted",
        ],
    )


def mutual_auth_claim(suite: str = "default", seed: int = 0, settings: Optional[Settings] = None) -> ClaimResult:
    """Three sessions end in agreed SK‴ and FULL trust; an altered response is refused."""
    provisioner = _world(suite, seed, settings)
    net = provisioner.world.net
    audit = net.audit
    _acquire(provisioner)
    for _ in range(3):
        _session(provisioner)
    details = []
    if not audit.mutually_authenticated(MU, FN):
        details.append("no agreed SK''' after three sessions")
    if audit.trust(MU, FN) is not TrustLevel.FULL or audit.trust(FN, MU) is not TrustLevel.FULL:
        details.append(f"trust {MU}<->{FN} is {audit.trust(MU, FN).name}/{audit.trust(FN, MU).name}")
    details += [f"missing belief: {goal}" for goal in audit.missing_ban_goals(MU, FN)]

    provisioner.world.mobile_users[MU].service()
    net.deliver()  # ServiceRequest reaches the FN, its response is queued
    response = net.peek()
    if response is None:
        details.append("no ServiceResponse to tamper with")
    else:
        net.tamper(len(response.raw) - 1)
        mark = len(net.trace.entries)
        net.deliver()
        if _accepted_by(net, mark, MU):
            details.append("altered ServiceResponse accepted by the mobile user")
    if audit.full_trust_with(ATTACKER):
        details.append(f"{ATTACKER} reached FULL trust")
    details += net.violations
    upheld = not details
    return ClaimResult("mutual-authentication", upheld, details or ["SK''' agreed, FULL trust, altered response refused"])


def replay_claim(
    suite: str = "default", seed: int = 0, settings: Optional[Settings] = None, trials: int = 5
) -> ClaimResult:
    """Replays, redirections and identity swaps are refused across `trials` seeded worlds."""
    replays = redirects = 0
    details: List[str] = []
    for trial in range(trials):
        provisioner = _world(suite, seed + trial, settings)
        world = provisioner.world
        net = world.net
        _acquire(provisioner)
        _session(provisioner)

        def replay_stale() -> None:
            net.advance(world.settings.freshness_window + 1_000)
            adversary_replay(net, _index(net, "VisaRequest"), FN, sender=ATTACKER)

        checks: List[Tuple[str, Callable[[], object], str]] = [
            ("VisaGrant replayed to the mobile user",
             lambda: adversary_replay(net, _index(net, "VisaGrant"), MU, sender=FN), "nonce_mismatch"),
            ("ServiceRequest replayed after its session",
             lambda: adversary_replay(net, _index(net, "ServiceRequest"), FN, sender=ATTACKER), "bad_proof"),
            ("VisaRequest replayed past the freshness window", replay_stale, "stale"),
        ]
        for name, action, label in checks:
            mark = len(net.trace.entries)
            action()
            if not _rejected(net, mark, label) or any(
                o.kind is OutcomeKind.ACCEPTED for o in net.outcomes_since(mark)
            ):
                replays += 1
                details.append(f"seed {seed + trial}: {name} not refused with {label}")

        # id_FN rewritten in flight: M1 redirected, then Cert_FN swapped inside M2
        for variant in ("redirect", "swap-cert"):
            world.mobile_users[MU].acquire(FN)
            if variant == "redirect":
                net.redirect(OTHER_FN)
            else:
                net.deliver()
                top = net.peek()
                if top is not None:
                    net.rewrite(substitute_certificate(top.raw, world.foreign_networks[OTHER_FN].actor.cert), variant)
            mark = len(net.trace.entries)
            net.deliver_all()
            if not _rejected(net, mark, "id_mismatch"):
                redirects += 1
                details.append(f"seed {seed + trial}: {variant} not refused with id_mismatch")

    upheld = replays == 0 and redirects == 0
    summary = f"{trials} trace(s): {replays} replays and {redirects} identity rewrites accepted"
    return ClaimResult("replay-and-mitm", upheld, [summary, *details])


def _index(net: SimNet, name: str) -> int:
    entry = net.trace.last_of(name)
    if entry is None:
        raise PassportVisaError(f"no {name} in the trace")
    return entry.index


def freshness_claim(
    suite: str = "default", seed: int = 0, settings: Optional[Settings] = None, sessions: int = 10
) -> ClaimResult:
    """Every session key on one visa is new, and K_MU-FN never encrypts traffic."""
    provisioner = _world(suite, seed, settings)
    _acquire(provisioner)
    for _ in range(sessions):
        _session(provisioner)
    trace = provisioner.world.net.trace
    trace.key_usage = provisioner.world.counter.key_usage
    try:
        report = audit_key_freshness(trace)
    except PassportVisaError as exc:
        return ClaimResult("key-freshness", False, [str(exc)])
    return ClaimResult("key-freshness", report.session_count == sessions, [report.to_text().splitlines()[0]])


def run_attack_suite(suite: str = "default", seed: int = 0, settings: Optional[Settings] = None) -> SuiteReport:
    claims = []
    for claim in (forgery_claim, mutual_auth_claim, replay_claim, freshness_claim):
        try:
            result = claim(suite, seed, settings)
        except PassportVisaError as exc:
            result = ClaimResult(claim.__name__.replace("_claim", ""), False, [f"run aborted: {exc}"])
        simnet_logger.info(f"claim {result.claim}: {'upheld' if result.upheld else 'violated'}")
        claims.append(result)
    return SuiteReport(suite, seed, claims)
