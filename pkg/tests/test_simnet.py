import os

import pytest

from src.crypto_suite import SymmetricKey, fingerprint
from src.crypto_suite.metering import KeyUse
from src.errors import AuditPreconditionError, FreshnessViolation, RejectReason, ScenarioError, ScenarioParseError
from src.messages import Reject
from src.simnet import (
    Provisioner,
    Trace,
    TrustAudit,
    TrustLevel,
    adversary_replay,
    audit_key_freshness,
    load_scenario,
    parse_scenario,
    run_scenario,
)
from src.simnet.adversary import splice_token, substitute_certificate
from src.simnet.trace import OutcomeKind, SessionKeys
from src.wire_codec import encode

from tests.conftest import SCENARIO_DIR

BUNDLED = sorted(name for name in os.listdir(SCENARIO_DIR) if name.endswith(".scenario"))


def key(byte: int) -> SymmetricKey:
    return SymmetricKey(bytes([byte]) * 32)


class TestBus:
    def test_drop_and_duplicate(self, world):
        net = world.world.net
        world.world.mobile_users["alice"].acquire("FN1")
        net.duplicate()
        assert len(net.pending()) == 2
        dropped = net.drop()
        assert dropped.recipient == "FN1"
        assert net.trace.entries[0].outcome.kind is OutcomeKind.NEUTRAL
        assert net.pending()[0].origin == "duplicate"

    def test_delay_reorders_and_moves_time(self, world):
        net = world.world.net
        alice = world.world.mobile_users["alice"]
        alice.acquire("FN1")
        alice.acquire("FN2")
        net.delay(10)
        assert net.peek().recipient == "FN2"
        net.deliver_all()
        assert net.now() >= 10
        assert len(alice.actor.visas) == 2

    def test_refuses_impossible_operations(self, world):
        net = world.world.net
        with pytest.raises(ScenarioError):
            net.drop()
        with pytest.raises(ScenarioError):
            net.node("nobody")
        world.world.mobile_users["alice"].acquire("FN1")
        size = len(net.peek().raw)
        with pytest.raises(ScenarioError):
            net.tamper(size)
        with pytest.raises(ScenarioError):
            net.delay(-1)
        with pytest.raises(ScenarioError):
            net.redirect("nobody")

    def test_malformed_bytes_are_answered(self, world):
        net = world.world.net
        net.send("eve", "FN1", b"\xff\x00", origin="inject")
        net.deliver_all()
        first, second = net.trace.entries
        assert (first.outcome.kind, first.outcome.label) == (OutcomeKind.REJECTED, "malformed")
        assert second.raw == encode(Reject(RejectReason.MALFORMED))
        assert str(second.outcome) == "notified malformed at eve"

    def test_skewed_clock_goes_stale(self, world):
        net = world.world.net
        net.skew("alice", 300_000)
        world.world.mobile_users["alice"].acquire("FN1")
        net.deliver(1)
        assert net.trace.entries[0].outcome.label == "stale"

    def test_replay_of_unknown_index(self, world):
        with pytest.raises(ScenarioError):
            adversary_replay(world.world.net, 3, "FN1")


class TestParsing:
    def test_settings_comments_and_blank_lines(self):
        scenario = parse_scenario("# header\nseed 0x10\n\nsuite unauthenticated\nwindow 2m\nca CA  # trailing\n")
        assert (scenario.seed, scenario.suite, scenario.window) == (16, "unauthenticated", 120_000)
        assert [step.verb for step in scenario.steps] == ["ca"]
        assert scenario.steps[0].line_no == 6

    @pytest.mark.parametrize(
        "content, line_no",
        [
            ("ca CA\nfrobnicate\n", 2),
            ("acquire alice\n", 1),
            ("ca CA\n\nadvance soon\n", 3),
            ("expect trust alice FN1 total\n", 1),
            ("expect sunshine\n", 1),
            ("expect accepted now\n", 1),
            ("inject eve FN1 zz\n", 1),
            ("forge ticket eve FN1\n", 1),
            ("fn FN1 generous\n", 1),
            ("seed -3\n", 1),
            ('mu "alice HN1\n', 1),
            ("expect visa-valid FN1 1 maybe\n", 1),
        ],
    )
    def test_errors_carry_the_line(self, content, line_no):
        with pytest.raises(ScenarioParseError) as excinfo:
            parse_scenario(content)
        assert excinfo.value.line_no == line_no
        assert str(excinfo.value).startswith(f"line {line_no}:")


class TestRunning:
    @pytest.mark.parametrize("name", BUNDLED)
    def test_bundled_scenarios_pass(self, name):
        result = run_scenario(load_scenario(os.path.join(SCENARIO_DIR, name)))
        assert result.failures == []
        assert result.checked > 0

    def test_same_seed_same_trace(self):
        scenario = load_scenario(os.path.join(SCENARIO_DIR, "happy_path.scenario"))
        first, second = run_scenario(scenario), run_scenario(scenario)
        assert first.trace.to_text() == second.trace.to_text()
        assert run_scenario(scenario, seed=8).trace.to_text() != first.trace.to_text()

    def test_failed_expectation_is_reported(self):
        result = run_scenario(
            parse_scenario("ca CA\nhn HN1\nfn FN1\nmu alice HN1\nacquire alice FN1\ndeliver all\nexpect reject stale\n")
        )
        assert not result.passed
        assert result.failures[0].startswith("line 7: expect reject stale")

    def test_expect_only_sees_what_happened_since_the_last_one(self):
        result = run_scenario(
            parse_scenario(
                "ca CA\nhn HN1\nfn FN1\nmu alice HN1\n"
                "acquire alice FN1\ndeliver all\nexpect accepted\nexpect accepted\n"
            )
        )
        assert result.failures == ["line 8: expect accepted: nothing was accepted"]

    def test_raised_errors_are_expectable(self):
        result = run_scenario(
            parse_scenario("ca CA\nhn HN1\nfn FN1\nmu alice HN1\nservice alice 5\nexpect error unknown-visa\n")
        )
        assert result.passed
        assert any("unknown-visa" in note for note in result.trace.notes)

    def test_revoking_a_dropped_visa_is_expectable(self):
        result = run_scenario(
            parse_scenario(
                "ca CA\nhn HN1\nfn FN1\nmu alice HN1\n"
                "acquire alice FN1\ndeliver all\n"
                "revoke-visa alice 1\ndeliver all\n"
                "revoke-visa alice 1\nexpect error unknown-visa\n"
            )
        )
        assert result.failures == []
        assert not result.world.foreign_networks["FN1"].actor.visa_ledger.get(1).valid

    @pytest.mark.parametrize(
        "content",
        [
            "ca CA\nhn HN1\nmu alice HN2\n",
            "ca CA\nhn HN1\nfn FN1\nmu alice HN1\nacquire alice FN1\ntamper 9999\n",
            "ca CA\nhn HN1\nfn FN1\nmu alice HN1\nacquire bob FN1\n",
            "ca CA\nhn HN1\nhn HN1\n",
            "hn HN1\n",
            "suite rot13\nca CA\n",
            "ca CA\nhn HN1\nfn FN1\nmu alice HN1\nacquire alice FN1\nforge visa alice FN1\n",
            "ca CA\nhn HN1\nfn FN1\nmu alice HN1\nattacker eve\nacquire alice FN1\nforge visa eve FN1\n",
            "ca CA\nhn HN1\nfn FN1\nmu alice HN1\nacquire alice FN1\nswap-cert FN1\n",
            "ca CA\nhn HN1\nfn FN1\nmu alice HN1\nreplay ServiceRequest FN1\n",
        ],
    )
    def test_impossible_steps_stop_the_run(self, content):
        with pytest.raises(ScenarioError):
            run_scenario(parse_scenario(content))

    def test_access_limit_and_deny_all_options(self):
        result = run_scenario(
            parse_scenario(
                "ca CA\nhn HN1\nfn FN1 max-accesses=1\nfn FN2 deny-all\nmu alice HN1\n"
                "acquire alice FN1\ndeliver all\nservice alice\ndeliver all\nexpect accepted\n"
                "service alice\ndeliver all\nexpect reject access-exhausted\n"
                "acquire alice FN2\ndeliver all\nexpect reject policy-denied\n"
            )
        )
        assert result.failures == []


class TestAudit:
    def test_trust_only_goes_up(self):
        audit = TrustAudit()
        audit.raise_trust("alice", "FN1", TrustLevel.FULL)
        audit.raise_trust("alice", "FN1", TrustLevel.PARTIAL)
        assert audit.trust("alice", "FN1") is TrustLevel.FULL
        assert audit.trust("FN1", "alice") is TrustLevel.NONE
        assert TrustLevel.from_label(" partial ") is TrustLevel.PARTIAL

    def test_sessions_and_goals(self):
        audit = TrustAudit()
        assert len(audit.missing_ban_goals("alice", "FN1")) == 6
        audit.record_session("alice", "FN1", agreed=False)
        assert not audit.mutually_authenticated("alice", "FN1")
        assert audit.full_trust_with("alice") == set()
        audit.record_session("alice", "FN1", agreed=True)
        assert audit.mutually_authenticated("alice", "FN1")
        assert audit.full_trust_with("FN1") == {"alice"}

    def test_freshness_needs_two_sessions(self):
        trace = Trace(sessions=[SessionKeys("alice", "FN1", 1, key(1), key(2), key(3))])
        with pytest.raises(AuditPreconditionError):
            audit_key_freshness(trace)

    def test_repeated_key(self):
        trace = Trace(
            sessions=[
                SessionKeys("alice", "FN1", 1, key(1), key(2), key(3)),
                SessionKeys("alice", "FN1", 1, key(4), key(5), key(3)),
            ]
        )
        with pytest.raises(FreshnessViolation) as excinfo:
            audit_key_freshness(trace)
        assert excinfo.value.collisions == [(0, 1)]

    def test_master_key_on_the_wire(self):
        trace = Trace(
            sessions=[
                SessionKeys("alice", "FN1", 1, key(1), key(2), key(3)),
                SessionKeys("alice", "FN1", 1, key(4), key(5), key(6)),
            ],
            master_keys=[key(9)],
        )
        assert audit_key_freshness(trace).key_count == 6
        trace.key_usage.append(KeyUse("alice", "enc_sym", fingerprint(key(9).raw)))
        with pytest.raises(FreshnessViolation, match="alice"):
            audit_key_freshness(trace)


class TestProvisioning:
    def test_saved_world_loads_and_roams(self, tmp_path, world, roam):
        out = str(tmp_path / "world")
        written = world.save(out)
        assert os.path.join(out, "directory.json") in written
        with pytest.raises(FileExistsError):
            world.save(out)

        loaded = Provisioner(seed=1)
        loaded.load(out)
        assert loaded.world.mobile_users["alice"].actor.card == world.world.mobile_users["alice"].actor.card
        assert roam(loaded) == 1

    def test_scenario_can_load_a_world(self, tmp_path, world):
        out = str(tmp_path / "world")
        world.save(out)
        result = run_scenario(parse_scenario(f"load {out}\nacquire alice FN2\ndeliver all\nexpect accepted\n"))
        assert result.failures == []

    def test_declaration_errors(self, world):
        with pytest.raises(ScenarioError):
            world.add_mobile_user("alice", "HN1")
        with pytest.raises(ScenarioError):
            world.add_mobile_user("bob", "HN9")
        with pytest.raises(ScenarioError):
            world.add_ca("CA2")
        with pytest.raises(ScenarioError):
            world.trust("FN1", "alice")


def test_tokens_only_ride_in_messages_that_carry_them(world):
    raw = encode(Reject(RejectReason.STALE))
    with pytest.raises(ScenarioError):
        splice_token(raw, "visa", b"forged")
    with pytest.raises(ScenarioError):
        substitute_certificate(raw, world.world.foreign_networks["FN1"].actor.cert)
