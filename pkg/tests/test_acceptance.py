"""End-to-end properties of the whole toolkit, one test class per property."""

import hashlib
import os
import random
import struct

import pytest

from src.actors.key_schedule import (
    first_session_key,
    second_session_key,
    session_key_mu_fn,
    session_key_mu_hn,
    third_session_key,
)
from src.crypto_suite import SymmetricKey
from src.encoding import MAX_U64
from src.errors import MalformedMessage, RejectReason
from src.simnet import TrustLevel, load_scenario, run_scenario
from src.simnet.attack_suite import forgery_claim, freshness_claim, replay_claim
from src.tokens import Certificate, ProviderRole, SealedPassport, SealedVisa
from src.wire_codec import LAYOUT, TAGS, decode, encode

from tests.conftest import SCENARIO_DIR

BUNDLED = sorted(name for name in os.listdir(SCENARIO_DIR) if name.endswith(".scenario"))


# --- an independent reading of the key schedule: SHA-256 over 4-byte length-prefixed fields ---
def h(*fields: bytes) -> bytes:
    return hashlib.sha256(b"".join(struct.pack(">I", len(f)) + f for f in fields)).digest()


def q(value: int) -> bytes:
    return struct.pack(">Q", value)


class TestHappyPath:
    def test_three_sessions_agree_end_to_end(self, world, roam, serve):
        w = world.world
        fn, mu = w.foreign_networks["FN1"].actor, w.mobile_users["alice"].actor
        visa_no = roam(world)
        assert fn.issuance_log[-1].session_key == mu.visas[visa_no].session_key
        assert fn.issuance_log[-1].master_key == mu.visas[visa_no].master_key
        for _ in range(3):
            serve(world)
        assert len(mu.sessions) == len(fn.served_sessions) == 3
        for mine, theirs in zip(mu.sessions, fn.served_sessions):
            assert (mine.first, mine.second, mine.third) == (theirs.first, theirs.second, theirs.third)
            assert mine.mutual_auth_achieved
        assert w.net.audit.trust("alice", "FN1") is TrustLevel.FULL
        assert w.net.audit.trust("FN1", "alice") is TrustLevel.FULL
        assert w.net.violations == []


class TestKeyScheduleOracle:
    def test_random_inputs(self, suite):
        rng = random.Random(2024)
        for _ in range(100):
            raw = [rng.randbytes(32) for _ in range(4)]
            nonces = [rng.randbytes(rng.randint(1, 32)) for _ in range(6)]
            pass_no, visa_no = rng.randint(0, MAX_U64), rng.randint(0, MAX_U64)
            id_mu, id_fn = f"mu-{rng.randint(0, 999)}", f"FN{rng.randint(0, 999)}"
            keys = [SymmetricKey(r) for r in raw]

            assert session_key_mu_hn(suite, keys[0], id_mu, id_fn).raw == h(raw[0], id_mu.encode(), id_fn.encode())
            assert session_key_mu_fn(suite, pass_no, id_fn, *nonces[:4]).raw == h(
                q(pass_no), id_fn.encode(), *nonces[:4]
            )
            assert first_session_key(suite, keys[1], visa_no, pass_no).raw == h(raw[1], q(visa_no), q(pass_no))
            assert second_session_key(suite, keys[1], keys[2], nonces[4]).raw == h(raw[1], raw[2], nonces[4])
            assert third_session_key(suite, keys[2], keys[3], nonces[5]).raw == h(raw[2], raw[3], nonces[5])

    def test_chain_of_a_real_run(self, world, roam, serve):
        mu = world.world.mobile_users["alice"].actor
        visa_no = roam(world)
        for _ in range(3):
            serve(world)
        visa = mu.visas[visa_no]
        chain = visa.session_key.raw
        for session in mu.sessions:
            assert session.first.raw == h(chain, q(visa_no), q(visa.pass_no))
            chain = session.third.raw
        assert visa.chain_key.raw == chain


class TestAdversary:
    def test_forgery(self):
        result = forgery_claim(trials=100)
        assert result.upheld, result.details
        assert result.details[:2] == ["100 forged passports, 0 accepted", "100 forged visas, 0 accepted"]

    def test_replay_and_identity_rewrites_over_fifty_traces(self):
        result = replay_claim(trials=50)
        assert result.upheld, result.details
        assert result.details == ["50 trace(s): 0 replays and 0 identity rewrites accepted"]

    def test_thirty_distinct_keys_over_ten_sessions(self):
        result = freshness_claim(sessions=10)
        assert result.upheld, result.details
        assert result.details[0].startswith("30 session keys across 10 sessions")


class TestRevocation:
    def test_both_revocations_in_one_run(self):
        result = run_scenario(load_scenario(os.path.join(SCENARIO_DIR, "revocation.scenario")))
        assert result.failures == []
        fn1, fn2 = result.world.foreign_networks["FN1"].actor, result.world.foreign_networks["FN2"].actor
        assert not fn2.visa_ledger.get(1001).valid
        assert all(not fn1.visa_ledger.get(v).valid for v in (1, 2))
        labels = [entry.outcome.label for entry in result.trace.entries]
        assert RejectReason.REVOKED.label in labels


class TestMobileUserCost:
    @pytest.mark.parametrize("name", BUNDLED)
    def test_no_asymmetric_operations(self, name):
        result = run_scenario(load_scenario(os.path.join(SCENARIO_DIR, name)))
        for mu in result.world.mobile_users:
            assert result.world.counter.asymmetric_count(mu) == 0


def random_message(rng: random.Random):
    cls = rng.choice(list(TAGS.values()))

    def value(kind):
        if kind is bytes:
            return rng.randbytes(rng.randint(0, 64))
        if kind is int:
            return rng.randint(0, MAX_U64)
        if kind is str:
            return "".join(rng.choice("abcFN1-é") for _ in range(rng.randint(0, 12)))
        if kind is SealedPassport or kind is SealedVisa:
            return kind(rng.randbytes(rng.randint(0, 96)))
        if kind is RejectReason:
            return rng.choice(list(RejectReason))
        return Certificate(
            subject_id=value(str),
            subject_public_key=value(bytes),
            role=rng.choice(list(ProviderRole)),
            expiry=value(int),
            ca_signature=value(bytes),
        )

    return cls(**{name: value(kind) for name, kind in LAYOUT[cls]})


class TestCodec:
    def test_fuzzed_input_never_crashes(self):
        rng = random.Random(9)
        for _ in range(10_000):
            data = rng.randbytes(rng.randint(0, 200))
            if data and rng.random() < 0.5:
                data = bytes([rng.choice(list(TAGS))]) + data[1:]
            try:
                decode(data)
            except MalformedMessage:
                pass

    def test_round_trip_of_every_variant(self):
        rng = random.Random(10)
        seen = set()
        for _ in range(1_000):
            message = random_message(rng)
            seen.add(type(message))
            assert decode(encode(message)) == message
        assert seen == set(TAGS.values())


@pytest.mark.parametrize("name", BUNDLED)
def test_rerun_gives_identical_trace(name):
    scenario = load_scenario(os.path.join(SCENARIO_DIR, name))
    assert run_scenario(scenario).trace.to_text() == run_scenario(scenario).trace.to_text()
