from dataclasses import replace

import pytest

from src.actors import MobileUser, SmartCard
from src.crypto_suite import SimClock
from src.errors import LocallyExpired, MalformedMessage, NotProvisioned, RejectService, RejectVisa, UnknownVisa
from src.messages import VisaGrant

from tests.flows import issue, relay


def test_unprovisioned_user(suite):
    bob = MobileUser("bob", suite, SimClock())
    with pytest.raises(NotProvisioned):
        bob.begin_visa_acquisition("FN1", "roaming")


def test_card_must_belong_to_the_user(suite, parties):
    _, _, alice = parties
    bob = MobileUser("bob", suite, SimClock())
    with pytest.raises(ValueError):
        bob.provision(alice.card)
    clone = MobileUser("alice", suite, SimClock())
    clone.provision(alice.card)
    assert clone.card.pass_no == alice.card.pass_no


class TestVisaAcquisition:
    def test_grant_replayed_after_completion(self, parties):
        hn, fn, mu = parties
        grant = fn.handle_hn_decision(relay(hn, fn, mu))
        mu.complete_visa_acquisition(grant)
        with pytest.raises(RejectVisa) as excinfo:
            mu.complete_visa_acquisition(grant)
        assert excinfo.value.reason == "nonce_mismatch"

    def test_stale_grant(self, parties):
        hn, fn, mu = parties
        grant = fn.handle_hn_decision(relay(hn, fn, mu))
        mu.clock.advance(mu.freshness_window + 1)
        with pytest.raises(RejectVisa) as excinfo:
            mu.complete_visa_acquisition(grant)
        assert excinfo.value.reason == "stale"

    def test_bad_key_delivery_keeps_the_acquisition_open(self, parties):
        hn, fn, mu = parties
        grant = fn.handle_hn_decision(relay(hn, fn, mu))
        assert isinstance(grant, VisaGrant)
        with pytest.raises(RejectVisa) as excinfo:
            mu.complete_visa_acquisition(replace(grant, key_nonce_fn=b"\x00" * 16))
        assert excinfo.value.reason == "bad_key_delivery"
        assert "FN1" in mu.in_flight
        assert mu.complete_visa_acquisition(grant) == 1

    def test_grant_relayed_for_another_fn(self, world, parties):
        hn, fn, mu = parties
        fn2 = world.world.foreign_networks["FN2"].actor
        grant = fn.handle_hn_decision(relay(hn, fn, mu))
        # alice asked FN2 as well; the FN1 grant still only opens under the FN1 key
        fn2.handle_visa_request(mu.begin_visa_acquisition("FN2", "roaming"))
        assert mu.complete_visa_acquisition(grant) == 1
        assert mu.visas[1].id_fn == "FN1"
        assert "FN2" in mu.in_flight

    def test_unknown_reject_reason(self):
        with pytest.raises(ValueError):
            RejectVisa("because")


class TestService:
    def test_tampered_payload(self, parties):
        hn, fn, mu = parties
        visa_no = issue(hn, fn, mu)
        response = fn.handle_service_request(mu.begin_service(visa_no, "x"), b"payload")
        flipped = response.payload[:-1] + bytes([response.payload[-1] ^ 1])
        with pytest.raises(RejectService) as excinfo:
            mu.complete_service(replace(response, payload=flipped))
        assert excinfo.value.reason == "bad_response"
        # the chain key only moves on success
        assert mu.visas[visa_no].chain_key == mu.visas[visa_no].session_key

    def test_response_for_nothing_in_flight(self, parties):
        hn, fn, mu = parties
        visa_no = issue(hn, fn, mu)
        response = fn.handle_service_request(mu.begin_service(visa_no, "x"), b"payload")
        mu.complete_service(response)
        with pytest.raises(RejectService):
            mu.complete_service(response)
        assert len(mu.sessions) == 1 and mu.sessions[0].mutual_auth_achieved

    def test_unknown_and_expired_visas(self, parties):
        hn, fn, mu = parties
        with pytest.raises(UnknownVisa):
            mu.begin_service(42, "x")
        visa_no = issue(hn, fn, mu)
        mu.clock.advance(mu.visas[visa_no].expiry + 1)
        with pytest.raises(LocallyExpired):
            mu.begin_service(visa_no, "x")

    def test_revoke_forgets_the_visa(self, parties):
        hn, fn, mu = parties
        visa_no = issue(hn, fn, mu)
        mu.revoke_visa(visa_no)
        with pytest.raises(UnknownVisa):
            mu.revoke_visa(visa_no)


def test_mobile_user_never_touches_asymmetric_crypto(world, roam, serve):
    visa_no = roam(world)
    for _ in range(3):
        serve(world)
    world.world.mobile_users["alice"].revoke(visa_no)
    world.world.net.deliver_all()
    assert world.world.counter.asymmetric_count("alice") == 0


class TestSmartCard:
    def test_file_round_trip(self, tmp_path, parties):
        _, _, mu = parties
        path = tmp_path / "alice.card"
        mu.card.save(str(path))
        assert SmartCard.load(str(path)) == mu.card

    def test_rejects_other_files(self, parties):
        _, _, mu = parties
        raw = mu.card.to_bytes().replace(b"pvkit-card/1", b"pvkit-card/9")
        with pytest.raises(MalformedMessage):
            SmartCard.from_bytes(raw)
        with pytest.raises(MalformedMessage):
            SmartCard.from_bytes(b"\x00\x00")
