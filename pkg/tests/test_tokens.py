from dataclasses import replace

import pytest

from src.crypto_suite import SymmetricKey
from src.errors import BadSignature, DecryptionFailure, Expired, MalformedMessage
from src.simnet.adversary import adversary_forge_token
from src.tokens import (
    Certificate,
    PassportBody,
    ProviderRole,
    SealedPassport,
    SealedVisa,
    VisaBody,
    check_certificate,
    issue_certificate,
    make_passport,
    make_visa,
    open_passport,
    open_visa,
)


@pytest.fixture
def ca(suite):
    return suite.generate_keypair("ca")


@pytest.fixture
def hn_keys(suite):
    return suite.generate_keypair("hn")


def passport_body(suite, expiry=10_000):
    return PassportBody("alice", 7, expiry, suite.random_key(), {"issuer_id": "HN1", "mu_name": "alice"})


class TestCertificates:
    def test_issue_and_check(self, suite, ca, hn_keys):
        cert = issue_certificate(suite, ca, "HN1", hn_keys.public_key, ProviderRole.IDENTITY_PROVIDER, 5_000)
        assert check_certificate(suite, ca.public_key, cert, ProviderRole.IDENTITY_PROVIDER, 4_999)
        assert Certificate.from_bytes(cert.to_bytes()) == cert

    def test_wrong_role_expired_or_altered_is_refused(self, suite, ca, hn_keys):
        cert = issue_certificate(suite, ca, "HN1", hn_keys.public_key, ProviderRole.IDENTITY_PROVIDER, 5_000)
        assert not check_certificate(suite, ca.public_key, cert, ProviderRole.NETWORK_PROVIDER, 0)
        assert not check_certificate(suite, ca.public_key, cert, ProviderRole.IDENTITY_PROVIDER, 5_001)
        renamed = replace(cert, subject_id="FN1")
        assert not check_certificate(suite, ca.public_key, renamed, ProviderRole.IDENTITY_PROVIDER, 0)

    def test_self_signed_is_refused(self, suite, ca, hn_keys):
        cert = issue_certificate(suite, hn_keys, "HN1", hn_keys.public_key, ProviderRole.IDENTITY_PROVIDER, 5_000)
        assert not check_certificate(suite, ca.public_key, cert, ProviderRole.IDENTITY_PROVIDER, 0)

    def test_unknown_role_is_malformed(self, suite, ca, hn_keys):
        cert = issue_certificate(suite, ca, "HN1", hn_keys.public_key, ProviderRole.IDENTITY_PROVIDER, 5_000)
        raw = cert.to_bytes().replace(bytes([0, 0, 0, 1, ProviderRole.IDENTITY_PROVIDER]), bytes([0, 0, 0, 1, 9]))
        with pytest.raises(MalformedMessage):
            Certificate.from_bytes(raw)


class TestPassports:
    def test_round_trip(self, suite, hn_keys):
        body = passport_body(suite)
        sealed = make_passport(suite, hn_keys, body)
        assert open_passport(suite, hn_keys, sealed, 0) == body
        assert PassportBody.from_bytes(body.to_bytes()) == body

    def test_expired(self, suite, hn_keys):
        sealed = make_passport(suite, hn_keys, passport_body(suite, expiry=100))
        with pytest.raises(Expired):
            open_passport(suite, hn_keys, sealed, 101)

    def test_only_the_issuer_can_open(self, suite, hn_keys):
        other = suite.generate_keypair("hn")
        sealed = make_passport(suite, hn_keys, passport_body(suite))
        with pytest.raises(DecryptionFailure):
            open_passport(suite, other, sealed, 0)

    def test_forged_signature(self, suite, hn_keys):
        eve = suite.generate_keypair("attacker")
        forged = adversary_forge_token(suite, "passport", eve, hn_keys.public_key, body=passport_body(suite))
        with pytest.raises(BadSignature):
            open_passport(suite, hn_keys, SealedPassport(forged), 0)

    def test_relabelled_body_keeps_no_signature(self, suite, hn_keys):
        body = passport_body(suite)
        signature = suite.sign(hn_keys.private_key, body.to_bytes())
        forged = adversary_forge_token(
            suite, "passport", suite.generate_keypair("attacker"), hn_keys.public_key,
            body=replace(body, id_mu="eve"), signature=signature,
        )
        with pytest.raises(BadSignature):
            open_passport(suite, hn_keys, SealedPassport(forged), 0)


class TestVisas:
    def test_round_trip_and_forgery(self, suite):
        fn_keys = suite.generate_keypair("fn")
        body = VisaBody(7, 1, 9_000, suite.random_key(), {"visa_type": "roaming", "issuer_id": "FN1"})
        assert open_visa(suite, fn_keys, make_visa(suite, fn_keys, body), 0) == body
        eve = suite.generate_keypair("attacker")
        forged = adversary_forge_token(suite, "visa", eve, fn_keys.public_key)
        with pytest.raises(BadSignature):
            open_visa(suite, fn_keys, SealedVisa(forged), 0)
        with pytest.raises(Expired):
            open_visa(suite, fn_keys, make_visa(suite, fn_keys, body), 9_001)


def test_forge_rejects_bad_arguments(suite, hn_keys):
    with pytest.raises(ValueError):
        adversary_forge_token(suite, "ticket", suite.generate_keypair("a"), hn_keys.public_key)
    with pytest.raises(ValueError):
        adversary_forge_token(suite, "passport", hn_keys, hn_keys.public_key)


def bit_frequencies(samples):
    """Share of set bits at each bit position across equally long byte strings."""
    width = len(samples[0]) * 8
    ones = [0] * width
    for sample in samples:
        value = int.from_bytes(sample, "big")
        for position in range(width):
            ones[position] += (value >> position) & 1
    return [count / len(samples) for count in ones]


def test_sealed_passports_do_not_reveal_the_master_key(suite, hn_keys):
    low, high = SymmetricKey(b"\x00" * 32), SymmetricKey(b"\xff" * 32)

    def seal_many(key):
        body = PassportBody("alice", 7, 10_000, key, {"issuer_id": "HN1"})
        return [make_passport(suite, hn_keys, body).ciphertext for _ in range(200)]

    low_sealed, high_sealed = seal_many(low), seal_many(high)
    assert {len(s) for s in low_sealed} == {len(s) for s in high_sealed} and len({len(s) for s in low_sealed}) == 1
    assert not any(high.raw in s for s in high_sealed)

    low_freq, high_freq = bit_frequencies(low_sealed), bit_frequencies(high_sealed)
    # overall share of ones sits near one half for both keys
    assert abs(sum(low_freq) / len(low_freq) - 0.5) < 0.01
    assert abs(sum(high_freq) / len(high_freq) - 0.5) < 0.01
    # no single bit position tells the two keys apart
    assert max(abs(a - b) for a, b in zip(low_freq, high_freq)) < 0.35
