from src.simnet import run_attack_suite
from src.simnet.attack_suite import mutual_auth_claim


def test_every_claim_holds_under_the_default_suite():
    report = run_attack_suite("default", seed=3)
    assert [claim.claim for claim in report.claims] == [
        "forgery",
        "mutual-authentication",
        "replay-and-mitm",
        "key-freshness",
    ]
    assert report.all_upheld, report.to_text()
    assert report.to_text().endswith("4/4 claims upheld")


def test_unauthenticated_suite_loses_mutual_authentication():
    result = mutual_auth_claim("unauthenticated", seed=3)
    assert not result.upheld
    assert any("altered ServiceResponse accepted" in detail for detail in result.details)

    report = run_attack_suite("unauthenticated", seed=3)
    assert not report.all_upheld
    assert "[FAIL] mutual-authentication" in report.to_text()


def test_report_is_reproducible():
    assert run_attack_suite(seed=5).to_text() == run_attack_suite(seed=5).to_text()
