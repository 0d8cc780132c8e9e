"""Actor-level protocol runs without the bus, for tests that poke at one handler."""

from src.messages import ForwardToHN, HNDecision, VisaGrant


def relay(hn, fn, mu) -> HNDecision:
    forwarded = fn.handle_visa_request(mu.begin_visa_acquisition(fn.network_id, "roaming"))
    assert isinstance(forwarded, ForwardToHN)
    decision = hn.handle_forward(forwarded)
    assert isinstance(decision, HNDecision)
    return decision


def issue(hn, fn, mu) -> int:
    grant = fn.handle_hn_decision(relay(hn, fn, mu))
    assert isinstance(grant, VisaGrant)
    return mu.complete_visa_acquisition(grant)
