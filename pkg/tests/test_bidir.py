import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from onewaypos.bidir import (
    SessionSetup, compare_protocols, run_bidirectional, run_exchange, stolen_nonce_attack,
    verify_session,
)
from onewaypos.corpus import bundled_corpus
from onewaypos.errors import ComparisonUnsupported
from onewaypos.scenario_io import build_scenario

C = 3e8
TICK_M = C * 1e-12


def test_exchange_300m():
    session, bound = run_exchange((0.0, 0.0), (300.0, 0.0), 0.0, C, scheme="hmac")
    assert all(r.rtt_ticks == 2_000_000 for r in session.rounds)
    assert bound == pytest.approx(300.0, abs=TICK_M)
    assert verify_session(session, SessionSetup((0, 0), (300, 0), C, scheme="hmac").claimant_keys()[1], "hmac")


def test_understated_processing_inflates_bound():
    tau = 4e-7
    _, honest = run_exchange((0.0, 0.0), (300.0, 0.0), 1e-6, C, scheme="hmac")
    _, biased = run_exchange((0.0, 0.0), (300.0, 0.0), 1e-6, C, declared_processing=1e-6 - tau, scheme="hmac")
    assert biased - honest == pytest.approx(C * tau / 2, abs=TICK_M)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 1e-3), st.floats(1, 1e4))
def test_channel_delay_only_lengthens(tau, d):
    _, bound = run_exchange((0.0, 0.0), (d, 0.0), 0.0, C, channel_delay=tau, scheme="hmac", rounds=4)
    assert bound == pytest.approx(d + C * tau / 2, abs=TICK_M)
    assert bound >= d - TICK_M


def _setup(**kw):
    return SessionSetup((0.0, 0.0), (10_000.0, 0.0), C, scheme="hmac", **kw)


def test_stolen_nonce_leak_accepted_near_adversary():
    session, out = stolen_nonce_attack(_setup(), (10.0, 0.0))
    assert out.accepted and out.nonces_leaked
    assert abs(out.rtt_bound - 10.0) <= TICK_M
    assert out.rtt_bound < out.true_distance


def test_fresh_nonces_never_accepted_k32():
    rng = np.random.default_rng(2024)
    setup = _setup(k=32)
    accepted = sum(stolen_nonce_attack(setup, (10.0, 0.0), nonces_leaked=False, rng=rng)[1].accepted
                   for _ in range(1000))
    assert accepted == 0


def test_colocated_adversary_is_honest_bound():
    _, out = stolen_nonce_attack(_setup(), (10_000.0, 0.0))
    _, honest = run_exchange((0.0, 0.0), (10_000.0, 0.0), 0.0, C, scheme="hmac")
    assert out.rtt_bound == pytest.approx(honest, abs=TICK_M)


def test_leak_flag_gates_acceptance():
    rng = np.random.default_rng(1)
    for i in range(200):
        leaked = bool(i % 2)
        _, out = stolen_nonce_attack(_setup(k=8, rounds=8), rng.uniform(0, 1e4, 2), leaked, rng=rng)
        if out.accepted:
            assert out.nonces_leaked


def test_bound_covers_responder_distance():
    rng = np.random.default_rng(8)
    for _ in range(200):
        adv = rng.uniform(-1e4, 1e4, 2)
        hold = float(rng.uniform(0, 1e-5))
        session, out = stolen_nonce_attack(_setup(rounds=4), adv, bool(rng.integers(2)), hold)
        d = math.dist((0.0, 0.0), session.responder_pos.coords)
        assert out.rtt_bound >= d - TICK_M


def test_tampered_transcript_fails():
    session, _ = run_exchange((0.0, 0.0), (50.0, 0.0), 0.0, C, scheme="hmac")
    pub = SessionSetup((0, 0), (50, 0), C, scheme="hmac").claimant_keys()[1]
    r0 = session.rounds[0]
    bad = type(session)((type(r0)(r0.alpha ^ 1, r0.beta ^ 1, r0.challenge_emit, r0.response_arrival),)
                        + session.rounds[1:], *[getattr(session, f) for f in
                                                ("k", "commitment", "opening", "signature",
                                                 "declared_processing", "responder_pos")])
    assert not verify_session(bad, pub, "hmac")


def _corpus(name, protocol="compare"):
    doc = bundled_corpus()[name]
    doc["protocol"] = protocol
    return build_scenario(doc)


def test_compare_nonce_leak_contrast():
    rep = compare_protocols(_corpus("stolen-nonce-compare.yaml"))
    assert rep.bidirectional.accepted and rep.bidirectional.shortened
    assert rep.unidirectional.classification != "spoofed"
    assert not rep.unidirectional.result.accepted


def test_compare_honest_both_accept():
    s = _corpus("honest-2d.yaml")
    rep = compare_protocols(s)
    truth = s.terminal.true_pos.coords
    assert rep.unidirectional.result.accepted and rep.bidirectional.accepted
    assert math.dist(rep.bidirectional.fix.position.coords, truth) <= 1e-6
    assert math.dist(rep.unidirectional.result.fix.position.coords, truth) <= 1e-6


def test_compare_forced_delay_only_lengthens():
    s = _corpus("forced-delay.yaml")
    rep = compare_protocols(s)
    tpos = s.terminal.true_pos.coords
    assert rep.bidirectional.shortened == ()
    for name, bound in rep.bidirectional.bounds:
        assert bound is None or bound >= math.dist(s.station(name).position.coords, tpos) - TICK_M
    assert rep.unidirectional.classification != "spoofed"


def test_forge_not_comparable():
    s = _corpus("forgery.yaml")
    with pytest.raises(ComparisonUnsupported):
        run_bidirectional(s)
