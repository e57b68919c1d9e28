"""Message-level model of challenge-response distance bounding.

Each round the verifier sends a k-bit challenge and times the k-bit reply;
the claimant's replies are its committed nonces XOR the challenges, and it
finally signs the whole challenge/reply transcript.  Rapid single-bit RF
timing is collapsed into one timestamp pair per round.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .airsim import ColludeRelay, Delay, Forge, Replay, Scenario, TraceReport, derive_seed, run_scenario
from .authsig import get_scheme
from .errors import ComparisonUnsupported, OnewayError, SingularAtSolution
from .geom import Point, as_point
from .ranging import Fix, RangeObservation, solve_position
from .timebase import TICKS_PER_SECOND, Instant
from .verifier import containment_witness_search

DEFAULT_ROUNDS = 32
DEFAULT_BITS = 1
ROUND_SPACING = 10**9  # 1 ms between challenges, in ps


@dataclass(frozen=True)
class ExchangeRound:
    alpha: int
    beta: int
    challenge_emit: Instant
    response_arrival: Instant

    @property
    def rtt_ticks(self) -> int:
        return self.response_arrival.ticks - self.challenge_emit.ticks


@dataclass(frozen=True)
class Session:
    rounds: tuple
    k: int
    commitment: bytes
    opening: tuple  # claimant nonces, revealed after the fast phase
    signature: bytes
    declared_processing: float
    responder_pos: Optional[Point] = None


@dataclass(frozen=True)
class SessionSetup:
    verifier_pos: Point
    claimant_pos: Point
    c: float
    processing_time: float = 0.0
    rounds: int = DEFAULT_ROUNDS
    k: int = DEFAULT_BITS
    scheme: str = "ed25519"
    seed: int = 0
    label: str = "claimant"

    def __post_init__(self):
        object.__setattr__(self, "verifier_pos", as_point(self.verifier_pos))
        object.__setattr__(self, "claimant_pos", as_point(self.claimant_pos))
        if self.processing_time < 0:
            raise ValueError("processing_time must be >= 0")
        if self.k < 1 or self.rounds < 1:
            raise ValueError("need k >= 1 and rounds >= 1")

    def claimant_keys(self):
        return get_scheme(self.scheme).keypair(derive_seed(self.seed, "claimant", self.label))


@dataclass(frozen=True)
class AttackOutcome:
    accepted: bool
    rtt_bound: float
    true_distance: float
    responder_distance: float
    nonces_leaked: bool


def _commit(nonces, k: int) -> bytes:
    return hashlib.sha256(_pack(nonces, k)).digest()


def _pack(values, k: int) -> bytes:
    width = (k + 7) // 8
    return b"".join(int(v).to_bytes(width, "little") for v in values)


def transcript(alphas, betas, k: int) -> bytes:
    return b"BC1" + k.to_bytes(2, "little") + _pack(alphas, k) + _pack(betas, k)


def _draw(rng: np.random.Generator, k: int, n: int) -> list:
    return [int.from_bytes(rng.bytes((k + 7) // 8), "little") & ((1 << k) - 1) for _ in range(n)]


def _ticks(seconds: float) -> int:
    return round(seconds * TICKS_PER_SECOND)


def rtt_bound(session: Session, c: float) -> float:
    """c * (max RTT - declared processing) / 2, the distance upper bound."""
    worst = max(r.rtt_ticks for r in session.rounds)
    return c * (worst / TICKS_PER_SECOND - session.declared_processing) / 2


def verify_session(session: Session, public_key: bytes, scheme: str = "ed25519") -> bool:
    """Check the opened commitment, every reply and the transcript signature."""
    if len(session.opening) != len(session.rounds):
        return False
    if _commit(session.opening, session.k) != session.commitment:
        return False
    for r, m in zip(session.rounds, session.opening):
        if r.beta != (m ^ r.alpha):
            return False
    msg = transcript([r.alpha for r in session.rounds], [r.beta for r in session.rounds], session.k)
    return get_scheme(scheme).verify(public_key, msg, session.signature)


def _rounds(rng, setup, answer, rtt_ticks_fn):
    alphas = _draw(rng, setup.k, setup.rounds)
    out = []
    for i, a in enumerate(alphas):
        emit = Instant(i * ROUND_SPACING)
        out.append(ExchangeRound(a, answer(i, a), emit, emit.shifted(rtt_ticks_fn(i))))
    return alphas, out


def run_exchange(verifier_pos, claimant_pos, processing_time: float, c: float, *,
                 declared_processing: Optional[float] = None, channel_delay: float = 0.0,
                 rounds: int = DEFAULT_ROUNDS, k: int = DEFAULT_BITS, scheme: str = "ed25519",
                 seed: int = 0, label: str = "claimant"):
    """Honest exchange.  Returns ``(session, rtt_bound)``.

    ``processing_time`` is what the claimant actually spends per reply,
    ``declared_processing`` what the verifier subtracts (defaults to the
    truth), ``channel_delay`` a forced hold on each round trip.
    """
    if channel_delay < 0:
        raise ValueError("channel delay must be >= 0")
    setup = SessionSetup(verifier_pos, claimant_pos, c, processing_time, rounds, k, scheme, seed, label)
    declared = processing_time if declared_processing is None else declared_processing
    rng = np.random.default_rng(int.from_bytes(derive_seed(seed, "exchange", label)[:8], "little"))
    priv, _ = setup.claimant_keys()
    nonces = _draw(rng, k, rounds)
    dist = math.dist(setup.verifier_pos.coords, setup.claimant_pos.coords)
    rtt = _ticks(2 * dist / c + processing_time + channel_delay)
    alphas, rs = _rounds(rng, setup, lambda i, a: nonces[i] ^ a, lambda i: rtt)
    sig = get_scheme(scheme).sign(priv, transcript(alphas, [r.beta for r in rs], k))
    session = Session(tuple(rs), k, _commit(nonces, k), tuple(nonces), sig, declared, setup.claimant_pos)
    return session, rtt_bound(session, c)


def stolen_nonce_attack(setup: SessionSetup, adversary_pos, nonces_leaked: bool = True,
                        hold: float = 0.0, rng: Optional[np.random.Generator] = None):
    """Mafia-fraud relay with (optionally) pre-leaked claimant nonces.

    The adversary answers the verifier's challenges itself from
    ``adversary_pos`` (optionally holding each reply ``hold`` seconds), later
    hands the same challenges to the real claimant and relays back the
    claimant's signature and commitment opening.  Returns
    ``(session, AttackOutcome)``.
    """
    adversary_pos = as_point(adversary_pos)
    if hold < 0:
        raise ValueError("hold must be >= 0")
    if rng is None:
        rng = np.random.default_rng(int.from_bytes(derive_seed(setup.seed, "attack", setup.label)[:8], "little"))
    scheme = get_scheme(setup.scheme)
    priv, pub = setup.claimant_keys()
    nonces = _draw(rng, setup.k, setup.rounds)
    leaked = list(nonces) if nonces_leaked else None
    guesses = _draw(rng, setup.k, setup.rounds)

    def answer(i, a):
        return (leaked[i] ^ a) if leaked is not None else guesses[i]

    d_adv = math.dist(setup.verifier_pos.coords, adversary_pos.coords)
    rtt = _ticks(2 * d_adv / setup.c + setup.processing_time + hold)
    alphas, rs = _rounds(rng, setup, answer, lambda i: rtt)
    # the claimant sees the relayed challenges and signs its own honest replies
    honest_betas = [m ^ a for m, a in zip(nonces, alphas)]
    sig = scheme.sign(priv, transcript(alphas, honest_betas, setup.k))
    session = Session(tuple(rs), setup.k, _commit(nonces, setup.k), tuple(nonces), sig,
                      setup.processing_time, adversary_pos)
    accepted = verify_session(session, pub, setup.scheme)
    outcome = AttackOutcome(
        accepted=accepted,
        rtt_bound=rtt_bound(session, setup.c),
        true_distance=math.dist(setup.verifier_pos.coords, setup.claimant_pos.coords),
        responder_distance=d_adv,
        nonces_leaked=nonces_leaked,
    )
    return session, outcome


# -------------------------------------------------------------- comparison


@dataclass(frozen=True)
class BidirResult:
    code: str  # "BidirAccepted" | "BidirRejected"
    bounds: tuple  # ((station, bound or None), ...)
    shortened: tuple  # station names whose accepted bound < true distance
    fix: Optional[Fix] = None
    detail: str = ""

    @property
    def accepted(self) -> bool:
        return self.code == "BidirAccepted"


@dataclass(frozen=True)
class ComparisonReport:
    scenario: str
    unidirectional: TraceReport
    bidirectional: BidirResult


def _bidir_settings(s: Scenario, bidir):
    bidir = dict(s.bidir) if bidir is None else bidir
    return (bidir.get("rounds", DEFAULT_ROUNDS), bidir.get("bits", DEFAULT_BITS),
            bidir.get("processing_s", 0.0), bidir.get("declared_processing_s"))


def run_bidirectional(s: Scenario, bidir: Optional[dict] = None) -> BidirResult:
    """Verifiable multilateration built on per-station challenge-response."""
    for a in s.attacks:
        if isinstance(a, (Forge, Replay)):
            raise ComparisonUnsupported(f"{type(a).__name__} has no challenge-response counterpart")
    rounds, k, proc, declared = _bidir_settings(s, bidir)
    tpos = s.terminal.true_pos
    delays, delay_targets, relays = {}, [], {}
    for a in s.attacks:
        if isinstance(a, Delay):
            for name, ticks in a.delays:
                delays[name] = delays.get(name, 0) + ticks
            if a.target is not None:
                delay_targets.append(a.target)
        elif isinstance(a, ColludeRelay):
            holds = dict(a.hold)
            for name, node in a.nodes:
                relays[name] = (node, a.target, holds.get(name, 0), a.nonce_leak)

    obs, bounds, shortened = [], [], []
    for st in s.stations:
        d = math.dist(st.position.coords, tpos.coords)
        setup = SessionSetup(st.position, tpos, s.c, proc, rounds, k, s.scheme, s.rng_seed, st.name)
        if st.name in relays and relays[st.name][3]:
            node, target, hold_ticks, _ = relays[st.name]
            d_node = math.dist(st.position.coords, node.coords)
            hold = hold_ticks / TICKS_PER_SECOND
            if target is not None:
                want = math.dist(st.position.coords, target.coords)
                hold = max(hold, 2 * max(0.0, want - d_node) / s.c)
            _, outcome = stolen_nonce_attack(setup, node, True, hold)
            ok, bound = outcome.accepted, outcome.rtt_bound
        else:
            extra = delays.get(st.name, 0) / TICKS_PER_SECOND
            for q in delay_targets:
                extra = max(extra, 2 * max(0.0, math.dist(st.position.coords, q.coords) - d) / s.c)
            if st.name in relays:
                node, target, hold_ticks, _ = relays[st.name]
                detour = (math.dist(st.position.coords, node.coords) + math.dist(node.coords, tpos.coords) - d)
                extra += 2 * detour / s.c + hold_ticks / TICKS_PER_SECOND
                if target is not None:
                    want = math.dist(st.position.coords, target.coords)
                    extra = max(extra, 2 * max(0.0, want - d) / s.c)
            session, bound = run_exchange(st.position, tpos, proc, s.c, declared_processing=declared,
                                          channel_delay=extra, rounds=rounds, k=k,
                                          scheme=s.scheme, seed=s.rng_seed, label=st.name)
            ok = verify_session(session, setup.claimant_keys()[1], s.scheme)
        bounds.append((st.name, bound if ok else None))
        if ok:
            obs.append(RangeObservation(st.position, max(0.0, bound), st.id))
            if bound < d - s.c / TICKS_PER_SECOND:
                shortened.append(st.name)

    if len(obs) < s.dims + 1:
        return BidirResult("BidirRejected", tuple(bounds), tuple(shortened), detail="too few sessions")
    try:
        fix = solve_position(obs, s.dims)
    except SingularAtSolution:
        return BidirResult("BidirRejected", tuple(bounds), tuple(shortened), detail="unbounded error range")
    except OnewayError as exc:
        return BidirResult("BidirRejected", tuple(bounds), tuple(shortened), detail=f"solver: {exc}")
    if fix.error_range > s.terminal.error_limit:
        return BidirResult("BidirRejected", tuple(bounds), tuple(shortened), fix, "error range")
    if containment_witness_search([o.station_pos for o in obs], fix.position) is None:
        return BidirResult("BidirRejected", tuple(bounds), tuple(shortened), fix, "not contained")
    return BidirResult("BidirAccepted", tuple(bounds), tuple(shortened), fix)


def compare_protocols(s: Scenario, bidir: Optional[dict] = None) -> ComparisonReport:
    """Run both protocols against the same world and adversary."""
    bi = run_bidirectional(s, bidir)
    return ComparisonReport(s.name, run_scenario(s), bi)
