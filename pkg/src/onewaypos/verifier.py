"""The terminal-side verification module and the station-side beacon maker.

``verify_position`` is a pure function of what the terminal captured and its
own configuration.  Nothing in this module sends anything anywhere.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Sequence

from .authsig import BeaconBody, Broadcast, KeyRegistry, quantize, sign_beacon, verify_beacon
from .errors import OnewayError, SingularAtSolution
from .geom import Point, Simplex, as_point, contains
from .ranging import Fix, RangeObservation, distance_bound, solve_position
from .timebase import ClockModel, Instant, expired


class Reason(str, enum.Enum):
    ClockExpired = "ClockExpired"
    TooFewBroadcasts = "TooFewBroadcasts"
    FutureTimestamp = "FutureTimestamp"
    TooFewValidSignatures = "TooFewValidSignatures"
    SolverFailure = "SolverFailure"
    ErrorRangeExceeded = "ErrorRangeExceeded"
    NotContained = "NotContained"


STEPS = ("clock", "count", "timestamps", "signatures", "solve", "error_range", "containment")


@dataclass(frozen=True)
class Receipt:
    """Captured broadcasts, each paired with the inner-clock reading taken
    when it arrived."""

    entries: tuple

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple((b, t) for b, t in self.entries))


@dataclass(frozen=True)
class VerifierConfig:
    dims: int
    error_limit: float
    c: float
    registry: KeyRegistry
    clock: Optional[ClockModel] = None

    def __post_init__(self):
        if self.dims not in (2, 3):
            raise ValueError("dims must be 2 or 3")
        if not self.error_limit > 0:
            raise ValueError("error_limit must be > 0")
        if not self.c > 0:
            raise ValueError("c must be > 0")


@dataclass(frozen=True)
class PositionResult:
    kind: str  # "Accepted" | "Abort" | "Reject"
    reason: Optional[Reason] = None
    fix: Optional[Fix] = None
    witness: Optional[Simplex] = None
    steps: dict = field(default_factory=dict)
    accepted_ids: tuple = ()
    detail: str = ""

    @property
    def accepted(self) -> bool:
        return self.kind == "Accepted"

    @property
    def code(self) -> str:
        return "Accepted" if self.accepted else self.reason.value


def make_broadcast(station_key, station_id: bytes, t_s: Instant, x_s, scheme=None) -> Broadcast:
    """Sign (t_s, x_s) ahead of time; the station emits it exactly at t_s.

    The position is snapped to the encoding's micrometre grid first so the
    carried body is byte-for-byte what was signed.
    """
    body = BeaconBody(station_id, t_s, quantize(as_point(x_s)))
    return sign_beacon(station_key, body, scheme)


def dedup_earliest(entries) -> list:
    """Keep only the earliest-arriving entry per station id (ties: first seen)."""
    best = {}
    for order, (b, t_m) in enumerate(entries):
        sid = b.body.station_id
        if sid not in best or t_m < best[sid][1][1]:
            best[sid] = (order, (b, t_m))
    return [entry for _, entry in sorted(best.values(), key=lambda v: v[0])]


def containment_witness_search(positions: Sequence[Point], p: Point) -> Optional[Simplex]:
    """First non-degenerate simplex, in lexicographic index order, that
    strictly contains ``p``."""
    p = as_point(p)
    k = p.dims + 1
    for idx in combinations(range(len(positions)), k):
        s = Simplex(tuple(positions[i] for i in idx))
        if s.is_degenerate():
            continue
        if contains(s, p):
            return s
    return None


def verify_position(receipt: Receipt, config: VerifierConfig) -> PositionResult:
    steps = {name: "skipped" for name in STEPS}
    need = config.dims + 1

    def done(kind, reason=None, **kw):
        return PositionResult(kind, reason, steps=steps, **kw)

    entries = list(receipt.entries)
    if config.clock is not None and entries:
        # the module can only consult its own clock
        now = min(t for _, t in entries)
        if expired(config.clock, now):
            steps["clock"] = "fail"
            return done("Abort", Reason.ClockExpired)
    steps["clock"] = "pass"

    entries = dedup_earliest(entries)
    if len(entries) < need:
        steps["count"] = "fail"
        return done("Abort", Reason.TooFewBroadcasts, detail=f"{len(entries)} distinct broadcasts")
    steps["count"] = "pass"

    if any(b.body.t_s > t_m for b, t_m in entries):
        steps["timestamps"] = "fail"
        return done("Abort", Reason.FutureTimestamp)
    steps["timestamps"] = "pass"

    valid = [(b, t_m) for b, t_m in entries
             if b.body.x_s.dims == config.dims and verify_beacon(config.registry, b)]
    accepted_ids = tuple(b.body.station_id for b, _ in valid)
    if len(valid) < need:
        steps["signatures"] = "fail"
        return done("Abort", Reason.TooFewValidSignatures, accepted_ids=accepted_ids,
                    detail=f"{len(valid)} valid of {len(entries)}")
    steps["signatures"] = "pass"

    obs = [RangeObservation(b.body.x_s, distance_bound(b.body.t_s, t_m, config.c), b.body.station_id)
           for b, t_m in valid]
    try:
        fix = solve_position(obs, config.dims)
    except SingularAtSolution as exc:
        # converged, but the uncertainty is unbounded: no finite limit admits it
        fix = Fix(exc.position, float("inf"), exc.residuals, exc.iterations)
    except OnewayError as exc:
        steps["solve"] = "fail"
        return done("Reject", Reason.SolverFailure, accepted_ids=accepted_ids,
                    detail=f"{type(exc).__name__}: {exc}")
    steps["solve"] = "pass"

    if fix.error_range > config.error_limit:
        steps["error_range"] = "fail"
        return done("Reject", Reason.ErrorRangeExceeded, fix=fix, accepted_ids=accepted_ids)
    steps["error_range"] = "pass"

    witness = containment_witness_search([o.station_pos for o in obs], fix.position)
    if witness is None:
        steps["containment"] = "fail"
        return done("Reject", Reason.NotContained, fix=fix, accepted_ids=accepted_ids)
    steps["containment"] = "pass"
    return done("Accepted", fix=fix, witness=witness, accepted_ids=accepted_ids)
