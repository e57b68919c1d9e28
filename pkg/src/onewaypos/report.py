"""Report records: one per scenario run, JSON lines or flat CSV."""
from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, fields
from typing import Optional

from .airsim import Scenario, TraceReport, run_scenario

RECORD_VERSION = 1
OUTCOME_CODES = frozenset({
    "Accepted", "ClockExpired", "TooFewBroadcasts", "FutureTimestamp", "TooFewValidSignatures",
    "SolverFailure", "ErrorRangeExceeded", "NotContained", "BidirAccepted", "BidirRejected",
})


def _finite(v):
    return v if v is not None and math.isfinite(v) else None


@dataclass(frozen=True)
class ReportRecord:
    record_version: int
    scenario: str
    seed: int
    protocol: str
    outcome: str
    classification: str
    position: Optional[list]
    error_range_m: Optional[float]
    steps: dict
    attacks: list
    physics_violations: int
    bidir_outcome: Optional[str] = None
    bidir_bounds_m: Optional[dict] = None
    bidir_shortened: Optional[list] = None
    runtime_s: Optional[float] = None

    def __post_init__(self):
        if self.outcome not in OUTCOME_CODES:
            raise ValueError(f"unknown outcome code {self.outcome!r}")

    def to_json(self) -> str:
        return json.dumps(asdict(self), separators=(",", ":"), allow_nan=False)

    @classmethod
    def from_json(cls, line: str) -> "ReportRecord":
        data = json.loads(line)
        names = {f.name for f in fields(cls)}
        extra = set(data) - names
        if extra:
            raise ValueError(f"unknown record fields {sorted(extra)}")
        return cls(**data)


CSV_COLUMNS = ("scenario", "seed", "protocol", "outcome", "classification", "x", "y", "z",
               "error_range_m", "physics_violations", "bidir_outcome", "runtime_s")


def to_csv_row(r: ReportRecord) -> dict:
    pos = list(r.position or []) + [None] * 3
    return {
        "scenario": r.scenario, "seed": r.seed, "protocol": r.protocol, "outcome": r.outcome,
        "classification": r.classification, "x": pos[0], "y": pos[1], "z": pos[2],
        "error_range_m": r.error_range_m, "physics_violations": r.physics_violations,
        "bidir_outcome": r.bidir_outcome, "runtime_s": r.runtime_s,
    }


def csv_text(records, header=True) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    if header:
        w.writeheader()
    for r in records:
        w.writerow({k: "" if v is None else v for k, v in to_csv_row(r).items()})
    return buf.getvalue()


def record_from_trace(s: Scenario, trace: Optional[TraceReport], bidir=None, runtime=None) -> ReportRecord:
    bi = {}
    if bidir is not None:
        bi = {
            "bidir_outcome": bidir.code,
            "bidir_bounds_m": {n: b for n, b in bidir.bounds},
            "bidir_shortened": list(bidir.shortened),
        }
    if trace is None:
        # bidirectional-only run
        fix = bidir.fix
        return ReportRecord(
            RECORD_VERSION, s.name, s.rng_seed, s.protocol, bidir.code,
            "accepted" if bidir.accepted else "rejected",
            list(fix.position.coords) if fix else None,
            _finite(fix.error_range) if fix else None,
            {}, [], 0, runtime_s=runtime, **bi,
        )
    fix = trace.result.fix
    return ReportRecord(
        RECORD_VERSION, trace.scenario, trace.seed, s.protocol, trace.result.code, trace.classification,
        list(fix.position.coords) if fix else None,
        _finite(fix.error_range) if fix else None,
        dict(trace.result.steps), list(trace.bookkeeping), trace.physics_violations(),
        runtime_s=runtime, **bi,
    )


def execute(s: Scenario, timing: bool = False) -> ReportRecord:
    """Run one scenario under its declared protocol and summarise it."""
    from .bidir import run_bidirectional

    t0 = time.perf_counter()
    trace = bidir = None
    if s.protocol in ("unidirectional", "compare"):
        trace = run_scenario(s)
    if s.protocol in ("bidirectional", "compare"):
        bidir = run_bidirectional(s)
    runtime = round(time.perf_counter() - t0, 6) if timing else None
    return record_from_trace(s, trace, bidir, runtime)
