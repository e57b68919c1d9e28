"""Secure positioning from one-way signed broadcasts and a trusted inner clock."""

from .geom import Point, Simplex, contains, shortening_witness, signed_measure
from .timebase import ClockModel, Instant, accumulated_position_error, expired, read
from .authsig import BeaconBody, Broadcast, KeyRegistry, encode_body, decode_body, sign_beacon, verify_beacon
from .ranging import Fix, RangeObservation, distance_bound, error_range, solve_position
from .verifier import (
    PositionResult, Reason, Receipt, VerifierConfig, containment_witness_search, make_broadcast,
    verify_position,
)
from .airsim import Scenario, TraceReport, collude_relay_delay, record_and_replay, run_scenario

__version__ = "0.1.0"

__all__ = [
    "Point", "Simplex", "contains", "shortening_witness", "signed_measure",
    "ClockModel", "Instant", "accumulated_position_error", "expired", "read",
    "BeaconBody", "Broadcast", "KeyRegistry", "encode_body", "decode_body", "sign_beacon", "verify_beacon",
    "Fix", "RangeObservation", "distance_bound", "error_range", "solve_position",
    "PositionResult", "Reason", "Receipt", "VerifierConfig", "containment_witness_search",
    "make_broadcast", "verify_position",
    "Scenario", "TraceReport", "collude_relay_delay", "record_and_replay", "run_scenario",
]
