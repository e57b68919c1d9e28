"""Deterministic discrete-event radio medium with adversary hooks.

Signals never travel faster than ``c``.  The adversary controls the medium:
it may hold signals back, reroute them through relay nodes, suppress them,
re-inject recordings, or inject its own beacons.  It has no station private
keys and no access to the terminal's inner clock.
"""
from __future__ import annotations

import hashlib
import heapq
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .authsig import BeaconBody, Broadcast, KeyRegistry, encode_body, get_scheme, station_id, station_name
from .errors import CausalityViolation, ValidationError
from .geom import Point, as_point
from .timebase import PERFECT_CLOCK, TICKS_PER_SECOND, ClockModel, Instant, read
from .verifier import PositionResult, Receipt, VerifierConfig, make_broadcast, verify_position

DEFAULT_LISTEN_WINDOW = 10 * 10**9  # 10 ms in ps


def travel_ticks(distance: float, c: float) -> int:
    return round(distance / c * TICKS_PER_SECOND)


def derive_seed(rng_seed: int, *labels: str) -> bytes:
    h = hashlib.sha256(str(int(rng_seed)).encode())
    for label in labels:
        h.update(b"|" + label.encode())
    return h.digest()


# ------------------------------------------------------------------ world


@dataclass(frozen=True)
class Station:
    name: str
    position: Point
    schedule: tuple
    private_key: object = field(repr=False, compare=False)
    public_key: bytes = field(repr=False)

    @property
    def id(self) -> bytes:
        return station_id(self.name)

    @classmethod
    def create(cls, name, position, schedule, rng_seed, scheme="ed25519"):
        priv, pub = get_scheme(scheme).keypair(derive_seed(rng_seed, "station", name))
        sched = tuple(t if isinstance(t, Instant) else Instant.from_seconds(t) for t in schedule)
        return cls(name, as_point(position), sched, priv, pub)


@dataclass(frozen=True)
class Terminal:
    true_pos: Point
    error_limit: float
    clock: ClockModel = PERFECT_CLOCK
    drift_sign: int = 1
    listen_window: int = DEFAULT_LISTEN_WINDOW
    listen_start: Optional[Instant] = None


# ---------------------------------------------------------------- attacks


@dataclass(frozen=True)
class Forge:
    """Inject a beacon the adversary made up."""

    station: str
    position: Point
    t_s: Instant
    deliver_at: Instant
    signature: str = "random"  # "random" bytes or "attacker_key"
    from_pos: Optional[Point] = None

    def __post_init__(self):
        if self.signature not in ("random", "attacker_key"):
            raise ValueError(f"unknown signature source {self.signature!r}")


@dataclass(frozen=True)
class Replay:
    """Re-inject identical signed bytes recorded earlier."""

    broadcast: Broadcast
    original_arrival: Instant
    deliver_at: Instant
    suppress_original: bool = False
    from_pos: Optional[Point] = None

    def __post_init__(self):
        if self.deliver_at < self.original_arrival:
            raise CausalityViolation("replay delivered before the recording was made")


@dataclass(frozen=True)
class Delay:
    """Hold each station's signal back by a non-negative amount (ticks).

    With ``target`` set, each station's hold is instead the least amount that
    makes its range bound match the target point, clipped at zero.
    """

    delays: tuple = ()  # ((station name, ticks), ...)
    target: Optional[Point] = None

    def __post_init__(self):
        items = tuple(sorted(dict(self.delays).items()))
        for name, ticks in items:
            if ticks < 0:
                raise ValueError(f"negative delay for station {name!r}")
        object.__setattr__(self, "delays", items)


@dataclass(frozen=True)
class ColludeRelay:
    """Adversary nodes intercept stations' signals and re-forward them.

    ``nodes`` maps station name -> relay position.  ``hold`` adds explicit
    per-station holding time (ticks); ``target`` makes each node hold just
    long enough to emulate that point.  ``nonce_leak`` only matters to the
    bidirectional comparison.
    """

    nodes: tuple = ()  # ((station name, Point), ...)
    hold: tuple = ()
    target: Optional[Point] = None
    nonce_leak: bool = False

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(sorted((n, as_point(p)) for n, p in dict(self.nodes).items())))
        hold = tuple(sorted(dict(self.hold).items()))
        for name, ticks in hold:
            if ticks < 0:
                raise ValueError(f"negative hold for station {name!r}")
        object.__setattr__(self, "hold", hold)


AttackSpec = Union[Forge, Replay, Delay, ColludeRelay]


@dataclass(frozen=True)
class Scenario:
    name: str
    dims: int
    c: float
    rng_seed: int
    stations: tuple
    terminal: Terminal
    attacks: tuple = ()
    scheme: str = "ed25519"
    protocol: str = "unidirectional"
    bidir: tuple = ()  # ((setting, value), ...) for the challenge-response model

    def registry(self) -> KeyRegistry:
        return KeyRegistry([(s.id, s.public_key) for s in self.stations], get_scheme(self.scheme))

    def verifier_config(self) -> VerifierConfig:
        return VerifierConfig(self.dims, self.terminal.error_limit, self.c, self.registry(), self.terminal.clock)

    def station(self, name: str) -> Station:
        for s in self.stations:
            if s.name == name:
                return s
        raise KeyError(name)


def validate_scenario(s: Scenario) -> None:
    """Raise ``ValidationError`` naming the first offending field."""
    if s.dims not in (2, 3):
        raise ValidationError("meta.dims", "must be 2 or 3")
    if not (s.c > 0 and math.isfinite(s.c)):
        raise ValidationError("meta.c", "must be a positive finite speed")
    if not 0 <= s.rng_seed < 2**64:
        raise ValidationError("meta.seed", "must fit in an unsigned 64-bit integer")
    seen = set()
    for i, st in enumerate(s.stations):
        if st.name in seen:
            raise ValidationError(f"stations[{i}].id", f"duplicate station id {st.name!r}")
        seen.add(st.name)
        if st.position.dims != s.dims:
            raise ValidationError(f"stations[{i}].pos", f"expected {s.dims} coordinates")
    if s.terminal.true_pos.dims != s.dims:
        raise ValidationError("terminal.true_pos", f"expected {s.dims} coordinates")
    for i, a in enumerate(s.attacks):
        names = []
        if isinstance(a, Delay):
            names = [n for n, _ in a.delays]
        elif isinstance(a, ColludeRelay):
            names = [n for n, _ in a.nodes] + [n for n, _ in a.hold]
            for _, p in a.nodes:
                if p.dims != s.dims:
                    raise ValidationError(f"attacks[{i}].nodes", f"expected {s.dims} coordinates")
        for n in names:
            if n not in seen:
                raise ValidationError(f"attacks[{i}]", f"unknown station {n!r}")
        target = getattr(a, "target", None)
        if target is not None and target.dims != s.dims:
            raise ValidationError(f"attacks[{i}].target", f"expected {s.dims} coordinates")
    if s.protocol not in ("unidirectional", "bidirectional", "compare"):
        raise ValidationError("protocol", f"unknown protocol {s.protocol!r}")


# ----------------------------------------------------------------- trace


@dataclass(frozen=True)
class Delivery:
    source: str  # "station" | "relay" | "forge" | "replay"
    station: str
    emit: Instant
    arrival: Instant
    path_length: float
    straight_distance: float
    captured: bool
    broadcast: Broadcast = field(repr=False, compare=True)

    def physics_ok(self, c: float) -> bool:
        return self.arrival.ticks >= self.emit.ticks + self.straight_distance / c * TICKS_PER_SECOND - 1


@dataclass(frozen=True)
class TraceReport:
    scenario: str
    seed: int
    c: float
    events: tuple
    result: PositionResult
    bookkeeping: tuple
    classification: str
    suppressed: tuple = ()

    def physics_violations(self) -> int:
        return sum(not e.physics_ok(self.c) for e in self.events)

    def to_dict(self) -> dict:
        fix = self.result.fix
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "outcome": self.result.code,
            "classification": self.classification,
            "position": list(fix.position.coords) if fix else None,
            "error_range": fix.error_range if fix else None,
            "steps": dict(self.result.steps),
            "events": [
                {"source": e.source, "station": e.station, "emit_ps": e.emit.ticks,
                 "arrival_ps": e.arrival.ticks, "path_m": e.path_length, "captured": e.captured,
                 "bytes": encode_body(e.broadcast.body).hex(), "sig": e.broadcast.signature.hex()}
                for e in self.events
            ],
            "bookkeeping": list(self.bookkeeping),
            "suppressed": list(self.suppressed),
        }


# ---------------------------------------------------------------- engine


def _dist(a: Point, b: Point) -> float:
    return math.dist(a.coords, b.coords)


def collude_relay_delay(station_pos, node_pos, terminal_pos, c: float) -> float:
    """Least extra time (s) a relay at ``node_pos`` adds to the direct path."""
    s, n, t = as_point(station_pos), as_point(node_pos), as_point(terminal_pos)
    extra = _dist(s, n) + _dist(n, t) - _dist(s, t)
    return max(0.0, extra) / c


def record_and_replay(trace: TraceReport, index: int, new_delivery: Instant,
                      suppress_original: bool = False) -> Replay:
    """Build an attack that re-delivers the ``index``-th delivered signal."""
    ev = trace.events[index]
    if new_delivery < ev.arrival:
        raise CausalityViolation(f"cannot deliver at {new_delivery.ticks} ps, recorded at {ev.arrival.ticks} ps")
    return Replay(ev.broadcast, ev.arrival, new_delivery, suppress_original)


def _forge_broadcast(a: Forge, scenario: Scenario, rng: np.random.Generator) -> Broadcast:
    scheme = get_scheme(scenario.scheme)
    body = BeaconBody(station_id(a.station), a.t_s, a.position)
    if a.signature == "random":
        sig = rng.bytes(scheme.signature_length)
    else:
        priv, _ = scheme.keypair(derive_seed(scenario.rng_seed, "attacker", a.station))
        sig = scheme.sign(priv, encode_body(body))
    return Broadcast(body, sig)


def run_scenario(s: Scenario) -> TraceReport:
    validate_scenario(s)
    rng = np.random.default_rng(s.rng_seed)
    scheme = get_scheme(s.scheme)
    term = s.terminal
    tpos = term.true_pos

    suppressed_stations = {station_name(a.broadcast.body.station_id)
                           for a in s.attacks if isinstance(a, Replay) and a.suppress_original}
    relays = {}
    holds = {}
    extra = {}
    relay_targets = {}
    delay_targets = []
    for a in s.attacks:
        if isinstance(a, ColludeRelay):
            for name, node in a.nodes:
                relays[name] = node
                relay_targets[name] = a.target
            for name, ticks in a.hold:
                holds[name] = holds.get(name, 0) + ticks
        elif isinstance(a, Delay):
            for name, ticks in a.delays:
                extra[name] = extra.get(name, 0) + ticks
            if a.target is not None:
                delay_targets.append(a.target)

    queue = []
    seq = 0

    def push(t: Instant, kind: str, payload):
        nonlocal seq
        heapq.heappush(queue, (t.ticks, seq, kind, payload))
        seq += 1

    bookkeeping = []
    for st in s.stations:
        for t_s in st.schedule:
            push(t_s, "emit", (st, make_broadcast(st.private_key, st.id, t_s, st.position, scheme)))

    for i, a in enumerate(s.attacks):
        if isinstance(a, (Forge, Replay)):
            src = a.from_pos or tpos
            emit = a.deliver_at.shifted(-travel_ticks(_dist(src, tpos), s.c))
            if isinstance(a, Forge):
                b = _forge_broadcast(a, s, rng)
                bookkeeping.append({"attack": i, "kind": "forge", "station": a.station,
                                    "signature": a.signature})
            else:
                b = a.broadcast
                bookkeeping.append({"attack": i, "kind": "replay",
                                    "station": station_name(b.body.station_id),
                                    "recorded_t_s_ps": b.body.t_s.ticks,
                                    "original_arrival_ps": a.original_arrival.ticks,
                                    "deliver_at_ps": a.deliver_at.ticks,
                                    "suppress_original": a.suppress_original})
            push(emit, "inject", ("forge" if isinstance(a, Forge) else "replay", src, a.deliver_at, b))
        elif isinstance(a, Delay):
            bookkeeping.append({"attack": i, "kind": "delay",
                                "delays_ps": {n: t for n, t in a.delays},
                                "target": list(a.target.coords) if a.target else None})
        elif isinstance(a, ColludeRelay):
            bookkeeping.append({"attack": i, "kind": "collude_relay",
                                "nodes": {n: list(p.coords) for n, p in a.nodes},
                                "target": list(a.target.coords) if a.target else None,
                                "nonce_leak": a.nonce_leak})

    events = []
    suppressed = []
    captured = []
    window_end = None

    while queue:
        t, _, kind, payload = heapq.heappop(queue)
        now = Instant(t)
        if kind == "emit":
            st, b = payload
            if st.name in suppressed_stations:
                suppressed.append({"station": st.name, "t_s_ps": now.ticks})
                continue
            direct = _dist(st.position, tpos)
            if st.name in relays:
                node = relays[st.name]
                path = _dist(st.position, node) + _dist(node, tpos)
                source = "relay"
            else:
                path = direct
                source = "station"
            hold = holds.get(st.name, 0) + extra.get(st.name, 0)
            target = relay_targets.get(st.name)
            targets = ([target] if target is not None else []) + delay_targets
            for q in targets:
                want = travel_ticks(_dist(st.position, q), s.c)
                hold = max(hold, want - travel_ticks(path, s.c))
            arrival = now.shifted(travel_ticks(path, s.c) + hold)
            push(arrival, "arrive", (source, st.name, now, path, direct, b))
        elif kind == "inject":
            source, src, deliver_at, b = payload
            d = _dist(src, tpos)
            push(deliver_at, "arrive", (source, station_name(b.body.station_id), now, d, d, b))
        else:
            source, name, emit, path, direct, b = payload
            take = term.listen_start is None or now >= term.listen_start
            if take and window_end is None:
                window_end = now.shifted(term.listen_window)
            take = take and now <= window_end
            events.append(Delivery(source, name, emit, now, path, direct, take, b))
            if take:
                captured.append((b, read(term.clock, now, term.drift_sign)))

    result = verify_position(Receipt(tuple(captured)), s.verifier_config())
    classification = _classify(s, result)
    return TraceReport(s.name, s.rng_seed, s.c, tuple(events), result, tuple(bookkeeping),
                       classification, tuple(suppressed))


def attack_targets(s: Scenario) -> list:
    out = []
    for a in s.attacks:
        if isinstance(a, Forge):
            continue
        t = getattr(a, "target", None)
        if t is not None:
            out.append(t)
    return out


def _classify(s: Scenario, result: PositionResult) -> str:
    if result.kind == "Abort":
        return "aborted"
    if result.kind == "Reject":
        return "rejected"
    pos = result.fix.position
    for q in attack_targets(s):
        if _dist(pos, q) <= s.terminal.error_limit:
            return "spoofed"
    return "accepted"
