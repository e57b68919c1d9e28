"""YAML scenario files (schema_version 1).

Every validation failure raises ``ValidationError`` carrying the dotted field
path (``attacks[0].delay``) and, where known, the 1-based source line.
Units: positions in metres, times in seconds unless a suffix says otherwise,
``drift_per_day`` in seconds per day, ``validity_days`` in days.
"""
from __future__ import annotations

import math
import re
from pathlib import Path

import yaml

from .airsim import (
    ColludeRelay, Delay, Forge, Replay, Scenario, Station, Terminal, travel_ticks, validate_scenario,
)
from .authsig import get_scheme, station_id
from .errors import CausalityViolation, ValidationError
from .geom import Point
from .timebase import ClockModel, Instant
from .verifier import make_broadcast

SCHEMA_VERSION = 1

_TOP = {"meta": True, "stations": True, "terminal": True, "attacks": False, "protocol": False, "bidir": False}
_META = {"schema_version": True, "name": True, "seed": True, "dims": True, "c": True, "scheme": False}
_STATION = {"id": True, "pos": True, "schedule": True}
_TERMINAL = {"true_pos": True, "clock": False, "verifier": True}
_CLOCK = {"drift_per_day": False, "validity_days": False, "last_sync": False, "offset_s": False, "drift_sign": False}
_VERIFIER = {"error_limit_m": True, "listen_window_ms": False, "listen_start_s": False}
_BIDIR = {"rounds": False, "bits": False, "processing_s": False, "declared_processing_s": False}
_ATTACKS = {
    "forge": {"kind": True, "station": True, "pos": True, "t_s": True, "deliver_at": True,
              "signature": False, "from_pos": False},
    "replay": {"kind": True, "station": True, "recorded_t_s": True, "deliver_at": True,
               "suppress_original": False, "from_pos": False},
    "delay": {"kind": True, "delay": False, "target": False},
    "collude_relay": {"kind": True, "nodes": True, "hold": False, "target": False, "nonce_leak": False},
}


class _Loader(yaml.SafeLoader):
    """SafeLoader that also reads ``3e8`` / ``1.5e-6`` as floats (YAML 1.1
    insists on a dot and a signed exponent)."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"""^[-+]?(?:[0-9][0-9_]*\.[0-9_]*(?:[eE][-+]?[0-9]+)?
                    |\.[0-9_]+(?:[eE][-+]?[0-9]+)?
                    |[0-9][0-9_]*[eE][-+]?[0-9]+
                    |[-+]?\.(?:inf|Inf|INF)
                    |\.(?:nan|NaN|NAN))$""", re.X),
    list("-+0123456789."),
)


def _line_map(text: str) -> dict:
    """Dotted path -> 1-based line for every node in the document."""
    lines = {}

    def walk(node, path):
        lines[path or "<root>"] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                key = str(k.value)
                walk(v, f"{path}.{key}" if path else key)
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                walk(v, f"{path}[{i}]")

    root = yaml.compose(text, Loader=_Loader)
    if root is not None:
        walk(root, "")
    return lines


class _Ctx:
    def __init__(self, lines):
        self.lines = lines

    def fail(self, path, message):
        line = None
        p = path
        while p and line is None:
            line = self.lines.get(p)
            p = p.rsplit(".", 1)[0] if "." in p else (p.rsplit("[", 1)[0] if "[" in p else "")
        raise ValidationError(path, message, line)

    def mapping(self, value, path, fields):
        if not isinstance(value, dict):
            self.fail(path, "expected a mapping")
        for key in value:
            if key not in fields:
                self.fail(f"{path}.{key}" if path else str(key), "unknown field")
        for key, required in fields.items():
            if required and key not in value:
                self.fail(f"{path}.{key}" if path else key, "missing required field")
        return value

    def number(self, value, path, *, minimum=None, strict=False, integer=False):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(path, "expected a number")
        if integer and not isinstance(value, int):
            self.fail(path, "expected an integer")
        if not math.isfinite(value):
            self.fail(path, "must be finite")
        if minimum is not None and (value <= minimum if strict else value < minimum):
            self.fail(path, f"must be {'>' if strict else '>='} {minimum}")
        return value

    def point(self, value, path, dims):
        if not isinstance(value, list) or len(value) != dims:
            self.fail(path, f"expected a list of {dims} coordinates")
        return Point(tuple(self.number(v, f"{path}[{i}]") for i, v in enumerate(value)))

    def name(self, value, path):
        if not isinstance(value, str) or not value:
            self.fail(path, "expected a non-empty string")
        try:
            station_id(value)
        except ValueError as exc:
            self.fail(path, str(exc))
        return value

    def per_station(self, value, path, names, *, allow_scalar=True):
        """Scalar (applies to every station) or {station: seconds}; all >= 0."""
        if allow_scalar and not isinstance(value, dict):
            v = self.number(value, path, minimum=0)
            return {n: v for n in names}
        if not isinstance(value, dict):
            self.fail(path, "expected a mapping of station -> seconds")
        out = {}
        for k, v in value.items():
            if k not in names:
                self.fail(f"{path}.{k}", "unknown station")
            out[k] = self.number(v, f"{path}.{k}", minimum=0)
        return out


def parse_scenario(text: str, seed_override: int | None = None) -> Scenario:
    try:
        doc = yaml.load(text, Loader=_Loader)
        lines = _line_map(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ValidationError("<document>", f"parse error: {getattr(exc, 'problem', exc)}",
                              mark.line + 1 if mark else None) from None
    return build_scenario(doc, seed_override, lines)


def build_scenario(doc, seed_override: int | None = None, lines: dict | None = None) -> Scenario:
    """Validate an already-parsed document and build the ``Scenario``."""
    ctx = _Ctx(lines or {})
    ctx.mapping(doc, "", _TOP)

    meta = ctx.mapping(doc["meta"], "meta", _META)
    if meta["schema_version"] != SCHEMA_VERSION:
        ctx.fail("meta.schema_version", f"unsupported version {meta['schema_version']!r}")
    name = meta["name"]
    if not isinstance(name, str):
        ctx.fail("meta.name", "expected a string")
    seed = ctx.number(meta["seed"], "meta.seed", minimum=0, integer=True)
    if seed >= 2**64:
        ctx.fail("meta.seed", "must fit in 64 bits")
    if seed_override is not None:
        seed = int(seed_override)
    dims = meta["dims"]
    if dims not in (2, 3) or isinstance(dims, bool):
        ctx.fail("meta.dims", "must be 2 or 3")
    c = ctx.number(meta["c"], "meta.c", minimum=0, strict=True)
    scheme = meta.get("scheme", "ed25519")
    try:
        get_scheme(scheme)
    except ValueError as exc:
        ctx.fail("meta.scheme", str(exc))

    protocol = doc.get("protocol", "unidirectional")
    if protocol not in ("unidirectional", "bidirectional", "compare"):
        ctx.fail("protocol", "must be unidirectional, bidirectional or compare")

    raw_stations = doc["stations"]
    if not isinstance(raw_stations, list):
        ctx.fail("stations", "expected a list")
    stations, names = [], []
    for i, st in enumerate(raw_stations):
        p = f"stations[{i}]"
        ctx.mapping(st, p, _STATION)
        sname = ctx.name(st["id"], f"{p}.id")
        if sname in names:
            ctx.fail(f"{p}.id", f"duplicate station id {sname!r}")
        names.append(sname)
        pos = ctx.point(st["pos"], f"{p}.pos", dims)
        if not isinstance(st["schedule"], list):
            ctx.fail(f"{p}.schedule", "expected a list of emission times (s)")
        sched = [Instant.from_seconds(ctx.number(t, f"{p}.schedule[{j}]")) for j, t in enumerate(st["schedule"])]
        stations.append(Station.create(sname, pos, sched, seed, scheme))

    term = ctx.mapping(doc["terminal"], "terminal", _TERMINAL)
    true_pos = ctx.point(term["true_pos"], "terminal.true_pos", dims)
    clk = ctx.mapping(term.get("clock", {}), "terminal.clock", _CLOCK)
    drift_sign = clk.get("drift_sign", 1)
    if drift_sign not in (1, -1):
        ctx.fail("terminal.clock.drift_sign", "must be +1 or -1")
    clock = ClockModel(
        initial_offset=ctx.number(clk.get("offset_s", 0.0), "terminal.clock.offset_s"),
        drift_rate=ctx.number(clk.get("drift_per_day", 0.0), "terminal.clock.drift_per_day", minimum=0),
        last_sync=Instant.from_seconds(ctx.number(clk.get("last_sync", 0.0), "terminal.clock.last_sync")),
        validity_period=ctx.number(clk.get("validity_days", 1e6), "terminal.clock.validity_days",
                                   minimum=0, strict=True),
    )
    ver = ctx.mapping(term["verifier"], "terminal.verifier", _VERIFIER)
    error_limit = ctx.number(ver["error_limit_m"], "terminal.verifier.error_limit_m", minimum=0, strict=True)
    window_ms = ctx.number(ver.get("listen_window_ms", 10.0), "terminal.verifier.listen_window_ms", minimum=0)
    start = ver.get("listen_start_s")
    listen_start = None if start is None else Instant.from_seconds(
        ctx.number(start, "terminal.verifier.listen_start_s"))
    terminal = Terminal(true_pos, error_limit, clock, drift_sign,
                        Instant.from_seconds(window_ms / 1000).ticks, listen_start)

    attacks = []
    raw_attacks = doc.get("attacks") or []
    if not isinstance(raw_attacks, list):
        ctx.fail("attacks", "expected a list")
    by_name = {s.name: s for s in stations}
    for i, a in enumerate(raw_attacks):
        p = f"attacks[{i}]"
        if not isinstance(a, dict) or a.get("kind") not in _ATTACKS:
            ctx.fail(f"{p}.kind", f"expected one of {sorted(_ATTACKS)}")
        kind = a["kind"]
        ctx.mapping(a, p, _ATTACKS[kind])
        target = ctx.point(a["target"], f"{p}.target", dims) if a.get("target") is not None else None
        from_pos = ctx.point(a["from_pos"], f"{p}.from_pos", dims) if a.get("from_pos") is not None else None
        if kind == "delay":
            delays = ctx.per_station(a.get("delay", 0.0), f"{p}.delay", names)
            attacks.append(Delay(tuple((n, Instant.from_seconds(v).ticks) for n, v in delays.items()), target))
        elif kind == "collude_relay":
            nodes_raw = a["nodes"]
            if not isinstance(nodes_raw, dict) or not nodes_raw:
                ctx.fail(f"{p}.nodes", "expected a mapping of station -> relay position")
            nodes = {}
            for n, pos in nodes_raw.items():
                if n not in names:
                    ctx.fail(f"{p}.nodes.{n}", "unknown station")
                nodes[n] = ctx.point(pos, f"{p}.nodes.{n}", dims)
            hold = ctx.per_station(a.get("hold", {}), f"{p}.hold", names, allow_scalar=False)
            leak = a.get("nonce_leak", False)
            if not isinstance(leak, bool):
                ctx.fail(f"{p}.nonce_leak", "expected true/false")
            attacks.append(ColludeRelay(tuple(nodes.items()),
                                        tuple((n, Instant.from_seconds(v).ticks) for n, v in hold.items()),
                                        target, leak))
        elif kind == "forge":
            sname = ctx.name(a["station"], f"{p}.station")
            sig = a.get("signature", "random")
            if sig not in ("random", "attacker_key"):
                ctx.fail(f"{p}.signature", "must be random or attacker_key")
            attacks.append(Forge(sname, ctx.point(a["pos"], f"{p}.pos", dims),
                                 Instant.from_seconds(ctx.number(a["t_s"], f"{p}.t_s")),
                                 Instant.from_seconds(ctx.number(a["deliver_at"], f"{p}.deliver_at")),
                                 sig, from_pos))
        else:
            sname = a["station"]
            if sname not in by_name:
                ctx.fail(f"{p}.station", "unknown station")
            st = by_name[sname]
            t_rec = Instant.from_seconds(ctx.number(a["recorded_t_s"], f"{p}.recorded_t_s"))
            b = make_broadcast(st.private_key, st.id, t_rec, st.position, get_scheme(scheme))
            original = t_rec.shifted(travel_ticks(st.position.distance(true_pos), c))
            suppress = a.get("suppress_original", False)
            if not isinstance(suppress, bool):
                ctx.fail(f"{p}.suppress_original", "expected true/false")
            try:
                attacks.append(Replay(b, original,
                                      Instant.from_seconds(ctx.number(a["deliver_at"], f"{p}.deliver_at")),
                                      suppress, from_pos))
            except CausalityViolation as exc:
                ctx.fail(f"{p}.deliver_at", str(exc))

    bidir = ctx.mapping(doc.get("bidir") or {}, "bidir", _BIDIR)
    for key in ("rounds", "bits"):
        if key in bidir:
            ctx.number(bidir[key], f"bidir.{key}", minimum=1, integer=True)
    for key in ("processing_s", "declared_processing_s"):
        if bidir.get(key) is not None:
            ctx.number(bidir[key], f"bidir.{key}", minimum=0)

    scenario = Scenario(name, dims, float(c), seed, tuple(stations), terminal, tuple(attacks),
                        scheme, protocol, tuple(sorted(bidir.items())))
    validate_scenario(scenario)
    return scenario


def load_scenario(path, seed_override: int | None = None) -> Scenario:
    text = Path(path).read_text(encoding="utf-8")
    return parse_scenario(text, seed_override)


def dump_scenario(doc: dict) -> str:
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None)
