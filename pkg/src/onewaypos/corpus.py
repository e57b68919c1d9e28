"""Seeded generators for scenario documents, and the bundled corpus.

Honest worlds are built on a lattice: every coordinate is a whole number of
micrometres and every station-terminal distance is a whole number of light
picoseconds (``LATTICE_C`` * 1 ps = 300 um).  Signal timing and signed
positions then carry no rounding at all, so an honest fix must land on the
truth to solver precision.
"""
from __future__ import annotations

import math
from itertools import combinations
from pathlib import Path

import numpy as np

from .geom import EPS_DEGENERATE, Point, Simplex, barycentric, signed_measure
from .scenario_io import SCHEMA_VERSION, dump_scenario

LATTICE_C = 3e8
_STEP_UM = 300  # LATTICE_C * 1 ps in micrometres


def _triples(limit=40):
    out = []
    for m in range(2, limit):
        for n in range(1, m):
            if (m - n) % 2 and math.gcd(m, n) == 1:
                out.append((m * m - n * n, 2 * m * n, m * m + n * n))
    return out


def _quadruples(limit=8):
    out = []
    for m in range(0, limit):
        for n in range(0, limit):
            for p in range(0, limit):
                for q in range(0, limit):
                    d = m * m + n * n + p * p + q * q
                    if d == 0:
                        continue
                    v = (m * m + n * n - p * p - q * q, 2 * (m * q + n * p), 2 * (n * q - m * p))
                    g = math.gcd(math.gcd(abs(v[0]), abs(v[1])), math.gcd(abs(v[2]), d))
                    out.append(tuple(x // g for x in v) + (d // g,))
    return sorted(set(out))


_TRIPLES = _triples()
_QUADS = _quadruples()


def lattice_offset(rng: np.random.Generator, dims: int, lo_m: float, hi_m: float) -> np.ndarray:
    """Integer-micrometre offset whose length is a whole number of 300 um steps."""
    if dims == 2:
        a, b, h = _TRIPLES[rng.integers(len(_TRIPLES))]
        v = [a, b]
        rng.shuffle(v)
        v = np.array(v) * rng.choice([-1, 1], size=2)
    else:
        a, b, c, h = _QUADS[rng.integers(len(_QUADS))]
        v = np.array([a, b, c])
        rng.shuffle(v)
        v = v * rng.choice([-1, 1], size=3)
    unit_m = h * _STEP_UM * 1e-6
    j = int(rng.integers(max(1, math.ceil(lo_m / unit_m)), max(2, math.floor(hi_m / unit_m) + 1)))
    return v.astype(np.int64) * (_STEP_UM * j)


def _um(x) -> list:
    return [int(v) / 1e6 for v in x]


def min_margin(stations, p, dims) -> float:
    """Largest, over non-degenerate simplices, of the smallest barycentric
    coordinate of ``p``; negative when no simplex contains it."""
    best = -np.inf
    for idx in combinations(range(len(stations)), dims + 1):
        s = Simplex(tuple(Point(tuple(stations[i])) for i in idx))
        if abs(signed_measure(s)) <= 1e3 * EPS_DEGENERATE[dims]:
            continue
        best = max(best, float(barycentric(s, Point(tuple(p))).min()))
    return best


def _base_doc(name, seed, dims, c, stations, truth, error_limit, scheme="ed25519"):
    return {
        "meta": {"schema_version": SCHEMA_VERSION, "name": name, "seed": int(seed), "dims": dims,
                 "c": c, "scheme": scheme},
        "protocol": "unidirectional",
        "stations": [{"id": f"S{i + 1}", "pos": list(p), "schedule": [0.0]} for i, p in enumerate(stations)],
        "terminal": {"true_pos": list(truth),
                     "clock": {"drift_per_day": 0.0, "validity_days": 30.0, "last_sync": 0.0},
                     "verifier": {"error_limit_m": error_limit, "listen_window_ms": 10.0}},
        "attacks": [],
    }


def honest_doc(rng: np.random.Generator, dims: int, name: str, seed: int, error_limit: float = 1.0,
               n_stations: int | None = None, scheme: str = "ed25519") -> dict:
    """Lattice-aligned honest world with the truth well inside a station simplex."""
    while True:
        n = n_stations or int(rng.integers(dims + 1, 7))
        truth_um = rng.integers(-500_000_000, 500_000_000, size=dims)
        stations_um = [truth_um + lattice_offset(rng, dims, 200.0, 2000.0) for _ in range(n)]
        st_m, tr_m = [_um(s) for s in stations_um], _um(truth_um)
        if min_margin(st_m, tr_m, dims) >= 0.05:
            return _base_doc(name, seed, dims, LATTICE_C, st_m, tr_m, error_limit, scheme)


def random_world(rng: np.random.Generator, dims: int, n: int, lo=200.0, hi=2000.0, margin=0.08):
    """Off-lattice stations around a truth point with a containment margin."""
    while True:
        truth = rng.uniform(-500, 500, size=dims)
        dirs = rng.normal(size=(n, dims))
        dirs /= np.linalg.norm(dirs, axis=1)[:, None]
        stations = truth + dirs * rng.uniform(lo, hi, size=(n, 1))
        stations = np.round(stations * 1e6) / 1e6
        if min_margin(stations, truth, dims) >= margin:
            return stations, truth


def interior_point(rng, stations, dims, truth, min_dist, margin=0.02, tries=10_000):
    """A point inside some station simplex at least ``min_dist`` from truth."""
    for _ in range(tries):
        idx = rng.choice(len(stations), size=dims + 1, replace=False)
        w = rng.dirichlet(np.ones(dims + 1))
        if w.min() < margin:
            continue
        q = w @ stations[idx]
        if np.linalg.norm(q - truth) >= min_dist and min_margin(stations, q, dims) >= margin:
            return q
    raise RuntimeError("no admissible fake point found")


SPOOF_KINDS = ("delay", "collude_relay", "replay", "replay_delay")


def spoof_doc(rng: np.random.Generator, kind: str, name: str, seed: int, dims: int = 2,
              scheme: str = "hmac") -> tuple:
    """An attacked world whose adversary tries to place the terminal at a fake
    interior point at least twice the error limit from the truth.

    Returns ``(doc, fake_point)``.
    """
    n = int(rng.integers(dims + 1, 7))
    stations, truth = random_world(rng, dims, n)
    error_limit = float(rng.uniform(1.0, 10.0))
    q = interior_point(rng, stations, dims, truth, max(2 * error_limit, float(rng.uniform(0, 300))))
    c = LATTICE_C
    doc = _base_doc(name, seed, dims, c, stations.tolist(), truth.tolist(), error_limit, scheme)
    names = [s["id"] for s in doc["stations"]]
    target = q.tolist()
    attacks = []
    if kind in ("delay", "replay_delay"):
        attacks.append({"kind": "delay", "target": target})
    if kind == "collude_relay":
        nodes = {}
        for nm, s in zip(names, stations):
            off = rng.normal(size=dims)
            nodes[nm] = (s + off / np.linalg.norm(off) * rng.uniform(1.0, 20.0)).tolist()
        attacks.append({"kind": "collude_relay", "nodes": nodes, "target": target,
                        "nonce_leak": bool(rng.integers(2))})
    if kind in ("replay", "replay_delay"):
        victim = names[int(rng.integers(n))]
        age = float(10 ** rng.uniform(-7, math.log10(86400)))
        attacks.append({"kind": "replay", "station": victim, "recorded_t_s": -age,
                        "deliver_at": float(rng.uniform(1e-5, 1e-4)), "suppress_original": True})
        if kind == "replay":
            attacks.append({"kind": "delay", "target": target})
    doc["attacks"] = attacks
    return doc, q


# ------------------------------------------------------------- bundled set


def bundled_corpus(seed: int = 20240601) -> dict:
    """File name -> document for the corpus shipped under ``corpus/``."""
    rng = np.random.default_rng(seed)
    out = {}
    for i in range(5):
        out[f"honest/honest-2d-{i + 1:02d}.yaml"] = honest_doc(rng, 2, f"honest-2d-{i + 1:02d}", 100 + i)
        out[f"honest/honest-3d-{i + 1:02d}.yaml"] = honest_doc(rng, 3, f"honest-3d-{i + 1:02d}", 200 + i)

    base = honest_doc(rng, 2, "honest-2d", 1, n_stations=4)
    out["honest-2d.yaml"] = base
    out["honest-3d.yaml"] = honest_doc(rng, 3, "honest-3d", 2, n_stations=5)

    forgery = _clone(base, "forgery", 3)
    truth = forgery["terminal"]["true_pos"]
    forgery["attacks"] = [
        {"kind": "forge", "station": "X1", "pos": [truth[0] + 50.0, truth[1]], "t_s": 0.0,
         "deliver_at": 1e-6, "signature": "random"},
        {"kind": "forge", "station": "X2", "pos": [truth[0], truth[1] - 50.0], "t_s": 0.0,
         "deliver_at": 2e-6, "signature": "attacker_key"},
    ]
    out["forgery.yaml"] = forgery

    stations = np.array([s["pos"] for s in base["stations"]])
    fake = interior_point(rng, stations, 2, np.array(truth), 50.0).tolist()

    replay = _clone(base, "stale-replay", 4)
    replay["attacks"] = [{"kind": "replay", "station": "S1", "recorded_t_s": -86400.0,
                          "deliver_at": 5e-6, "suppress_original": True}]
    out["stale-replay.yaml"] = replay

    delay = _clone(base, "forced-delay", 5)
    delay["attacks"] = [{"kind": "delay", "target": fake}]
    out["forced-delay.yaml"] = delay

    relay = _clone(base, "collusion-relay", 6)
    relay["attacks"] = [{"kind": "collude_relay", "target": fake, "nonce_leak": False,
                         "nodes": {s["id"]: [s["pos"][0] + 5.0, s["pos"][1] + 5.0] for s in base["stations"]}}]
    out["collusion-relay.yaml"] = relay

    compare = _clone(base, "stolen-nonce-compare", 7)
    compare["protocol"] = "compare"
    compare["attacks"] = [{"kind": "collude_relay", "target": fake, "nonce_leak": True,
                           "nodes": {s["id"]: [s["pos"][0] + 5.0, s["pos"][1] + 5.0] for s in base["stations"]}}]
    compare["bidir"] = {"rounds": 32, "bits": 1, "processing_s": 0.0}
    out["stolen-nonce-compare.yaml"] = compare

    for days in (1, 10, 30):
        doc = _clone(_drift_world(), f"clock-drift-{days:02d}d", 8 + days)
        doc["terminal"]["clock"] = {"drift_per_day": 5e-10, "validity_days": 30.0,
                                    "last_sync": -(days * 86400.0 - 1.0), "drift_sign": 1}
        out[f"clock-drift-sweep/clock-drift-{days:02d}d.yaml"] = doc
    return out


def _drift_world() -> dict:
    """Axis-symmetric triangle where a uniform range inflation moves the fix
    by almost exactly the inflation."""
    stations = [[0.0, -3000.0], [0.0, 3000.0], [6000.0, 0.0]]
    return _base_doc("drift", 8, 2, LATTICE_C, stations, [40.0, 0.0], 20.0)


def _clone(doc, name, seed):
    import copy
    d = copy.deepcopy(doc)
    d["meta"]["name"] = name
    d["meta"]["seed"] = seed
    return d


def write_bundled_corpus(root) -> list:
    root = Path(root)
    written = []
    for rel, doc in bundled_corpus().items():
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dump_scenario(doc), encoding="utf-8")
        written.append(path)
    return written


if __name__ == "__main__":  # pragma: no cover
    import sys

    for p in write_bundled_corpus(sys.argv[1] if len(sys.argv) > 1 else "corpus"):
        print(p)
