"""Points, simplices and the containment test used for position verification."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from . import _kernels
from .errors import DegenerateSimplex, DimensionMismatch

EPS_BOUNDARY = 1e-9
EPS_DEGENERATE = {2: 1e-6, 3: 1e-9}


@dataclass(frozen=True)
class Point:
    coords: tuple

    def __post_init__(self):
        c = tuple(float(v) for v in self.coords)
        if len(c) not in (2, 3):
            raise DimensionMismatch(f"point must have 2 or 3 coordinates, got {len(c)}")
        if not all(math.isfinite(v) for v in c):
            raise ValueError(f"non-finite coordinate in {c}")
        object.__setattr__(self, "coords", c)

    @classmethod
    def of(cls, *coords) -> "Point":
        if len(coords) == 1 and not isinstance(coords[0], (int, float)):
            coords = tuple(coords[0])
        return cls(tuple(coords))

    @property
    def dims(self) -> int:
        return len(self.coords)

    def array(self) -> np.ndarray:
        return np.array(self.coords, dtype=np.float64)

    def distance(self, other: "Point") -> float:
        _same_dims(self, other)
        return math.dist(self.coords, other.coords)

    def __iter__(self):
        return iter(self.coords)

    def __len__(self):
        return len(self.coords)

    def __getitem__(self, i):
        return self.coords[i]


def as_point(p) -> Point:
    return p if isinstance(p, Point) else Point(tuple(p))


def _same_dims(*points: Point) -> int:
    dims = {p.dims for p in points}
    if len(dims) != 1:
        raise DimensionMismatch(f"mixed dimensions {sorted(dims)}")
    return dims.pop()


@dataclass(frozen=True)
class Simplex:
    """Triangle (2D) or tetrahedron (3D).

    Construction does not reject degenerate vertex sets; ``contains`` does.
    """

    vertices: tuple

    def __post_init__(self):
        verts = tuple(as_point(v) for v in self.vertices)
        d = _same_dims(*verts)
        if len(verts) != d + 1:
            raise DimensionMismatch(f"{d}D simplex needs {d + 1} vertices, got {len(verts)}")
        object.__setattr__(self, "vertices", verts)

    @property
    def dims(self) -> int:
        return self.vertices[0].dims

    def array(self) -> np.ndarray:
        return np.array([v.coords for v in self.vertices], dtype=np.float64)

    def is_degenerate(self) -> bool:
        return abs(signed_measure(self)) <= degeneracy_threshold(self)


def degeneracy_threshold(simplex: Simplex) -> float:
    # the fixed threshold, raised to the determinant's rounding noise when
    # coordinates are large enough for that to dominate
    edges = simplex.array()[1:] - simplex.array()[0]
    scale = float(np.max(np.linalg.norm(edges, axis=1)))
    return max(EPS_DEGENERATE[simplex.dims], 64 * np.finfo(float).eps * scale ** simplex.dims)


def signed_measure(simplex: Simplex) -> float:
    """Signed area (2D) or signed volume (3D); positive for counter-clockwise
    / right-handed vertex order."""
    v = simplex.array()
    edges = v[1:] - v[0]
    if simplex.dims == 2:
        return 0.5 * (edges[0, 0] * edges[1, 1] - edges[0, 1] * edges[1, 0])
    a, b, c = edges
    det = (a[0] * (b[1] * c[2] - b[2] * c[1])
           - a[1] * (b[0] * c[2] - b[2] * c[0])
           + a[2] * (b[0] * c[1] - b[1] * c[0]))
    return det / 6.0


def barycentric(simplex: Simplex, p: Point) -> np.ndarray:
    """Barycentric coordinates of ``p`` via ratios of signed measures."""
    p = as_point(p)
    if p.dims != simplex.dims:
        raise DimensionMismatch(f"point is {p.dims}D, simplex is {simplex.dims}D")
    if simplex.is_degenerate():
        raise DegenerateSimplex(f"|measure| = {abs(signed_measure(simplex)):.3g}")
    total = signed_measure(simplex)
    out = np.empty(simplex.dims + 1)
    for i in range(simplex.dims + 1):
        verts = list(simplex.vertices)
        verts[i] = p
        out[i] = signed_measure(Simplex(tuple(verts))) / total
    return out


def contains(simplex: Simplex, p: Point, eps: float = EPS_BOUNDARY) -> bool:
    """Strict-interior test: every barycentric coordinate must be >= eps.

    Vertices and edges (coordinate 0) are therefore outside.
    """
    return bool(np.all(barycentric(simplex, p) >= eps))


def contains_many(simplex: Simplex, points, eps: float = EPS_BOUNDARY) -> np.ndarray:
    """Vectorised ``contains`` over an (n, d) array of points."""
    if simplex.is_degenerate():
        raise DegenerateSimplex(f"|measure| = {abs(signed_measure(simplex)):.3g}")
    pts = np.asarray(points, dtype=np.float64).reshape(-1, simplex.dims)
    lam = _kernels.barycentric_batch(simplex.array(), pts)
    return np.all(lam >= eps, axis=1)


def shortening_witness(simplex: Simplex, p: Point, q: Point) -> Optional[int]:
    """Index of a vertex that is strictly closer to ``q`` than to ``p``.

    Moving from ``p`` to an interior point ``q`` always shortens the distance
    to at least one vertex, so for interior ``q != p`` the result is never None.
    """
    p, q = as_point(p), as_point(q)
    _same_dims(p, q, simplex.vertices[0])
    for i, v in enumerate(simplex.vertices):
        if q.distance(v) < p.distance(v):
            return i
    return None


def witness_many(simplex: Simplex, ps, qs) -> np.ndarray:
    """Vectorised ``shortening_witness``; -1 encodes "none"."""
    d = simplex.dims
    return _kernels.witness_batch(simplex.array(),
                                  np.asarray(ps, float).reshape(-1, d),
                                  np.asarray(qs, float).reshape(-1, d))


def centroid(points: Iterable[Point]) -> Point:
    arr = np.array([as_point(p).coords for p in points], dtype=np.float64)
    return Point(tuple(arr.mean(axis=0)))
