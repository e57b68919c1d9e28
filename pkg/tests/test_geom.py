import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from onewaypos.errors import DegenerateSimplex, DimensionMismatch
from onewaypos.geom import (
    EPS_BOUNDARY, Point, Simplex, barycentric, contains, contains_many, shortening_witness,
    signed_measure, witness_many,
)

from conftest import EQUILATERAL, SQ3

TRI = Simplex(EQUILATERAL)


def test_centroid_inside():
    assert contains(TRI, Point((1.0, SQ3 / 3)))


def test_far_point_outside():
    assert not contains(TRI, Point((10.0, 10.0)))


def test_vertex_excluded():
    assert not contains(TRI, Point((0.0, 0.0)))


def test_edge_midpoint_excluded():
    assert not contains(TRI, Point((1.0, 0.0)))


def test_degenerate_simplex_raises():
    with pytest.raises(DegenerateSimplex):
        contains(Simplex(((0, 0), (1, 1), (2, 2))), Point((1.0, 0.5)))


def test_dims_mismatch():
    with pytest.raises(DimensionMismatch):
        contains(TRI, Point((0.5, 0.5, 0.5)))
    with pytest.raises(DimensionMismatch):
        Simplex(((0, 0), (1, 0)))


def test_signed_measure_examples():
    assert signed_measure(Simplex(((0, 0), (1, 0), (0, 1)))) == 0.5
    assert signed_measure(Simplex(((0, 0), (1, 1), (2, 2)))) == 0.0
    assert signed_measure(Simplex(((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)))) == pytest.approx(1 / 6, abs=1e-15)


def test_tetrahedron_containment():
    tet = Simplex(((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)))
    assert contains(tet, Point((0.1, 0.1, 0.1)))
    assert not contains(tet, Point((0.5, 0.5, 0.5)))
    assert not contains(tet, Point((0.0, 0.0, 0.0)))


def test_witness_none_for_same_point():
    p = Point((5.0, 5.0))
    assert shortening_witness(TRI, p, p) is None


def test_witness_example_enumerated():
    p, q = Point((5.0, 5.0)), Point((1.0, SQ3 / 3))
    closer = [i for i, v in enumerate(TRI.vertices) if q.distance(v) < p.distance(v)]
    # all three vertices are nearer the centroid than (5, 5)
    assert closer == [0, 1, 2]
    assert shortening_witness(TRI, p, q) == closer[0]


def _parity(perm):
    inv = sum(1 for i, j in itertools.combinations(range(len(perm)), 2) if perm[i] > perm[j])
    return -1 if inv % 2 else 1


coord = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(coord, coord), min_size=4, max_size=4), st.permutations(range(3)))
def test_permutation_invariance_2d(pts, perm):
    verts, p = pts[:3], Point(pts[3])
    s = Simplex(tuple(verts))
    if s.is_degenerate():
        return
    s2 = Simplex(tuple(verts[i] for i in perm))
    assert contains(s, p) == contains(s2, p)
    assert signed_measure(s2) == pytest.approx(_parity(perm) * signed_measure(s), rel=1e-9, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(coord, coord, coord), min_size=5, max_size=5), st.permutations(range(4)))
def test_permutation_invariance_3d(pts, perm):
    verts, p = pts[:4], Point(pts[4])
    s = Simplex(tuple(verts))
    if s.is_degenerate():
        return
    s2 = Simplex(tuple(verts[i] for i in perm))
    assert contains(s, p) == contains(s2, p)
    assert signed_measure(s2) == pytest.approx(_parity(perm) * signed_measure(s), rel=1e-9, abs=1e-9)


def _rotation(rng, dims):
    q, r = np.linalg.qr(rng.normal(size=(dims, dims)))
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return q


@pytest.mark.parametrize("dims", [2, 3])
def test_rigid_motion_invariance(rng, dims):
    changed = 0
    for _ in range(2000):
        verts = rng.uniform(-10, 10, size=(dims + 1, dims))
        s = Simplex(tuple(map(tuple, verts)))
        if s.is_degenerate():
            continue
        p = rng.uniform(-10, 10, size=dims)
        # keep away from the boundary where rounding could flip the verdict
        if np.min(np.abs(barycentric(s, Point(tuple(p))) - EPS_BOUNDARY)) < 1e-6:
            continue
        R, t = _rotation(rng, dims), rng.uniform(-1e3, 1e3, dims)
        moved = Simplex(tuple(map(tuple, verts @ R.T + t)))
        changed += contains(s, Point(tuple(p))) != contains(moved, Point(tuple(R @ p + t)))
    assert changed == 0


def test_contains_many_matches_scalar(rng):
    pts = rng.uniform(-1, 3, size=(500, 2))
    fast = contains_many(TRI, pts)
    slow = np.array([contains(TRI, Point(tuple(p))) for p in pts])
    assert (fast == slow).all()


def test_witness_many_matches_scalar(rng):
    ps = rng.uniform(-5, 5, size=(300, 2))
    qs = rng.uniform(-1, 3, size=(300, 2))
    fast = witness_many(TRI, ps, qs)
    slow = [shortening_witness(TRI, Point(tuple(p)), Point(tuple(q))) for p, q in zip(ps, qs)]
    assert list(fast) == [-1 if w is None else w for w in slow]


def test_point_rejects_nonfinite():
    with pytest.raises(ValueError):
        Point((math.nan, 0.0))
    with pytest.raises(DimensionMismatch):
        Point((1.0,))


def test_sliver_at_large_scale_is_degenerate():
    # volume ~1e-9 with edges ~600: the sign is rounding noise
    s = Simplex(((302.945, 563.8125, 0.0), (0.0, 0.0, 0.0), (605.89, 1127.625, 1e-15), (1.0, 1.0, 1e-18)))
    assert s.is_degenerate()
