"""Hot numeric loops.

Every kernel exists twice: a numba ``@njit`` version and a plain numpy
version with identical semantics.  The exported name points at the numba
build unless numba is missing or ``ONEWAYPOS_DISABLE_NUMBA=1`` is set.
``benchmarks/bench_kernels.py`` times both.
"""
from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("ONEWAYPOS_DISABLE_NUMBA", "0") not in ("1", "true", "yes")


# ---------------------------------------------------------------- barycentric


def _det2(ax, ay, bx, by):
    return ax * by - ay * bx


def _det3(a0, a1, a2, b0, b1, b2, c0, c1, c2):
    return a0 * (b1 * c2 - b2 * c1) - a1 * (b0 * c2 - b2 * c0) + a2 * (b0 * c1 - b1 * c0)


def barycentric_batch_numpy(vertices, points):
    """Barycentric coordinates of each row of ``points`` w.r.t. ``vertices``.

    ``vertices`` is (d+1, d), ``points`` is (n, d).  Each coordinate is the
    signed measure of the simplex with that vertex swapped for the point,
    divided by the measure of the original simplex.
    """
    v = np.asarray(vertices, dtype=np.float64)
    p = np.asarray(points, dtype=np.float64)
    d = v.shape[1]
    out = np.empty((p.shape[0], d + 1))
    if d == 2:
        a, b, c = v
        total = _det2(b[0] - a[0], b[1] - a[1], c[0] - a[0], c[1] - a[1])
        x, y = p[:, 0], p[:, 1]
        out[:, 0] = _det2(b[0] - x, b[1] - y, c[0] - x, c[1] - y) / total
        out[:, 1] = _det2(x - a[0], y - a[1], c[0] - a[0], c[1] - a[1]) / total
        out[:, 2] = _det2(b[0] - a[0], b[1] - a[1], x - a[0], y - a[1]) / total
    else:
        a, b, c, e = v

        def vol(p0, p1, p2, p3):
            return _det3(
                p1[..., 0] - p0[..., 0], p1[..., 1] - p0[..., 1], p1[..., 2] - p0[..., 2],
                p2[..., 0] - p0[..., 0], p2[..., 1] - p0[..., 1], p2[..., 2] - p0[..., 2],
                p3[..., 0] - p0[..., 0], p3[..., 1] - p0[..., 1], p3[..., 2] - p0[..., 2],
            )

        total = vol(a, b, c, e)
        out[:, 0] = vol(p, b, c, e) / total
        out[:, 1] = vol(a, p, c, e) / total
        out[:, 2] = vol(a, b, p, e) / total
        out[:, 3] = vol(a, b, c, p) / total
    return out


def _barycentric_batch_loop(v, p):
    n = p.shape[0]
    d = v.shape[1]
    out = np.empty((n, d + 1))
    if d == 2:
        ax, ay = v[0, 0], v[0, 1]
        bx, by = v[1, 0], v[1, 1]
        cx, cy = v[2, 0], v[2, 1]
        total = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
        for i in range(n):
            x = p[i, 0]
            y = p[i, 1]
            out[i, 0] = ((bx - x) * (cy - y) - (by - y) * (cx - x)) / total
            out[i, 1] = ((x - ax) * (cy - ay) - (y - ay) * (cx - ax)) / total
            out[i, 2] = ((bx - ax) * (y - ay) - (by - ay) * (x - ax)) / total
    else:
        q = np.empty((4, 3))
        total = _vol_rows(v[0], v[1], v[2], v[3])
        for i in range(n):
            for k in range(4):
                for j in range(4):
                    for m in range(3):
                        q[j, m] = v[j, m]
                for m in range(3):
                    q[k, m] = p[i, m]
                out[i, k] = _vol_rows(q[0], q[1], q[2], q[3]) / total
    return out


def _vol_rows(p0, p1, p2, p3):
    a0 = p1[0] - p0[0]
    a1 = p1[1] - p0[1]
    a2 = p1[2] - p0[2]
    b0 = p2[0] - p0[0]
    b1 = p2[1] - p0[1]
    b2 = p2[2] - p0[2]
    c0 = p3[0] - p0[0]
    c1 = p3[1] - p0[1]
    c2 = p3[2] - p0[2]
    return a0 * (b1 * c2 - b2 * c1) - a1 * (b0 * c2 - b2 * c0) + a2 * (b0 * c1 - b1 * c0)


# ------------------------------------------------------ shortening witnesses


def witness_batch_numpy(vertices, ps, qs):
    """For each pair (p, q), the first vertex index strictly closer to q than
    to p, or -1 when no such vertex exists."""
    v = np.asarray(vertices, dtype=np.float64)
    ps = np.asarray(ps, dtype=np.float64)
    qs = np.asarray(qs, dtype=np.float64)
    dq = np.linalg.norm(qs[:, None, :] - v[None, :, :], axis=2)
    dp = np.linalg.norm(ps[:, None, :] - v[None, :, :], axis=2)
    closer = dq < dp
    return np.where(closer.any(axis=1), closer.argmax(axis=1), -1).astype(np.int64)


def _witness_batch_loop(v, ps, qs):
    n = ps.shape[0]
    k = v.shape[0]
    d = v.shape[1]
    out = np.full(n, -1, dtype=np.int64)
    for i in range(n):
        for j in range(k):
            sq = 0.0
            sp = 0.0
            for m in range(d):
                tq = qs[i, m] - v[j, m]
                tp = ps[i, m] - v[j, m]
                sq += tq * tq
                sp += tp * tp
            if np.sqrt(sq) < np.sqrt(sp):
                out[i] = j
                break
    return out


# ------------------------------------------------------- range objective grid


def grid_min_numpy(stations, bounds, origin, step, nx, ny, hull_a, hull_b, chunk=256):
    """Brute-force minimum of sum_i (|x - s_i| - b_i)^2 over a 2D grid.

    Grid points are ``origin + (ix*step, iy*step)`` for ix < nx, iy < ny.
    Only points with ``hull_a @ x <= hull_b`` (all rows) are considered.
    Returns ``(min_value, ix, iy, n_points_evaluated)``.
    """
    s = np.asarray(stations, dtype=np.float64)
    b = np.asarray(bounds, dtype=np.float64)
    best, bi, bj, count = np.inf, -1, -1, 0
    ys = origin[1] + np.arange(ny) * step
    for i0 in range(0, nx, chunk):
        xs = origin[0] + np.arange(i0, min(nx, i0 + chunk)) * step
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        mask = np.ones(X.shape, dtype=bool)
        for row in range(hull_a.shape[0]):
            mask &= hull_a[row, 0] * X + hull_a[row, 1] * Y <= hull_b[row]
        f = np.zeros(X.shape)
        for k in range(s.shape[0]):
            r = np.sqrt((X - s[k, 0]) ** 2 + (Y - s[k, 1]) ** 2) - b[k]
            f += r * r
        f = np.where(mask, f, np.inf)
        count += int(mask.sum())
        flat = int(np.argmin(f))
        if f.flat[flat] < best:
            best = float(f.flat[flat])
            bi, bj = np.unravel_index(flat, f.shape)
            bi += i0
    return best, int(bi), int(bj), count


def _grid_min_loop(s, b, origin, step, nx, ny, hull_a, hull_b):
    best = np.inf
    bi = -1
    bj = -1
    count = 0
    ns = s.shape[0]
    nh = hull_a.shape[0]
    for i in range(nx):
        x = origin[0] + i * step
        for j in range(ny):
            y = origin[1] + j * step
            inside = True
            for h in range(nh):
                if hull_a[h, 0] * x + hull_a[h, 1] * y > hull_b[h]:
                    inside = False
                    break
            if not inside:
                continue
            count += 1
            f = 0.0
            for k in range(ns):
                dx = x - s[k, 0]
                dy = y - s[k, 1]
                r = np.sqrt(dx * dx + dy * dy) - b[k]
                f += r * r
            if f < best:
                best = f
                bi = i
                bj = j
    return best, bi, bj, count


def objective_grid_numpy(stations, bounds, xs, ys):
    """Full objective surface on the tensor grid ``xs`` x ``ys``."""
    s = np.asarray(stations, dtype=np.float64)
    X, Y = np.meshgrid(np.asarray(xs, float), np.asarray(ys, float), indexing="ij")
    f = np.zeros(X.shape)
    for k in range(s.shape[0]):
        r = np.hypot(X - s[k, 0], Y - s[k, 1]) - bounds[k]
        f += r * r
    return f


def _objective_grid_loop(s, b, xs, ys):
    out = np.empty((xs.shape[0], ys.shape[0]))
    for i in range(xs.shape[0]):
        for j in range(ys.shape[0]):
            f = 0.0
            for k in range(s.shape[0]):
                dx = xs[i] - s[k, 0]
                dy = ys[j] - s[k, 1]
                r = np.sqrt(dx * dx + dy * dy) - b[k]
                f += r * r
            out[i, j] = f
    return out


if HAVE_NUMBA:
    _vol_rows = njit(cache=True)(_vol_rows)
    _barycentric_jit = njit(cache=True)(_barycentric_batch_loop)
    _witness_jit = njit(cache=True)(_witness_batch_loop)
    _grid_min_jit = njit(cache=True)(_grid_min_loop)
    _objective_grid_jit = njit(cache=True)(_objective_grid_loop)

    def barycentric_batch_numba(vertices, points):
        return _barycentric_jit(np.ascontiguousarray(vertices, dtype=np.float64),
                                np.ascontiguousarray(points, dtype=np.float64))

    def witness_batch_numba(vertices, ps, qs):
        return _witness_jit(np.ascontiguousarray(vertices, dtype=np.float64),
                            np.ascontiguousarray(ps, dtype=np.float64),
                            np.ascontiguousarray(qs, dtype=np.float64))

    def grid_min_numba(stations, bounds, origin, step, nx, ny, hull_a, hull_b):
        best, bi, bj, count = _grid_min_jit(
            np.ascontiguousarray(stations, dtype=np.float64),
            np.ascontiguousarray(bounds, dtype=np.float64),
            np.asarray(origin, dtype=np.float64), float(step), int(nx), int(ny),
            np.ascontiguousarray(hull_a, dtype=np.float64).reshape(-1, 2),
            np.ascontiguousarray(hull_b, dtype=np.float64).reshape(-1),
        )
        return float(best), int(bi), int(bj), int(count)

    def objective_grid_numba(stations, bounds, xs, ys):
        return _objective_grid_jit(np.ascontiguousarray(stations, dtype=np.float64),
                                   np.ascontiguousarray(bounds, dtype=np.float64),
                                   np.ascontiguousarray(xs, dtype=np.float64),
                                   np.ascontiguousarray(ys, dtype=np.float64))
else:  # pragma: no cover
    barycentric_batch_numba = barycentric_batch_numpy
    witness_batch_numba = witness_batch_numpy
    grid_min_numba = grid_min_numpy
    objective_grid_numba = objective_grid_numpy


if USE_NUMBA:
    barycentric_batch = barycentric_batch_numba
    witness_batch = witness_batch_numba
    grid_min = grid_min_numba
    objective_grid = objective_grid_numba
else:
    barycentric_batch = barycentric_batch_numpy
    witness_batch = witness_batch_numpy
    grid_min = grid_min_numpy
    objective_grid = objective_grid_numpy
