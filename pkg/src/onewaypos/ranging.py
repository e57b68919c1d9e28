"""One-way distance bounds and multilateration."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import DegenerateGeometry, FutureTimestamp, NoConvergence, SingularAtSolution, Underdetermined
from .geom import Point, as_point
from .timebase import TICKS_PER_SECOND, Instant

GRADIENT_TOL = 1e-9
MAX_ITERATIONS = 100
MAX_CONDITION = 1e12
_EPS4 = 4 * np.finfo(float).eps
MIN_GAIN = 0.25  # accepted steps must realise this share of the model decrease


@dataclass(frozen=True)
class RangeObservation:
    station_pos: Point
    bound: float
    station_id: bytes = b""

    def __post_init__(self):
        object.__setattr__(self, "station_pos", as_point(self.station_pos))
        if not (np.isfinite(self.bound) and self.bound >= 0):
            raise ValueError(f"range bound must be finite and >= 0, got {self.bound}")


@dataclass(frozen=True)
class Fix:
    position: Point
    error_range: float
    residuals: tuple
    iterations: int


def distance_bound(t_s: Instant, t_m: Instant, c: float) -> float:
    """Upper bound on the emitter distance: c * (t_m - t_s)."""
    dt = t_m.ticks - t_s.ticks
    if dt < 0:
        raise FutureTimestamp(f"t_s is {-dt} ps after t_m")
    return c * dt / TICKS_PER_SECOND


def _residuals_jacobian(x, stations, bounds):
    diff = x[None, :] - stations
    dist = np.sqrt(np.sum(diff * diff, axis=1))
    safe = np.where(dist > 0, dist, 1.0)
    jac = np.where(dist[:, None] > 0, diff / safe[:, None], 0.0)
    return dist - bounds, jac


def _cost_noise(r, bounds) -> float:
    # each residual carries rounding of order eps * (|x - s| + d)
    dist = r + bounds
    return float(_EPS4 * np.sum(np.abs(r) * (np.abs(dist) + bounds)) + _EPS4 * (r @ r))


def objective(x, stations, bounds) -> float:
    r, _ = _residuals_jacobian(np.asarray(x, float), np.asarray(stations, float), np.asarray(bounds, float))
    return float(r @ r)


def _condition(jtj) -> float:
    w = np.linalg.eigvalsh(jtj)
    if w[0] <= 0:
        return np.inf
    return w[-1] / w[0]


def error_range(residuals, jacobian, dims: int) -> float:
    """sqrt(sigma^2 * trace((J^T J)^-1)), sigma^2 = sum r^2 / max(1, n - dims)."""
    r = np.asarray(residuals, dtype=np.float64)
    J = np.asarray(jacobian, dtype=np.float64).reshape(len(r), dims)
    jtj = J.T @ J
    if _condition(jtj) > MAX_CONDITION:
        raise DegenerateGeometry("J^T J is singular at the solution")
    sigma2 = float(r @ r) / max(1, len(r) - dims)
    return float(np.sqrt(sigma2 * np.trace(np.linalg.inv(jtj))))


def _check_station_geometry(stations: np.ndarray, dims: int) -> None:
    centered = stations - stations.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    if sv[0] == 0 or sv[dims - 1] / sv[0] < 1e-9:
        shape = "collinear" if dims == 2 else "coplanar"
        raise DegenerateGeometry(f"station positions are {shape}")


def solve_position(obs: Sequence[RangeObservation], dims: int) -> Fix:
    """Levenberg-damped Gauss-Newton fit of sum (|x - s_i| - d_i)^2.

    Starts at the station centroid; damping is divided by ten after an
    accepted step and multiplied by ten after a rejected one.
    """
    n = len(obs)
    if n < dims + 1:
        raise Underdetermined(f"{n} observations for a {dims}D fix")
    stations = np.array([o.station_pos.coords for o in obs], dtype=np.float64)
    if stations.shape[1] != dims:
        raise ValueError(f"observations are {stations.shape[1]}D, expected {dims}D")
    bounds = np.array([o.bound for o in obs], dtype=np.float64)
    _check_station_geometry(stations, dims)

    x = stations.mean(axis=0)
    r, J = _residuals_jacobian(x, stations, bounds)
    cost = float(r @ r)
    lam = 1e-3
    eye = np.eye(dims)
    converged = False
    it = 0
    for it in range(1, MAX_ITERATIONS + 1):
        grad = J.T @ r
        if np.max(np.abs(grad)) <= GRADIENT_TOL:
            converged = True
            break
        step = np.linalg.solve(J.T @ J + lam * eye, -grad)
        x_new = x + step
        r_new, J_new = _residuals_jacobian(x_new, stations, bounds)
        cost_new = float(r_new @ r_new)
        # decrease promised by the linearised model
        predicted = -2.0 * float(grad @ step) - float(np.sum((J @ step) ** 2))
        if cost - cost_new >= MIN_GAIN * predicted and cost_new < cost:
            x, r, J, cost = x_new, r_new, J_new, cost_new
            lam /= 10.0
            continue
        lam *= 10.0
        # below the rounding noise of the residuals no step can be told apart
        if predicted <= _cost_noise(r, bounds) or np.max(np.abs(step)) <= _EPS4 * max(1.0, np.max(np.abs(x))):
            converged = True
            break
    if not converged:
        if _condition(J.T @ J) > MAX_CONDITION:
            # wandering along a flat valley: the position is undetermined there
            raise SingularAtSolution("iterate left the region where the fit is determined",
                                     Point(tuple(x)), tuple(float(v) for v in r), it)
        raise NoConvergence(f"gradient still {np.max(np.abs(J.T @ r)):.3g} after {MAX_ITERATIONS} iterations")

    residuals = tuple(float(v) for v in r)
    try:
        err = error_range(r, J, dims)
    except DegenerateGeometry as exc:
        raise SingularAtSolution(str(exc), Point(tuple(x)), residuals, it) from None
    return Fix(Point(tuple(x)), err, residuals, it)


def grid_search(obs: Sequence[RangeObservation], step: float, hull_only: bool = True):
    """Exhaustive 2D grid minimiser of the range objective.

    Serves as an independent check on ``solve_position``.  The grid covers the
    bounding box of the stations; with ``hull_only`` only points inside their
    convex hull are scored.  Returns ``(min_value, Point)``.
    """
    stations = np.array([o.station_pos.coords for o in obs], dtype=np.float64)
    if stations.shape[1] != 2:
        raise ValueError("grid_search is 2D only")
    bounds = np.array([o.bound for o in obs], dtype=np.float64)
    lo, hi = stations.min(axis=0), stations.max(axis=0)
    nx = int(np.floor((hi[0] - lo[0]) / step)) + 1
    ny = int(np.floor((hi[1] - lo[1]) / step)) + 1
    if hull_only:
        hull_a, hull_b = hull_halfplanes(stations)
    else:
        hull_a, hull_b = np.zeros((0, 2)), np.zeros(0)
    best, i, j, _ = _kernels.grid_min(stations, bounds, lo, step, nx, ny, hull_a, hull_b)
    return best, Point((lo[0] + i * step, lo[1] + j * step))


def hull_halfplanes(points: np.ndarray):
    """Half-planes ``a @ x <= b`` describing the convex hull of 2D points."""
    pts = sorted(map(tuple, np.asarray(points, float)))

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]  # counter-clockwise
    a, b = [], []
    for k in range(len(hull)):
        p, q = np.array(hull[k]), np.array(hull[(k + 1) % len(hull)])
        normal = np.array([q[1] - p[1], p[0] - q[0]])  # outward for ccw order
        a.append(normal)
        # small slack so grid points on an edge are not lost to rounding
        b.append(normal @ p + 1e-12 * np.linalg.norm(normal) * (1 + np.abs(p).max()))
    return np.array(a), np.array(b)
