import os
import subprocess
import sys

import numpy as np
import pytest

from onewaypos import _kernels as K

needs_numba = pytest.mark.skipif(not K.HAVE_NUMBA, reason="numba not installed")


@needs_numba
def test_barycentric_equivalence(rng):
    v = np.array([[0.0, 0.0], [3.0, 0.5], [1.0, 2.5]])
    pts = rng.uniform(-1, 4, size=(2000, 2))
    np.testing.assert_allclose(K.barycentric_batch_numba(v, pts), K.barycentric_batch_numpy(v, pts),
                               rtol=1e-12, atol=1e-12)
    v3 = rng.uniform(0, 1, size=(4, 3))
    p3 = rng.uniform(0, 1, size=(500, 3))
    np.testing.assert_allclose(K.barycentric_batch_numba(v3, p3), K.barycentric_batch_numpy(v3, p3),
                               rtol=1e-9, atol=1e-9)


@needs_numba
def test_witness_equivalence(rng):
    v = rng.uniform(0, 10, size=(3, 2))
    ps, qs = rng.uniform(-5, 15, size=(2, 1000, 2))
    assert (K.witness_batch_numba(v, ps, qs) == K.witness_batch_numpy(v, ps, qs)).all()


@needs_numba
def test_grid_equivalence(rng):
    S = rng.uniform(0, 20, size=(4, 2))
    b = rng.uniform(5, 15, size=4)
    xs, ys = np.linspace(0, 20, 101), np.linspace(0, 20, 91)
    np.testing.assert_allclose(K.objective_grid_numba(S, b, xs, ys), K.objective_grid_numpy(S, b, xs, ys),
                               rtol=1e-12)
    args = (S, b, np.array([0.0, 0.0]), 0.05, 401, 401, np.array([[0.0, 0.0]]), np.array([1.0]))
    assert K.grid_min_numba(*args) == pytest.approx(K.grid_min_numpy(*args), rel=1e-12)


def test_env_flag_selects_numpy():
    code = "from onewaypos import _kernels as K; print(K.USE_NUMBA, K.grid_min is K.grid_min_numpy)"
    env = dict(os.environ, ONEWAYPOS_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["False", "True"]
