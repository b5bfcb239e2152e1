"""The numba and numpy kernel paths must agree."""

import numpy as np
import pytest

from fdr_lab import _kernels as K

numba = pytest.importorskip("numba")


def _segments(rng, n_blocks, dim):
    idx = rng.permutation(dim)
    a, b = idx[:n_blocks], idx[n_blocks:2 * n_blocks]
    pins = idx[2 * n_blocks:2 * n_blocks + 2]
    ea = np.abs(rng.standard_normal(n_blocks))
    eb = np.abs(rng.standard_normal(n_blocks))
    ea[0] = eb[0] = 0.0  # degenerate segment
    return pins.astype(np.int64), rng.standard_normal(pins.size), a.astype(np.int64), b.astype(np.int64), ea, eb


def test_segment_projection_paths_agree(rng):
    for _ in range(50):
        args = _segments(rng, 8, 20)
        y = 3 * rng.standard_normal(20)
        np.testing.assert_allclose(K.project_segments_numba(y, *args), K.project_segments_numpy(y, *args),
                                   rtol=0, atol=1e-15)


def test_drs_paths_agree(rng):
    n = 15
    A = rng.standard_normal((8, n))
    Q = 2 * A.T @ A + 0.1 * np.eye(n)
    R = np.linalg.inv(Q + np.eye(n))
    c = R @ rng.standard_normal(n)
    z0 = rng.standard_normal(n)
    a = K.drs_quadratic_l1_numba(R, c, 0.2, 1.0, z0, 500, 0.0)
    b = K.drs_quadratic_l1_numpy(R, c, 0.2, 1.0, z0, 500, 0.0)
    assert a[3] == b[3] == 500
    for u, v in zip(a[:3], b[:3]):
        np.testing.assert_allclose(u, v, rtol=1e-10, atol=1e-12)


def test_dispatch_flag_is_boolean():
    assert isinstance(K.USE_NUMBA, bool)


def test_env_flag_selects_numpy_path():
    import os
    import subprocess
    import sys

    env = dict(os.environ, FDR_LAB_NUMBA="0")
    out = subprocess.run([sys.executable, "-c", "from fdr_lab import _kernels; print(_kernels.USE_NUMBA)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "False"
