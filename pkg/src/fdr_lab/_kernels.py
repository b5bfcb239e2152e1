"""Hot inner loops, each with a numba and a pure-numpy implementation.

The numba path is used when numba imports and ``FDR_LAB_NUMBA`` is not set
to ``0``. Both paths are always importable (``*_numpy`` / ``*_numba``) so
tests and ``benchmarks/bench_kernels.py`` can compare them directly.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is optional
    numba = None

USE_NUMBA = numba is not None and os.environ.get("FDR_LAB_NUMBA", "1") != "0"


def _njit(fn):
    if numba is None:
        return fn
    return numba.njit(cache=True)(fn)


# -- segment-product projection ---------------------------------------------
#
# Coordinates y; pins force y[i] = v; blocks (a, b) with endpoint (ea, eb)
# project (y[a], y[b]) onto the segment [(0, 0), (ea, eb)]. Coordinates not
# mentioned pass through.


def project_segments_numpy(y, pin_idx, pin_val, blk_a, blk_b, end_a, end_b):
    out = np.array(y, dtype=float, copy=True)
    out[pin_idx] = pin_val
    if blk_a.size:
        pa = y[blk_a]
        pb = y[blk_b]
        nrm = end_a * end_a + end_b * end_b
        safe = np.where(nrm > 0.0, nrm, 1.0)
        s = np.clip((pa * end_a + pb * end_b) / safe, 0.0, 1.0)
        s = np.where(nrm > 0.0, s, 0.0)
        out[blk_a] = s * end_a
        out[blk_b] = s * end_b
    return out


def _project_segments_loop(y, pin_idx, pin_val, blk_a, blk_b, end_a, end_b):
    out = y.copy()
    for j in range(pin_idx.size):
        out[pin_idx[j]] = pin_val[j]
    for j in range(blk_a.size):
        ea = end_a[j]
        eb = end_b[j]
        nrm = ea * ea + eb * eb
        if nrm > 0.0:
            s = (y[blk_a[j]] * ea + y[blk_b[j]] * eb) / nrm
            if s < 0.0:
                s = 0.0
            elif s > 1.0:
                s = 1.0
        else:
            s = 0.0
        out[blk_a[j]] = s * ea
        out[blk_b[j]] = s * eb
    return out


project_segments_numba = _njit(_project_segments_loop)


def project_segments(y, pin_idx, pin_val, blk_a, blk_b, end_a, end_b):
    if USE_NUMBA:
        return project_segments_numba(
            np.ascontiguousarray(y, dtype=np.float64), pin_idx, pin_val, blk_a, blk_b, end_a, end_b
        )
    return project_segments_numpy(y, pin_idx, pin_val, blk_a, blk_b, end_a, end_b)


# -- fixed-step DRS for quadratic + l1 ----------------------------------------
#
# g(x) = 0.5 x'Qx - q'x, f(x) = lam*||x||_1. The caller passes the resolvent
# R = (Q + I/alpha)^{-1} and c = R q so that prox_{alpha g}(z) = c + R z / alpha.
# Returns (z, x_half, x_full, iterations, last residual).


def drs_quadratic_l1_numpy(R, c, lam, alpha, z0, max_iter, tol):
    z = np.array(z0, dtype=float, copy=True)
    t = alpha * lam
    xh = c + (R @ z) / alpha
    xf = z.copy()
    res = np.inf
    it = 0
    while it < max_iter:
        xh = c + (R @ z) / alpha
        v = 2.0 * xh - z
        xf = np.sign(v) * np.maximum(np.abs(v) - t, 0.0)
        step = xf - xh
        z = z + step
        it += 1
        res = float(np.sqrt(step @ step))
        if res < tol:
            break
    return z, xh, xf, it, res


def _drs_quadratic_l1_loop(R, c, lam, alpha, z0, max_iter, tol):
    n = z0.size
    z = z0.copy()
    xh = np.empty(n)
    xf = np.empty(n)
    t = alpha * lam
    res = np.inf
    it = 0
    while it < max_iter:
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += R[i, j] * z[j]
            xh[i] = c[i] + acc / alpha
        ss = 0.0
        for i in range(n):
            v = 2.0 * xh[i] - z[i]
            a = abs(v) - t
            if a > 0.0:
                xf[i] = a if v > 0.0 else -a
            else:
                xf[i] = 0.0
            step = xf[i] - xh[i]
            z[i] += step
            ss += step * step
        it += 1
        res = np.sqrt(ss)
        if res < tol:
            break
    return z, xh, xf, it, res


drs_quadratic_l1_numba = _njit(_drs_quadratic_l1_loop)


def drs_quadratic_l1(R, c, lam, alpha, z0, max_iter, tol):
    args = (
        np.ascontiguousarray(R, dtype=np.float64),
        np.ascontiguousarray(c, dtype=np.float64),
        float(lam),
        float(alpha),
        np.ascontiguousarray(z0, dtype=np.float64),
        int(max_iter),
        float(tol),
    )
    if USE_NUMBA:
        return drs_quadratic_l1_numba(*args)
    return drs_quadratic_l1_numpy(*args)
