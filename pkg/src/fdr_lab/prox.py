"""Proximable functions with exact prox maps.

A :class:`ProxFunction` bundles ``prox(z, gamma)`` with whatever else is
cheaply available (value, gradient, modulus). The free functions below are
the raw maps; the ``make_*`` constructors wrap them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import _kernels
from .numeric import (
    DimensionError,
    NonFiniteError,
    OrthonormalFrame,
    as_matrix,
    as_vec,
    solve_spd,
)

ProxMap = Callable[[np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class ProxFunction:
    prox: ProxMap
    value: Optional[Callable[[np.ndarray], float]] = None
    modulus: float = 0.0
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    lipschitz: Optional[float] = None
    name: str = "f"

    def __call__(self, z, gamma: float) -> np.ndarray:
        if not gamma > 0:
            raise ValueError(f"prox stepsize must be positive, got {gamma}")
        y = self.prox(np.asarray(z, dtype=float), float(gamma))
        if not np.all(np.isfinite(y)):
            raise NonFiniteError(f"prox of {self.name} returned non-finite output")
        return y

    @staticmethod
    def subgrad_witness(z, gamma: float, y) -> np.ndarray:
        """(z - y)/gamma, a subgradient at ``y`` when ``y = prox(z, gamma)``."""
        return (np.asarray(z) - np.asarray(y)) / gamma


# -- l1 ----------------------------------------------------------------------


def prox_l1(z, gamma: float, lam: float) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    t = gamma * lam
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def make_l1(lam: float) -> ProxFunction:
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    return ProxFunction(
        prox=lambda z, gamma: prox_l1(z, gamma, lam),
        value=lambda x: float(lam * np.abs(x).sum()),
        name=f"l1({lam:g})",
    )


def make_zero() -> ProxFunction:
    return ProxFunction(
        prox=lambda z, gamma: np.array(z, dtype=float, copy=True),
        value=lambda x: 0.0,
        grad=lambda x: np.zeros_like(x),
        lipschitz=0.0,
        name="zero",
    )


# -- quadratics --------------------------------------------------------------


class QuadraticProx:
    """prox of ``0.5 x'Qx - q'x`` using a cached eigendecomposition of ``Q``.

    Each stepsize then costs two dense matvecs instead of a factorization.
    """

    def __init__(self, Q, q):
        Q = as_matrix(Q, "Q")
        q = as_vec(q, "q")
        if Q.shape != (q.size, q.size):
            raise DimensionError(f"Q {Q.shape} incompatible with q of dim {q.size}")
        Q = 0.5 * (Q + Q.T)
        s, V = np.linalg.eigh(Q)
        if s[0] < -1e-12 * max(1.0, abs(s[-1])):
            raise ValueError("Q must be positive semidefinite")
        self.Q, self.q = Q, q
        self.eigvals = np.maximum(s, 0.0)
        self.V = V
        self._Vtq = V.T @ q

    def __call__(self, z, gamma: float) -> np.ndarray:
        c = 1.0 / gamma
        rhs = self._Vtq + self.V.T @ z * c
        return self.V @ (rhs / (self.eigvals + c))

    def value(self, x) -> float:
        return float(0.5 * x @ (self.Q @ x) - self.q @ x)

    def grad(self, x) -> np.ndarray:
        return self.Q @ x - self.q


def make_quadratic(Q, q, modulus: float | None = None, name: str = "quadratic") -> ProxFunction:
    qp = QuadraticProx(Q, q)
    lo, hi = float(qp.eigvals[0]), float(qp.eigvals[-1])
    if modulus is None:
        modulus = lo
    elif modulus > lo * (1 + 1e-10) + 1e-14:
        raise ValueError(f"claimed modulus {modulus} exceeds smallest eigenvalue {lo}")
    return ProxFunction(prox=qp, value=qp.value, modulus=float(modulus), grad=qp.grad, lipschitz=hi, name=name)


def make_half_sq(mu: float) -> ProxFunction:
    """(mu/2)||x||^2 in any dimension."""
    return ProxFunction(
        prox=lambda z, gamma: np.asarray(z, dtype=float) / (1.0 + gamma * mu),
        value=lambda x: float(0.5 * mu * x @ x),
        modulus=mu,
        grad=lambda x: mu * np.asarray(x, dtype=float),
        lipschitz=mu,
        name=f"half_sq({mu:g})",
    )


def prox_ridge_ls(z, gamma: float, A, b, mu: float) -> np.ndarray:
    """prox of ||Ax - b||^2 + (mu/2)||x||^2, by a fresh Cholesky solve."""
    A = as_matrix(A, "A")
    b = as_vec(b, "b")
    z = as_vec(z, "z")
    if A.shape != (b.size, z.size):
        raise DimensionError(f"A {A.shape}, b {b.size}, z {z.size}")
    M = 2.0 * A.T @ A + (mu + 1.0 / gamma) * np.eye(z.size)
    return solve_spd(M, 2.0 * A.T @ b + z / gamma)


def make_ridge_ls(A, b, mu: float) -> ProxFunction:
    """g(x) = ||Ax - b||^2 + (mu/2)||x||^2 with reported modulus ``mu``.

    The curvature contributed by ``A'A`` is deliberately not folded into the
    modulus; step schedules are parameterized by ``mu`` alone.
    """
    A = as_matrix(A, "A")
    b = as_vec(b, "b")
    Q = 2.0 * A.T @ A + mu * np.eye(A.shape[1])
    qp = QuadraticProx(Q, 2.0 * A.T @ b)

    def value(x):
        r = A @ x - b
        return float(r @ r + 0.5 * mu * x @ x)

    return ProxFunction(
        prox=qp,
        value=value,
        modulus=float(mu),
        grad=qp.grad,
        lipschitz=float(qp.eigvals[-1]),
        name="ridge_ls",
    )


# -- segment products --------------------------------------------------------


def project_segment2d(p, endpoint) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    e = np.asarray(endpoint, dtype=float)
    nrm = float(e @ e)
    if nrm == 0.0:
        return np.zeros(2)
    s = min(max(float(p @ e) / nrm, 0.0), 1.0)
    return s * e


@dataclass(frozen=True)
class SegmentProductSet:
    """Product of 2-D segments, pinned coordinates and free coordinates.

    ``blocks`` is a list of ``((i, j), (a, b))``: coordinates ``(y_i, y_j)``
    must lie on the segment from the origin to ``(a, b)``. ``pinned`` is a
    list of ``(i, value)``. ``free`` lists coordinates left unconstrained.
    Indices refer to positions in the coordinate vector.
    """

    dim: int
    blocks: Sequence[tuple[tuple[int, int], tuple[float, float]]] = ()
    pinned: Sequence[tuple[int, float]] = ()
    free: Sequence[int] = ()
    _arrays: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        used: list[int] = []
        for (i, j), (a, b) in self.blocks:
            if a < 0 or b < 0:
                raise ValueError("segment endpoints must be nonnegative")
            used += [i, j]
        used += [i for i, _ in self.pinned]
        used += list(self.free)
        if len(set(used)) != len(used):
            raise ValueError("blocks, pinned and free coordinates must be disjoint")
        if any(i < 0 or i >= self.dim for i in used):
            raise DimensionError("coordinate index out of range")
        arrays = (
            np.array([i for i, _ in self.pinned], dtype=np.int64),
            np.array([v for _, v in self.pinned], dtype=float),
            np.array([ij[0] for ij, _ in self.blocks], dtype=np.int64),
            np.array([ij[1] for ij, _ in self.blocks], dtype=np.int64),
            np.array([e[0] for _, e in self.blocks], dtype=float),
            np.array([e[1] for _, e in self.blocks], dtype=float),
        )
        object.__setattr__(self, "_arrays", arrays)

    def contains(self, y, tol: float = 1e-12) -> bool:
        y = np.asarray(y, dtype=float)
        return bool(np.linalg.norm(project_segment_product(y, self) - y) <= tol)


def project_segment_product(y, S: SegmentProductSet) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape != (S.dim,):
        raise DimensionError(f"vector of shape {y.shape} for a set in R^{S.dim}")
    return _kernels.project_segments(y, *S._arrays)


def prox_worstcase_g(z, gamma: float, C: SegmentProductSet, x0, u0, mu: float,
                     frame: OrthonormalFrame | None = None) -> np.ndarray:
    """prox of (mu/2)||x - x0||^2 + <u0, x - x0> + indicator(x0 + C).

    ``C`` is described in the coordinates of ``frame`` (standard basis when
    omitted).
    """
    y = (np.asarray(z, dtype=float) - x0 - gamma * u0) / (1.0 + gamma * mu)
    if frame is None:
        return x0 + project_segment_product(y, C)
    return x0 + frame.embed(project_segment_product(frame.coords(y), C))


def prox_worstcase_f(z, gamma: float, D: SegmentProductSet, x0, u0,
                     frame: OrthonormalFrame | None = None) -> np.ndarray:
    """prox of -<u0, x - x0> + indicator(x0 + D)."""
    y = np.asarray(z, dtype=float) - x0 + gamma * u0
    if frame is None:
        return x0 + project_segment_product(y, D)
    return x0 + frame.embed(project_segment_product(frame.coords(y), D))


# -- lifted functions --------------------------------------------------------


def _lift_parts(z, U: OrthonormalFrame, x0, u0):
    z = as_vec(z, "z")
    Um = U.columns
    if z.size != Um.shape[0]:
        raise DimensionError(f"z of dim {z.size} for a frame in R^{Um.shape[0]}")
    if np.abs(Um.T @ u0).max(initial=0.0) > 1e-12 * max(1.0, np.linalg.norm(u0)):
        raise ValueError("u0 must be orthogonal to the columns of U")
    r = z - x0
    zt = Um.T @ r
    pz = r - Um @ zt
    return Um, zt, pz


def prox_lifted_f(z, gamma: float, base: ProxFunction, U: OrthonormalFrame, x0, u0) -> np.ndarray:
    """prox of f(U'(x - x0)) - <u0, x - x0>."""
    Um, zt, pz = _lift_parts(z, U, x0, u0)
    return x0 + Um @ base(zt, gamma) + pz + gamma * u0


def prox_lifted_g(z, gamma: float, base: ProxFunction, U: OrthonormalFrame, x0, u0, mu: float) -> np.ndarray:
    """prox of g(U'(x - x0)) + <u0, x - x0> + (mu/2)||P(x - x0)||^2, P = I - UU'."""
    Um, zt, pz = _lift_parts(z, U, x0, u0)
    return x0 + Um @ base(zt, gamma) + (pz - gamma * u0) / (1.0 + gamma * mu)


def make_lifted_f(base: ProxFunction, U: OrthonormalFrame, x0, u0) -> ProxFunction:
    Um = U.columns

    def value(x):
        return base.value(Um.T @ (x - x0)) - float(u0 @ (x - x0))

    return ProxFunction(
        prox=lambda z, gamma: prox_lifted_f(z, gamma, base, U, x0, u0),
        value=value if base.value is not None else None,
        name=f"lifted({base.name})",
    )


def make_lifted_g(base: ProxFunction, U: OrthonormalFrame, x0, u0, mu: float) -> ProxFunction:
    Um = U.columns

    def value(x):
        r = x - x0
        p = r - Um @ (Um.T @ r)
        return base.value(Um.T @ r) + float(u0 @ r) + 0.5 * mu * float(p @ p)

    def grad(x):
        r = x - x0
        p = r - Um @ (Um.T @ r)
        return Um @ base.grad(Um.T @ r) + u0 + mu * p

    return ProxFunction(
        prox=lambda z, gamma: prox_lifted_g(z, gamma, base, U, x0, u0, mu),
        value=value if base.value is not None else None,
        modulus=mu,
        grad=grad if base.grad is not None else None,
        name=f"lifted({base.name})",
    )
