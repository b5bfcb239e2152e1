"""Elastic-net benchmark instances and their reference solutions.

    minimize  |Ax - b|^2 + (mu/2)|x|^2 + lam |x|_1

split as g(x) = |Ax - b|^2 + (mu/2)|x|^2 (mu-strongly convex) and
f(x) = lam |x|_1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .algorithms import CompositeProblem
from .numeric import power_iteration, solve_spd
from .prox import make_l1, make_ridge_ls

KKT_TOL = 1e-9
REF_MAX_ITER = 1_000_000
REF_TOL = 1e-13


class ReferenceError(RuntimeError):
    """Reference solve did not reach the KKT tolerance."""


@dataclass
class ElasticNetInstance:
    seed: int
    A: np.ndarray
    b: np.ndarray
    x_true: np.ndarray
    mu: float
    lam: float
    x_star: np.ndarray | None = None
    u_star: np.ndarray | None = None
    ref_info: dict | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape

    def problem(self) -> CompositeProblem:
        return CompositeProblem(
            f=make_l1(self.lam),
            g=make_ridge_ls(self.A, self.b, self.mu),
            mu=self.mu,
            x_star=self.x_star,
            u_star=self.u_star,
        )

    def lipschitz(self) -> float:
        """Gradient Lipschitz constant of g, 2 sigma_max(A)^2 + mu."""
        return 2 * power_iteration(self.A.T @ self.A) + self.mu

    def objective(self, x) -> float:
        r = self.A @ x - self.b
        return float(r @ r + 0.5 * self.mu * (x @ x) + self.lam * np.abs(x).sum())


def gen_instance(seed: int, rows: int = 40, cols: int = 100, density: float = 0.1,
                 noise_sd: float = 0.01, mu: float = 1e-3, lam: float = 1e-3) -> ElasticNetInstance:
    if not 0 < density <= 1:
        raise ValueError("density must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((rows, cols))
    nnz = int(round(density * cols))
    support = rng.choice(cols, size=nnz, replace=False)
    x_true = np.zeros(cols)
    x_true[support] = rng.standard_normal(nnz)
    b = A @ x_true
    if noise_sd > 0:
        b = b + noise_sd * rng.standard_normal(rows)
    return ElasticNetInstance(seed, A, b, x_true, mu, lam)


def dual_from_primal(inst: ElasticNetInstance, x) -> np.ndarray:
    return 2 * inst.A.T @ (inst.A @ x - inst.b) + inst.mu * x


def kkt_violation(inst: ElasticNetInstance, x, u) -> float:
    """Distance of -u from lam * subdiff |.|_1 at x, worst coordinate."""
    lam = inst.lam
    on = x != 0
    viol = np.where(on, np.abs(-u - lam * np.sign(x)), np.maximum(np.abs(u) - lam, 0.0))
    return float(viol.max()) if viol.size else 0.0


def _polish(inst: ElasticNetInstance, x) -> np.ndarray | None:
    """Exact solve on the support and sign pattern of x."""
    S = np.nonzero(x)[0]
    out = np.zeros_like(x)
    if S.size:
        AS = inst.A[:, S]
        M = 2 * AS.T @ AS + inst.mu * np.eye(S.size)
        rhs = 2 * AS.T @ inst.b - inst.lam * np.sign(x[S])
        xs = solve_spd(M, rhs)
        if np.any(np.sign(xs) != np.sign(x[S])):
            return None
        out[S] = xs
    return out


def compute_reference(inst: ElasticNetInstance, max_iter: int = REF_MAX_ITER, tol: float = REF_TOL,
                      alpha: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Fixed-step DRS to (near) convergence, then a support polish; KKT-checked."""
    A, b, mu = inst.A, inst.b, inst.mu
    n = A.shape[1]
    Q = 2 * A.T @ A + mu * np.eye(n)
    R = np.linalg.inv(Q + np.eye(n) / alpha)
    R = 0.5 * (R + R.T)
    c = R @ (2 * A.T @ b)
    _, xh, xf, iters, res = _kernels.drs_quadratic_l1(R, c, inst.lam, alpha, np.zeros(n), max_iter, tol)
    candidates = [("drs_l1_point", xf), ("drs_quadratic_point", xh)]
    pol = _polish(inst, xf)
    if pol is not None:
        candidates.insert(0, ("polished", pol))
    best = None
    for name, x in candidates:
        u = dual_from_primal(inst, x)
        v = kkt_violation(inst, x, u)
        if best is None or v < best[3]:
            best = (name, x, u, v)
    name, x, u, v = best
    inst.ref_info = {"drs_iterations": int(iters), "drs_residual": float(res), "choice": name, "kkt": v}
    if not v <= KKT_TOL:
        raise ReferenceError(f"seed {inst.seed}: KKT violation {v:.3e} exceeds {KKT_TOL:g}")
    inst.x_star, inst.u_star = x, u
    return x, u
