"""Small composite problems whose primal-dual solution is known exactly."""

from __future__ import annotations

import numpy as np

from .algorithms import CompositeProblem
from .prox import ProxFunction, make_l1, make_quadratic, make_zero


def quadratic_l1(seed: int, dim: int = 20, mu: float = 1.0, lam: float = 1.0,
                 rank: int | None = None, support: float = 0.3) -> CompositeProblem:
    """g(x) = 0.5 x'Qx - q'x with Q = mu I + B'B, f = lam ||x||_1.

    B has ``rank`` < ``dim`` rows, so the smallest eigenvalue of Q is exactly
    ``mu``. The solution is planted: a sparse x* and a dual u* with
    u*_i = -lam sign(x*_i) on the support and |u*_i| < lam off it, then
    q = Qx* - u* makes u* = grad g(x*).
    """
    rng = np.random.default_rng(seed)
    rank = dim // 2 if rank is None else rank
    B = rng.standard_normal((rank, dim)) / np.sqrt(dim)
    Q = mu * np.eye(dim) + B.T @ B
    nnz = max(1, int(round(support * dim)))
    idx = rng.choice(dim, size=nnz, replace=False)
    x_star = np.zeros(dim)
    x_star[idx] = rng.standard_normal(nnz) + np.sign(rng.standard_normal(nnz))
    u_star = lam * rng.uniform(-0.9, 0.9, size=dim)
    u_star[idx] = -lam * np.sign(x_star[idx])
    q = Q @ x_star - u_star
    g = make_quadratic(Q, q, modulus=mu, name="quadratic")
    return CompositeProblem(make_l1(lam), g, mu, x_star, u_star)


def scalar_toy() -> CompositeProblem:
    """f = 0, g(x) = x^2/2 on the real line; x* = u* = 0, mu = 1."""
    g = make_quadratic(np.array([[1.0]]), np.zeros(1), name="half_sq")
    return CompositeProblem(make_zero(), g, 1.0, np.zeros(1), np.zeros(1))


def translated(p: CompositeProblem, shift) -> CompositeProblem:
    """The instance x -> x + shift: f_c(x) = f(x - c), g_c(x) = g(x - c)."""
    c = np.asarray(shift, dtype=float)

    def move(fn: ProxFunction) -> ProxFunction:
        return ProxFunction(
            prox=lambda z, gamma: c + fn(z - c, gamma),
            value=None if fn.value is None else (lambda x: fn.value(x - c)),
            modulus=fn.modulus,
            grad=None if fn.grad is None else (lambda x: fn.grad(x - c)),
            lipschitz=fn.lipschitz,
            name=f"{fn.name}+shift",
        )

    xs = None if p.x_star is None else p.x_star + c
    return CompositeProblem(move(p.f), move(p.g), p.mu, xs, p.u_star)
