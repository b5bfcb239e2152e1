"""Worst-case instance for prox-prox methods and the checks around it.

The instance lives in R^{2N+2} with an orthonormal frame e_{-1}, ..., e_{2N}
(array position ``i + 1`` holds coordinate ``e_i``). With t = sum t_i e_i the
two functions are

    g(x) = (mu/2)|x - x0|^2 + <u0, x - x0> + indicator(x0 + C_t)
    f(x) = -<u0, x - x0> + indicator(x0 + D_t)

where C_t pins y_{-1} = 0, y_0 = t_0 and puts (y_{2k-1}, y_{2k}) on the
segment to (t_{2k-1}, t_{2k}); D_t pins y_{-1} = 0, puts (y_{2k}, y_{2k+1})
on the segment to (t_{2k}, t_{2k+1}) and leaves y_{2N} free. Each prox call
uncovers at most one new frame coordinate, so after 2N calls a span-respecting
method cannot have touched e_{2N}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import algorithms as alg
from .algorithms import CompositeProblem, ProxCallLog, RunTrace
from .numeric import OrthonormalFrame, orthonormal_complement_basis, sq_norm
from .prox import (
    ProxFunction,
    SegmentProductSet,
    make_lifted_f,
    make_lifted_g,
    prox_lifted_f,
    prox_lifted_g,
    prox_worstcase_f,
    prox_worstcase_g,
)

IDENTITY_TOL = 1e-12
CHAIN_TOL = 1e-10
SPAN_TOL = 1e-8


class ProxBudgetExceeded(RuntimeError):
    """A method asked for more prox evaluations than its budget allows."""


def solution_coefficients(N: int, mu: float) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients (t*_0..t*_{2N}, g*_0..g*_{2N}) of the solution pair.

    All four blockwise normal-cone products vanish and
    sum t*^2 + sum g*^2 = 1.
    """
    if N < 1 or not mu > 0:
        raise ValueError("need N >= 1 and mu > 0")
    t = np.empty(2 * N + 1)
    g = np.empty(2 * N + 1)
    a = 1 + 2 * N * mu
    for k in range(N):
        t[2 * k] = np.sqrt(mu / (a * (1 + 2 * k * mu) * (1 + (2 * k + 1) * mu)))
        t[2 * k + 1] = np.sqrt(mu / (a * (1 + (2 * k + 1) * mu) * (1 + (2 * k + 2) * mu)))
        g[2 * k] = -(1 + 2 * k * mu) * t[2 * k]
        g[2 * k + 1] = (1 + (2 * k + 2) * mu) * t[2 * k + 1]
    t[2 * N] = 1 / a
    g[2 * N] = 0.0
    return t, g


def _sets(N: int, t: np.ndarray) -> tuple[SegmentProductSet, SegmentProductSet]:
    dim = 2 * N + 2
    pos = lambda i: i + 1  # noqa: E731  coordinate e_i -> array position
    C = SegmentProductSet(
        dim,
        blocks=[((pos(2 * k - 1), pos(2 * k)), (t[2 * k - 1], t[2 * k])) for k in range(1, N + 1)],
        pinned=[(pos(-1), 0.0), (pos(0), t[0])],
    )
    D = SegmentProductSet(
        dim,
        blocks=[((pos(2 * k), pos(2 * k + 1)), (t[2 * k], t[2 * k + 1])) for k in range(N)],
        pinned=[(pos(-1), 0.0)],
        free=[pos(2 * N)],
    )
    return C, D


class _Budget:
    def __init__(self, limit):
        self.limit = limit
        self.used = 0

    def tick(self):
        self.used += 1
        if self.limit is not None and self.used > self.limit:
            raise ProxBudgetExceeded(f"prox call {self.used} exceeds the budget of {self.limit}")


@dataclass
class WorstCaseInstance:
    N: int
    mu: float
    frame: OrthonormalFrame
    x0: np.ndarray
    u0: np.ndarray
    t: np.ndarray
    gstar: np.ndarray
    C: SegmentProductSet
    D: SegmentProductSet
    x_star: np.ndarray = field(init=False)
    u_star: np.ndarray = field(init=False)

    def __post_init__(self):
        self.x_star = self.x0 + self.embed(self.t)
        self.u_star = self.u0 + self.embed(self.gstar)

    @property
    def dim(self) -> int:
        return 2 * self.N + 2

    def embed(self, coeffs) -> np.ndarray:
        """Vector sum_{i>=0} coeffs[i] e_i (no e_{-1} component)."""
        return self.frame.embed(np.concatenate([[0.0], coeffs]))

    def coords(self, x) -> np.ndarray:
        """Frame coordinates of ``x - x0``; entry ``i + 1`` is along e_i."""
        return self.frame.coords(np.asarray(x, dtype=float) - self.x0)

    def prox_g(self, z, gamma: float) -> np.ndarray:
        return prox_worstcase_g(z, gamma, self.C, self.x0, self.u0, self.mu, self.frame)

    def prox_f(self, z, gamma: float) -> np.ndarray:
        return prox_worstcase_f(z, gamma, self.D, self.x0, self.u0, self.frame)

    def problem(self, budget: int | None = None) -> CompositeProblem:
        """Composite problem whose two oracles share one call counter."""
        counter = _Budget(budget)

        def counted(fn):
            def prox(z, gamma):
                counter.tick()
                return fn(z, gamma)
            return prox

        f = ProxFunction(prox=counted(self.prox_f), name="worstcase_f")
        g = ProxFunction(prox=counted(self.prox_g), modulus=self.mu, name="worstcase_g")
        return CompositeProblem(f, g, self.mu, self.x_star, self.u_star)

    @property
    def R2(self) -> float:
        return sq_norm(self.x0 - self.x_star) + sq_norm(self.u0 - self.u_star)

    @property
    def floor(self) -> float:
        return self.R2 / (1 + 4 * self.N**2 * self.mu**2 + 4 * self.N * self.mu)

    @property
    def ceiling(self) -> float:
        return self.R2 / (1 + 4 * self.N**2 * self.mu**2)


def build_worstcase(N: int, mu: float, x0=None, u0_scale: float = 0.0,
                    frame: str | OrthonormalFrame = "standard", seed: int = 0) -> WorstCaseInstance:
    """Worst-case pair for horizon ``N``; ``u0 = u0_scale * e_{-1}``."""
    if int(N) != N or N < 1:
        raise ValueError("N >= 1 required")
    dim = 2 * N + 2
    if isinstance(frame, OrthonormalFrame):
        E = frame
    elif frame == "standard":
        E = OrthonormalFrame.standard(dim)
    elif frame == "random":
        E = OrthonormalFrame.random(dim, dim, np.random.default_rng(seed))
    else:
        raise ValueError(f"unknown frame {frame!r}")
    if E.ambient_dim != dim or E.count != dim:
        raise ValueError(f"frame must be a basis of R^{dim}")
    x0 = np.zeros(dim) if x0 is None else np.asarray(x0, dtype=float)
    u0 = u0_scale * E[0]
    t, g = solution_coefficients(N, mu)
    C, D = _sets(N, t)
    return WorstCaseInstance(N, mu, E, x0, u0, t, g, C, D)


# -- coefficient and normal-cone checks ---------------------------------------


def coefficient_identities(N: int, mu: float) -> dict:
    t, g = solution_coefficients(N, mu)
    a = 1 + 2 * N * mu
    pairs = g[0:2 * N:2] ** 2 + g[1:2 * N:2] ** 2
    rep = {
        "N": N,
        "mu": mu,
        "normalization_err": abs(float(t @ t + g @ g) - 1.0),
        "pair_identity_err": float(np.abs(pairs - 2 * mu / a).max()),
        "telescoping_err": abs(float(t[:-1] @ t[:-1]) - (1 / a) * (1 - 1 / a)),
        "g_last": float(g[-1]),
        "t_last_err": abs(float(t[-1]) - 1 / a),
        "floor_identity_err": abs(float(t[-1] ** 2) - 1 / (1 + 4 * N**2 * mu**2 + 4 * N * mu)),
    }
    rep["ok"] = bool(
        max(rep["normalization_err"], rep["pair_identity_err"], rep["telescoping_err"],
            rep["t_last_err"], rep["floor_identity_err"]) <= IDENTITY_TOL and rep["g_last"] == 0.0
    )
    return rep


def verify_normal_cones(inst: WorstCaseInstance, t=None, g=None, tol: float = IDENTITY_TOL) -> dict:
    """Blockwise products whose signs encode u* in dg(x*) and -u* in df(x*)."""
    t = inst.t if t is None else np.asarray(t, dtype=float)
    g = inst.gstar if g is None else np.asarray(g, dtype=float)
    N, mu = inst.N, inst.mu
    c_prod = np.array([
        (g[2 * k + 1] - mu * t[2 * k + 1]) * t[2 * k + 1] + (g[2 * k + 2] - mu * t[2 * k + 2]) * t[2 * k + 2]
        for k in range(N)
    ])
    d_prod = np.array([g[2 * k] * t[2 * k] + g[2 * k + 1] * t[2 * k + 1] for k in range(N)])
    rep = {
        "c_products": c_prod.tolist(),
        "d_products": d_prod.tolist(),
        "g_last": float(g[2 * N]),
        "inclusions_hold": bool(np.all(c_prod >= -tol) and np.all(d_prod <= tol) and abs(g[2 * N]) <= tol),
        "max_abs_product": float(max(np.abs(c_prod).max(), np.abs(d_prod).max())),
    }
    rep["equalities_hold"] = rep["max_abs_product"] <= tol and abs(g[2 * N]) <= tol
    return rep


# -- zero chain ---------------------------------------------------------------


def _leak(coords: np.ndarray, k: int) -> float:
    """Largest |coordinate| along e_{k+1}, ..., e_{2N}."""
    tail = coords[k + 2:]
    return float(np.abs(tail).max()) if tail.size else 0.0


def _top_index(coords: np.ndarray, tol: float) -> int:
    """Highest frame index i with a non-negligible coordinate (-1 if none past e_{-1})."""
    scale = max(1.0, float(np.abs(coords).max(initial=0.0)))
    nz = np.nonzero(np.abs(coords[1:]) > tol * scale)[0]
    return int(nz[-1]) if nz.size else -1


def check_zero_chain(inst: WorstCaseInstance, k: int, z, gamma: float, tol: float = CHAIN_TOL) -> dict:
    """Both prox outputs at z in x0 + S_k must lie in x0 + S_{k+1}."""
    if not -1 <= k <= 2 * inst.N:
        raise ValueError(f"k must be in -1..{2 * inst.N}")
    c = inst.coords(z)
    scale = max(1.0, float(np.abs(c).max()))
    if _leak(c, k) > tol * scale:
        raise ValueError(f"query is not in x0 + S_{k}")
    nxt = min(k + 1, 2 * inst.N)
    lf = _leak(inst.coords(inst.prox_f(z, gamma)), nxt)
    lg = _leak(inst.coords(inst.prox_g(z, gamma)), nxt)
    return {"k": k, "gamma": gamma, "leak_f": lf, "leak_g": lg, "ok": max(lf, lg) <= tol * scale}


def trajectory_chain_ok(inst: WorstCaseInstance, log: ProxCallLog, x_final, tol: float = CHAIN_TOL) -> bool:
    """Every call reveals at most one new coordinate; the output avoids e_{2N}."""
    revealed = -1
    for call in log:
        top_z = _top_index(inst.coords(call.z), tol)
        top_y = _top_index(inst.coords(call.y), tol)
        if top_y > max(top_z, revealed) + 1:
            return False
        revealed = max(revealed, top_z, top_y)
    return _top_index(inst.coords(x_final), tol) <= 2 * inst.N - 1


# -- span / zero-respecting conditions ---------------------------------------


class _Span:
    """Incrementally maintained orthonormal basis for a span of vectors."""

    def __init__(self, dim: int):
        self.Q = np.zeros((dim, 0))

    def residual(self, v) -> float:
        r = v.copy()
        for _ in range(2):
            r = r - self.Q @ (self.Q.T @ r)
        return float(np.linalg.norm(r))

    def add(self, v, rel: float = 1e-12):
        nv = float(np.linalg.norm(v))
        if nv == 0.0:
            return
        r = v.copy()
        for _ in range(2):
            r = r - self.Q @ (self.Q.T @ r)
        nr = float(np.linalg.norm(r))
        if nr > rel * nv:
            self.Q = np.column_stack([self.Q, r / nr])


def check_span_condition(log: ProxCallLog, x0, u0, x_final, tol: float = SPAN_TOL) -> dict:
    """z_i in x0 + span{u0, d_0..d_{i-1}} for each query and x_final likewise."""
    x0 = np.asarray(x0, dtype=float)
    span = _Span(x0.size)
    span.add(np.asarray(u0, dtype=float))
    residuals = []
    for call in log:
        residuals.append(span.residual(call.z - x0) / (1 + np.linalg.norm(call.z)))
        span.add(call.d)
    xf = np.asarray(x_final, dtype=float)
    final_res = span.residual(xf - x0) / (1 + np.linalg.norm(xf))
    worst = max(residuals + [final_res])
    return {
        "n_queries": len(residuals),
        "residuals": residuals,
        "final_residual": final_res,
        "max_residual": worst,
        "ok": bool(worst <= tol),
    }


def check_zero_respecting(inst: WorstCaseInstance, log: ProxCallLog, x_final, tol: float = CHAIN_TOL) -> dict:
    """supp(z_i) within the union of supp(d_0..d_{i-1}), supports in frame coordinates."""
    seen = np.zeros(inst.dim, dtype=bool)
    bad = []

    def supp(v):
        c = inst.frame.coords(v)
        scale = max(1.0, float(np.abs(c).max(initial=0.0)))
        return np.abs(c) > tol * scale

    for i, call in enumerate(log):
        if np.any(supp(call.z) & ~seen):
            bad.append(i)
        seen |= supp(call.d)
    final_ok = not np.any(supp(np.asarray(x_final, dtype=float)) & ~seen)
    return {"violations": bad, "final_ok": final_ok, "ok": not bad and final_ok}


# -- experiment ---------------------------------------------------------------


def run_budgeted(method: str, inst: WorstCaseInstance) -> RunTrace:
    """Run ``method`` on the instance within its 2N prox-call budget."""
    if method not in alg.PROX_PROX_METHODS:
        raise ValueError(f"{method!r} is not a prox-prox method; choose from {alg.PROX_PROX_METHODS}")
    budget = 2 * inst.N
    p = inst.problem(budget=budget)
    trace = alg.run(method, p, inst.x0, inst.u0, inst.N)
    if len(trace.calls) != budget:
        raise ProxBudgetExceeded(f"{method} used {len(trace.calls)} prox calls, expected {budget}")
    return trace


def lowerbound_experiment(method: str, N: int, mu: float, *, x0=None, u0_scale: float = 0.0,
                          frame: str = "standard", seed: int = 0) -> dict:
    inst = build_worstcase(N, mu, x0=x0, u0_scale=u0_scale, frame=frame, seed=seed)
    trace = run_budgeted(method, inst)
    achieved = sq_norm(trace.final - inst.x_star)
    span = check_span_condition(trace.calls, inst.x0, inst.u0, trace.final)
    return {
        "N": N,
        "mu": mu,
        "method": method,
        "achieved": achieved,
        "floor": inst.floor,
        "ceiling": inst.ceiling,
        "span_ok": bool(span["ok"]),
        "chain_ok": trajectory_chain_ok(inst, trace.calls, trace.final),
    }


# -- lifted functions ---------------------------------------------------------


def lifted_identity_suite(base_f: ProxFunction, base_g: ProxFunction, d_prime: int, *, d: int,
                          mu: float | None = None, n_samples: int = 100, seed: int = 0) -> dict:
    """Check the lifted prox formulas and their projected-residual identities.

    A random U (d' x d, orthonormal columns), x0, and u0 orthogonal to U are
    drawn; then for random (z, gamma) both ``U'(z - prox_lifted(z))`` and
    the full residual are compared against the base prox. The strong
    convexity inequality of the lifted g is spot-checked at prox points,
    using the prox residual as subgradient.
    """
    if d_prime < d + 2:
        raise ValueError("d_prime must be at least d + 2")
    mu = base_g.modulus if mu is None else mu
    rng = np.random.default_rng(seed)
    U = OrthonormalFrame.random(d_prime, d, rng)
    comp = orthonormal_complement_basis(U, d_prime - d)
    u0 = sum((rng.standard_normal() * v for v in comp), np.zeros(d_prime))
    x0 = rng.standard_normal(d_prime)
    Um = U.columns
    gU = make_lifted_g(base_g, U, x0, u0, mu)
    err_f = err_g = full_f = full_g = 0.0
    sc_min = np.inf
    pts = []
    for _ in range(n_samples):
        z = 3 * rng.standard_normal(d_prime)
        gamma = float(np.exp(rng.uniform(np.log(0.1), np.log(10.0))))
        zt = Um.T @ (z - x0)
        pz = (z - x0) - Um @ zt
        pf = prox_lifted_f(z, gamma, base_f, U, x0, u0)
        pg = prox_lifted_g(z, gamma, base_g, U, x0, u0, mu)
        bf = zt - base_f(zt, gamma)
        bg = zt - base_g(zt, gamma)
        err_f = max(err_f, float(np.abs(Um.T @ (z - pf) - bf).max()))
        err_g = max(err_g, float(np.abs(Um.T @ (z - pg) - bg).max()))
        full_f = max(full_f, float(np.abs((z - pf) - (Um @ bf - gamma * u0)).max()))
        full_g = max(full_g, float(np.abs(
            (z - pg) - (Um @ bg + gamma * mu / (1 + gamma * mu) * pz + gamma / (1 + gamma * mu) * u0)).max()))
        pts.append((pg, (z - pg) / gamma))
    if gU.value is not None:
        for i in range(n_samples):
            x, v = pts[i]
            y, _ = pts[(i + 1) % n_samples]
            gap = gU.value(y) - gU.value(x) - float(v @ (y - x)) - 0.5 * mu * sq_norm(y - x)
            scale = max(1.0, abs(gU.value(y)), abs(gU.value(x)))
            sc_min = min(sc_min, gap / scale)
    rep = {
        "d": d,
        "d_prime": d_prime,
        "samples": n_samples,
        "max_err_f": err_f,
        "max_err_g": err_g,
        "max_full_residual_err_f": full_f,
        "max_full_residual_err_g": full_g,
        "strong_convexity_min_gap": None if sc_min == np.inf else float(sc_min),
        "u0_orthogonality": float(np.abs(Um.T @ u0).max()),
    }
    rep["ok"] = bool(max(err_f, err_g) <= 1e-10 and (sc_min == np.inf or sc_min >= -1e-10))
    return rep


__all__ = [
    "ProxBudgetExceeded",
    "WorstCaseInstance",
    "build_worstcase",
    "check_span_condition",
    "check_zero_chain",
    "check_zero_respecting",
    "coefficient_identities",
    "solution_coefficients",
    "lifted_identity_suite",
    "lowerbound_experiment",
    "make_lifted_f",
    "run_budgeted",
    "trajectory_chain_ok",
    "verify_normal_cones",
]
