"""Splitting methods for ``minimize f(x) + g(x)`` with ``g`` strongly convex.

Every runner returns a :class:`RunTrace` holding all named iterates, the
primal output after each iteration and a log of every prox call. Each
iteration of FDR, DRS, PRS, OHM, CP and DYS makes exactly two prox calls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .numeric import NonFiniteError, as_vec, sq_norm
from .prox import ProxFunction

ALGORITHMS = ("fdr", "drs", "prs", "ohm", "cp", "dys", "fista")
PROX_PROX_METHODS = ("fdr", "drs", "prs", "ohm", "cp", "dys")


@dataclass(frozen=True)
class CompositeProblem:
    f: ProxFunction
    g: ProxFunction
    mu: float
    x_star: Optional[np.ndarray] = None
    u_star: Optional[np.ndarray] = None

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if self.g.modulus < self.mu * (1 - 1e-12):
            raise ValueError(f"g has modulus {self.g.modulus} < mu = {self.mu}")
        if (self.x_star is None) != (self.u_star is None):
            raise ValueError("give both x_star and u_star or neither")

    @property
    def has_solution(self) -> bool:
        return self.x_star is not None

    def objective(self, x) -> float:
        if self.f.value is None or self.g.value is None:
            raise ValueError("objective needs value oracles for f and g")
        return self.f.value(x) + self.g.value(x)


@dataclass(frozen=True)
class ProxCall:
    z: np.ndarray
    which: str  # "f" or "g"
    gamma: float
    y: np.ndarray

    @property
    def d(self) -> np.ndarray:
        return self.z - self.y


@dataclass
class ProxCallLog:
    calls: list = field(default_factory=list)

    def __len__(self):
        return len(self.calls)

    def __iter__(self):
        return iter(self.calls)

    def __getitem__(self, i):
        return self.calls[i]

    def count(self, which: str) -> int:
        return sum(1 for c in self.calls if c.which == which)


class _Oracle:
    """Routes prox calls to the problem and records them."""

    def __init__(self, problem: CompositeProblem):
        self.problem = problem
        self.log = ProxCallLog()

    def __call__(self, which: str, z: np.ndarray, gamma: float) -> np.ndarray:
        fn = self.problem.f if which == "f" else self.problem.g
        y = fn(z, gamma)
        if y.shape != z.shape:
            raise ValueError(f"prox of {fn.name} changed shape {z.shape} -> {y.shape}")
        self.log.calls.append(ProxCall(z.copy(), which, float(gamma), y.copy()))
        return y


@dataclass
class RunTrace:
    """Everything one run produced.

    ``iterates`` maps names (``"x"``, ``"w"``, ``"y"``, ...) to stacked
    arrays. ``outputs[k]`` is the primal point reported after ``k``
    iterations (``outputs[0]`` the starting point). ``sq_dist[k]`` is
    ``||outputs[k] - x_star||^2`` when the problem carries a solution.
    """

    algorithm: str
    n_iters: int
    iterates: dict
    outputs: np.ndarray
    calls: ProxCallLog
    metadata: dict = field(default_factory=dict)
    sq_dist: Optional[np.ndarray] = None

    def __getitem__(self, name: str) -> np.ndarray:
        return self.iterates[name]

    @property
    def final(self) -> np.ndarray:
        return self.outputs[-1]


def _finish(algorithm, N, iterates, outputs, oracle, problem, metadata) -> RunTrace:
    its = {k: np.array(v, dtype=float) for k, v in iterates.items()}
    out = np.array(outputs, dtype=float)
    for name, arr in its.items():
        if not np.all(np.isfinite(arr)):
            raise NonFiniteError(f"{algorithm}: non-finite {name} iterate")
    sq = None
    if problem.has_solution:
        diff = out - problem.x_star
        sq = np.einsum("ij,ij->i", diff, diff)
    metadata.setdefault("mu", problem.mu)
    return RunTrace(algorithm, N, its, out, oracle.log, metadata, sq)


def _check_n(N: int):
    if int(N) != N or N < 1:
        raise ValueError(f"N >= 1 required, got {N}")


# -- step schedules ----------------------------------------------------------


@dataclass(frozen=True)
class StepSchedule:
    kind: str
    values: dict

    def validate(self, mu: float | None = None, N: int | None = None, rtol: float = 1e-12) -> None:
        v = self.values
        if self.kind == "fdr":
            eta = v["eta"]
            if not (np.all(eta > 0) and np.all(np.diff(eta) < 0)):
                raise ValueError("FDR stepsizes must be positive and strictly decreasing")
            if mu is not None and N is not None:
                k = np.arange(eta.size)
                prod = eta * (1 + 4 * k * N * mu**2)
                if np.abs(prod - 2 * N * mu).max() > rtol * 2 * N * mu:
                    raise ValueError("eta_k (1 + 4kN mu^2) != 2N mu")
        elif self.kind == "dys":
            g = v["gamma"]
            if mu is not None and np.abs(g[1:] - g[:-1] / np.sqrt(1 + 2 * g[:-1] * mu)).max() > rtol * g[0]:
                raise ValueError("DYS stepsize recursion violated")
        elif self.kind == "cp":
            tau, sigma, theta = v["tau"], v["sigma"], v["theta"]
            if tau[0] * sigma[0] > 1 + rtol:
                raise ValueError("tau0 * sigma0 must be <= 1")
            if mu is not None and np.abs(theta - 1 / np.sqrt(1 + 2 * mu * tau[: theta.size])).max() > rtol:
                raise ValueError("theta_k = 1/sqrt(1 + 2 mu tau_k) violated")
        elif self.kind == "fista":
            t = v["t"]
            if t[0] != 1 or np.abs(t[1:] - (1 + np.sqrt(1 + 4 * t[:-1] ** 2)) / 2).max() > rtol * t[-1]:
                raise ValueError("FISTA momentum recursion violated")
        elif self.kind == "constant":
            if not v["alpha"] > 0:
                raise ValueError("constant stepsize must be positive")
        else:
            raise ValueError(f"unknown schedule kind {self.kind!r}")


def fdr_schedule(N: int, mu: float) -> StepSchedule:
    k = np.arange(N + 1, dtype=float)
    return StepSchedule("fdr", {"eta": 2 * N * mu / (1 + 4 * k * N * mu**2)})


def constant_schedule(alpha: float, N: int) -> StepSchedule:
    return StepSchedule("constant", {"alpha": float(alpha), "eta": np.full(N + 1, float(alpha))})


def dys_schedule(gamma0: float, mu: float, n: int) -> StepSchedule:
    g = np.empty(n + 1)
    g[0] = gamma0
    for k in range(n):
        g[k + 1] = g[k] / math.sqrt(1 + 2 * g[k] * mu)
    return StepSchedule("dys", {"gamma": g})


def cp_schedule(tau0: float, sigma0: float, mu: float, n: int) -> StepSchedule:
    tau = np.empty(n + 1)
    sigma = np.empty(n + 1)
    theta = np.empty(n)
    tau[0], sigma[0] = tau0, sigma0
    for k in range(n):
        theta[k] = 1 / math.sqrt(1 + 2 * mu * tau[k])
        tau[k + 1] = theta[k] * tau[k]
        sigma[k + 1] = sigma[k] / theta[k]
    return StepSchedule("cp", {"tau": tau, "sigma": sigma, "theta": theta})


def fista_schedule(n: int) -> StepSchedule:
    t = np.empty(n + 1)
    t[0] = 1.0
    for k in range(n):
        t[k + 1] = (1 + math.sqrt(1 + 4 * t[k] ** 2)) / 2
    return StepSchedule("fista", {"t": t})


# -- FDR ---------------------------------------------------------------------


def run_fdr(p: CompositeProblem, x0, u0=None, N: int = 1, schedule: StepSchedule | None = None) -> RunTrace:
    """Fast Douglas-Rachford splitting for a fixed horizon ``N``.

    Iterates (k = 0..N-1, with w_0 = x_0 - eta_0 u_0)::

        y_{k+1} = prox_{eta_k g}(2 x_k - w_k)
        w_{k+1} = (1 + eta_{k+1}/eta_k) y_{k+1} - (eta_{k+1}/eta_k)(2 x_k - w_k)
        x_{k+1} = prox_{eta_{k+1} f}(w_{k+1})

    with eta_k = 2N mu / (1 + 4kN mu^2). Passing ``schedule`` overrides the
    stepsizes (e.g. a constant schedule, which yields Peaceman-Rachford).

    The trace stores rows ``x[0..N]``, ``w[0..N]``, ``y[0..N-1]`` (row ``j``
    holds ``y_{j+1}``), and the prox-residual subgradients
    ``fgrad[j] = (w_j - x_j)/eta_j`` for j >= 1 (row 0 is ``-u_0``) and
    ``ggrad[j] = (2x_j - w_j - y_{j+1})/eta_j``.
    """
    _check_n(N)
    x0 = as_vec(x0, "x0")
    u0_given = u0 is not None
    u0 = np.zeros_like(x0) if u0 is None else as_vec(u0, "u0")
    sched = fdr_schedule(N, p.mu) if schedule is None else schedule
    eta = np.asarray(sched.values["eta"], dtype=float)
    if eta.size < N + 1:
        raise ValueError(f"schedule has {eta.size} stepsizes, need {N + 1}")
    oracle = _Oracle(p)

    x, w = x0.copy(), x0 - eta[0] * u0
    xs, ws, ys = [x], [w], []
    fgrad, ggrad = [-u0], []
    for k in range(N):
        v = 2 * x - w
        y = oracle("g", v, eta[k])
        ratio = eta[k + 1] / eta[k]
        w = (1 + ratio) * y - ratio * v
        x = oracle("f", w, eta[k + 1])
        ggrad.append((v - y) / eta[k])
        fgrad.append((w - x) / eta[k + 1])
        xs.append(x)
        ws.append(w)
        ys.append(y)
    meta = {"schedule": sched.kind, "eta": eta[: N + 1].tolist(), "u0_defaulted": not u0_given}
    its = {"x": xs, "w": ws, "y": ys, "fgrad": fgrad, "ggrad": ggrad, "u0": [u0]}
    return _finish("fdr", N, its, xs, oracle, p, meta)


# -- DRS / PRS / OHM ---------------------------------------------------------


def run_drs(p: CompositeProblem, z0, alpha: float = 1.0, N: int = 1) -> RunTrace:
    """Douglas-Rachford: x_{k+1/2} = prox_g(z_k), x_{k+1} = prox_f(2x_{k+1/2} - z_k),
    z_{k+1} = z_k + x_{k+1} - x_{k+1/2}. Output after k iterations is x_k.
    """
    _check_n(N)
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    z = as_vec(z0, "z0").copy()
    oracle = _Oracle(p)
    zs, halves, fulls = [z], [], []
    outputs = [z.copy()]
    for _ in range(N):
        xh = oracle("g", z, alpha)
        xf = oracle("f", 2 * xh - z, alpha)
        z = z + xf - xh
        zs.append(z)
        halves.append(xh)
        fulls.append(xf)
        outputs.append(xf)
    meta = {"alpha": alpha, "output": "x_{k+1} = prox_f(2 x_{k+1/2} - z_k); outputs[0] = z_0"}
    its = {"z": zs, "x_half": halves, "x": fulls}
    return _finish("drs", N, its, outputs, oracle, p, meta)


def run_prs(p: CompositeProblem, z0, alpha: float = 1.0, N: int = 1) -> RunTrace:
    """Peaceman-Rachford z_{k+1} = (2prox_{alpha g} - I)(2prox_{alpha f} - I) z_k.

    Per iteration: x_k = prox_f(z_k), y_{k+1} = prox_g(2x_k - z_k),
    z_{k+1} = z_k + 2(y_{k+1} - x_k). The output after k iterations is the
    latest g-prox point y_k.
    """
    _check_n(N)
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    z = as_vec(z0, "z0").copy()
    oracle = _Oracle(p)
    zs, xs, ys = [z], [], []
    outputs = [z.copy()]
    for _ in range(N):
        x = oracle("f", z, alpha)
        y = oracle("g", 2 * x - z, alpha)
        z = z + 2 * (y - x)
        zs.append(z)
        xs.append(x)
        ys.append(y)
        outputs.append(y)
    meta = {"alpha": alpha, "output": "y_k = prox_g(2x_{k-1} - z_{k-1}); outputs[0] = z_0"}
    its = {"z": zs, "x": xs, "y": ys}
    return _finish("prs", N, its, outputs, oracle, p, meta)


def prs_fixed_point(x_star, u_star, alpha: float) -> np.ndarray:
    """Fixed point of the PRS operator built from a primal-dual solution."""
    return np.asarray(x_star) - alpha * np.asarray(u_star)


def run_ohm(p: CompositeProblem, x0, alpha: float = 1.0, N: int = 1) -> RunTrace:
    """Optimized Halpern method on the PRS operator T.

    x_{k+1} = x_0/(k+2) + (k+1)/(k+2) T x_k. ``residual[k] = ||T x_k - x_k||^2``.
    Primal output after k iterations: the latest g-prox point.
    """
    _check_n(N)
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    anchor = as_vec(x0, "x0").copy()
    x = anchor.copy()
    oracle = _Oracle(p)
    xs, Txs, res = [x], [], []
    outputs = [x.copy()]
    for k in range(N):
        y = 2 * oracle("f", x, alpha) - x
        pg = oracle("g", y, alpha)
        Tx = 2 * pg - y
        res.append(sq_norm(Tx - x))
        x = anchor / (k + 2) + (k + 1) / (k + 2) * Tx
        xs.append(x)
        Txs.append(Tx)
        outputs.append(pg)
    meta = {"alpha": alpha, "output": "prox_g(y_{k}); outputs[0] = x_0"}
    its = {"x": xs, "Tx": Txs}
    trace = _finish("ohm", N, its, outputs, oracle, p, meta)
    trace.iterates["residual"] = np.array(res)
    return trace


# -- accelerated Chambolle-Pock ----------------------------------------------


def run_cp(p: CompositeProblem, x0, u0=None, tau0: float = 1.0, sigma0: float = 1.0, N: int = 1) -> RunTrace:
    """Accelerated Chambolle-Pock with z_0 = x_0::

        u_{k+1} = u_k - sigma_k z_k + sigma_k prox_{f/sigma_k}(z_k - u_k/sigma_k)
        x_{k+1} = prox_{tau_k g}(x_k + tau_k u_{k+1})
        z_{k+1} = x_{k+1} + theta_k (x_{k+1} - x_k)
    """
    _check_n(N)
    if tau0 * sigma0 > 1 + 1e-15:
        raise ValueError("tau0 * sigma0 must be <= 1")
    x = as_vec(x0, "x0").copy()
    u_given = u0 is not None
    u = np.zeros_like(x) if u0 is None else as_vec(u0, "u0").copy()
    sched = cp_schedule(tau0, sigma0, p.mu, N)
    tau, sigma, theta = (sched.values[k] for k in ("tau", "sigma", "theta"))
    oracle = _Oracle(p)
    z = x.copy()
    xs, us, zs = [x], [u], [z]
    for k in range(N):
        u = u - sigma[k] * z + sigma[k] * oracle("f", z - u / sigma[k], 1 / sigma[k])
        x_new = oracle("g", x + tau[k] * u, tau[k])
        z = x_new + theta[k] * (x_new - x)
        x = x_new
        xs.append(x)
        us.append(u)
        zs.append(z)
    meta = {"tau0": tau0, "sigma0": sigma0, "u0_defaulted": not u_given,
            "tau": tau.tolist(), "sigma": sigma.tolist()}
    its = {"x": xs, "u": us, "z": zs}
    return _finish("cp", N, its, xs, oracle, p, meta)


# -- accelerated Davis-Yin ---------------------------------------------------


DYS_INDEX_NOTE = (
    "seed y0 gives x_0 = prox_{g0 g}(y0), u_0 = (y0 - x_0)/g0; then for k >= 0 "
    "y_k = prox_{g_k f}(x_k - g_k u_k) (replacing the seed), and "
    "x_{k+1} = prox_{g_k g}(y_k + g_k u_k), u_{k+1} = (y_k + g_k u_k - x_{k+1})/g_k"
)


def run_dys(p: CompositeProblem, y0, gamma0: float = 1.0, N: int = 1) -> RunTrace:
    """Accelerated Davis-Yin splitting with gamma_{k+1} = gamma_k/sqrt(1 + 2 gamma_k mu).

    ``N`` iterations make N g-calls and N f-calls: iterates x_0..x_{N-1},
    u_0..u_{N-1}, y_0..y_{N-1}. The output after k iterations is x_{k-1}
    (``outputs[0]`` is the seed ``y0``); see ``DYS_INDEX_NOTE`` for how the
    seed and the loop's y_k are told apart.
    """
    _check_n(N)
    if not gamma0 > 0:
        raise ValueError("gamma0 must be positive")
    seed = as_vec(y0, "y0").copy()
    gam = dys_schedule(gamma0, p.mu, N).values["gamma"]
    oracle = _Oracle(p)
    x = oracle("g", seed, gam[0])
    u = (seed - x) / gam[0]
    xs, us, ys = [x], [u], []
    outputs = [seed, x]
    for k in range(N):
        y = oracle("f", x - gam[k] * u, gam[k])
        ys.append(y)
        if k == N - 1:
            break
        v = y + gam[k] * u
        x = oracle("g", v, gam[k])
        u = (v - x) / gam[k]
        xs.append(x)
        us.append(u)
        outputs.append(x)
    meta = {"gamma0": gamma0, "gamma": gam.tolist(), "mu": p.mu, "index_convention": DYS_INDEX_NOTE}
    its = {"x": xs, "u": us, "y": ys}
    return _finish("dys", N, its, outputs, oracle, p, meta)


def dys_descent_inequality(trace: RunTrace, x_star, u_star) -> np.ndarray:
    """Slack of (1+2g_k mu)|x_{k+1}-x*|^2 + g_k^2|u_{k+1}-u*|^2 <= |x_k-x*|^2 + g_k^2|u_k-u*|^2.

    Returns lhs - rhs per step; nonpositive values mean the inequality holds.
    """
    x, u = trace["x"], trace["u"]
    gam = np.asarray(trace.metadata["gamma"])
    mu = trace.metadata["mu"]
    dx = np.einsum("ij,ij->i", x - x_star, x - x_star)
    du = np.einsum("ij,ij->i", u - u_star, u - u_star)
    g = gam[: dx.size - 1]
    lhs = (1 + 2 * g * mu) * dx[1:] + g**2 * du[1:]
    rhs = dx[:-1] + g**2 * du[:-1]
    return lhs - rhs


# -- FISTA -------------------------------------------------------------------


def run_fista(p: CompositeProblem, x1, L: float | None = None, N: int = 1) -> RunTrace:
    """FISTA with g smooth: x_{k+1} = prox_{f/L}(y_k - grad g(y_k)/L), momentum (t_k - 1)/t_{k+1}.

    outputs[0] = x_1; outputs[k] is the point after k prox-gradient steps.
    ``objective[k]`` is f + g at outputs[k] when value oracles exist.
    """
    _check_n(N)
    if p.g.grad is None:
        raise ValueError("FISTA needs a gradient oracle for g")
    L = p.g.lipschitz if L is None else L
    if L is None or not L > 0:
        raise ValueError("FISTA needs a positive Lipschitz constant")
    x = as_vec(x1, "x1").copy()
    y = x.copy()
    t = fista_schedule(N).values["t"]
    oracle = _Oracle(p)
    xs, ys = [x], [y]
    for k in range(N):
        x_new = oracle("f", y - p.g.grad(y) / L, 1 / L)
        y = x_new + (t[k] - 1) / t[k + 1] * (x_new - x)
        x = x_new
        xs.append(x)
        ys.append(y)
    meta = {"L": float(L)}
    its = {"x": xs, "y": ys}
    trace = _finish("fista", N, its, xs, oracle, p, meta)
    if p.f.value is not None and p.g.value is not None:
        trace.iterates["objective"] = np.array([p.objective(v) for v in trace.outputs])
    return trace


def fista_bound(trace: RunTrace, x_star, f_star: float) -> np.ndarray:
    """Slack F(x_k) - F* - 2L||x_1 - x*||^2/(k+1)^2 for k >= 1 (nonpositive = holds)."""
    L = trace.metadata["L"]
    r2 = sq_norm(trace.outputs[0] - x_star)
    k = np.arange(1, trace.outputs.shape[0])
    return trace.iterates["objective"][1:] - f_star - 2 * L * r2 / (k + 1) ** 2


# -- dispatch ----------------------------------------------------------------


def default_start(algorithm: str, p: CompositeProblem, x0, u0, *, alpha=1.0, gamma0=1.0):
    """Map a primal-dual start (x0, u0) to each method's own initialization.

    DRS: z0 = x0 + alpha u0. PRS/OHM: z0 = x0 - alpha u0. DYS: y0 = x0 + gamma0 u0.
    Each is the image of (x*, u*) under the same map at the fixed point.
    """
    x0 = np.asarray(x0, dtype=float)
    u0 = np.zeros_like(x0) if u0 is None else np.asarray(u0, dtype=float)
    if algorithm == "drs":
        return x0 + alpha * u0
    if algorithm in ("prs", "ohm"):
        return x0 - alpha * u0
    if algorithm == "dys":
        return x0 + gamma0 * u0
    return x0


def run(algorithm: str, p: CompositeProblem, x0, u0=None, N: int = 1, *, alpha: float = 1.0,
        gamma0: float = 1.0, tau0: float = 1.0, sigma0: float = 1.0, L: float | None = None) -> RunTrace:
    """Run ``algorithm`` for ``N`` iterations from the primal-dual start (x0, u0)."""
    start = default_start(algorithm, p, x0, u0, alpha=alpha, gamma0=gamma0)
    if algorithm == "fdr":
        tr = run_fdr(p, x0, u0, N)
    elif algorithm == "drs":
        tr = run_drs(p, start, alpha, N)
    elif algorithm == "prs":
        tr = run_prs(p, start, alpha, N)
    elif algorithm == "ohm":
        tr = run_ohm(p, start, alpha, N)
    elif algorithm == "cp":
        tr = run_cp(p, x0, u0, tau0, sigma0, N)
    elif algorithm == "dys":
        tr = run_dys(p, start, gamma0, N)
    elif algorithm == "fista":
        tr = run_fista(p, x0, L, N)
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")
    tr.metadata.setdefault("mu", p.mu)
    return tr
