"""Lyapunov sequence for FDR and its dissipativity checks.

For an N-step FDR run with primal-dual solution (x*, u*), nu = 1/(1+4N^2 mu^2),
R^2 = |x0-x*|^2 + |u0-u*|^2 and Delta_k = 1 + 4kN mu^2::

    V_{-1} = nu R^2 - nu^2 |-2N mu (x0 - x*) + (u0 - u*)|^2
    V_0    = nu^2 |x* + 2N mu u* - x0 - 2N mu u0|^2
    V_k    = nu^2 |Delta_k x* + 2N mu u* - Delta_k (2x_k - w_k)|^2,  1 <= k <= N-1
    V_N    = |x_N - x*|^2 + 4N^2 mu^2 nu^2 |u* + f'(x_N)|^2,  f'(x_N) = (w_N - x_N)/eta_N

Each step V_{k+1} - V_k also has a closed form as a nonpositive combination
of a monotonicity gap of f and a strong-monotonicity gap of g; both the
direct difference and the closed form are recorded.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algorithms import RunTrace
from .numeric import sq_norm

SLACK_RTOL = 1e-8
CASE1_RTOL = 1e-12


class CertificateError(ValueError):
    """The trace cannot be certified (wrong algorithm or missing iterates)."""


@dataclass
class LyapunovCertificate:
    N: int
    mu: float
    nu: float
    R2: float
    delta: np.ndarray  # Delta_0..Delta_N
    omega: float  # 1 + 4N mu^2 = Delta_1
    values: np.ndarray  # V_{-1}, V_0, ..., V_N
    case_values: np.ndarray  # closed form of V_{k+1} - V_k, k = -1..N-1
    mono_f: np.ndarray  # <x_{k+1} - x*, f'(x_{k+1}) + u*>, k = 0..N-1
    mono_g: np.ndarray  # <y_{k+1} - x*, g'(y_{k+1}) - u*> - mu |y_{k+1} - x*|^2
    cases: list  # "case1".."case4" per step
    final_sq_dist: float
    v0_general: float  # V_0 recomputed from the V_k formula at k = 0
    extras: dict = field(default_factory=dict)

    @property
    def slacks(self) -> np.ndarray:
        return np.diff(self.values)

    @property
    def scale(self) -> float:
        return max(1.0, self.R2)

    @property
    def dissipative(self) -> bool:
        return bool(np.all(self.slacks <= SLACK_RTOL * self.scale))

    @property
    def bound(self) -> float:
        return self.nu * self.R2


def _case_of(k: int, N: int) -> str:
    # k is the index of the step V_k -> V_{k+1}
    if k == -1:
        return "case1"
    if k == N - 1:
        return "case4"
    if k == 0:
        return "case2"
    return "case3"


def build_certificate(trace: RunTrace, x_star, u_star) -> LyapunovCertificate:
    if trace.algorithm != "fdr":
        raise CertificateError(f"certificate needs an FDR trace, got {trace.algorithm!r}")
    for name in ("x", "w", "y", "u0"):
        if name not in trace.iterates:
            raise CertificateError(f"trace is missing {name!r} records")
    x, w, y = trace["x"], trace["w"], trace["y"]
    N = trace.n_iters
    eta = np.asarray(trace.metadata["eta"], dtype=float)
    mu = float(trace.metadata["mu"])
    if x.shape[0] != N + 1 or w.shape[0] != N + 1 or y.shape[0] != N:
        raise CertificateError("trace length does not match N")
    xs = np.asarray(x_star, dtype=float)
    us = np.asarray(u_star, dtype=float)
    x0, u0 = x[0], trace["u0"][0]

    c = 2 * N * mu
    nu = 1.0 / (1 + 4 * N**2 * mu**2)
    R2 = sq_norm(x0 - xs) + sq_norm(u0 - us)
    k = np.arange(N + 1, dtype=float)
    delta = 1 + 4 * k * N * mu**2

    V = np.empty(N + 2)
    V[0] = nu * R2 - nu**2 * sq_norm(-c * (x0 - xs) + (u0 - us))
    V[1] = nu**2 * sq_norm(xs + c * us - x0 - c * u0)
    for j in range(1, N):
        V[j + 1] = nu**2 * sq_norm(delta[j] * xs + c * us - delta[j] * (2 * x[j] - w[j]))
    fN = (w[N] - x[N]) / eta[N]
    V[N + 1] = sq_norm(x[N] - xs) + c**2 * nu**2 * sq_norm(us + fN)
    v0_general = nu**2 * sq_norm(delta[0] * xs + c * us - delta[0] * (2 * x[0] - w[0]))

    # residual subgradients, step k produces y_{k+1}, x_{k+1}
    mono_f = np.empty(N)
    mono_g = np.empty(N)
    for j in range(N):
        gp = (2 * x[j] - w[j] - y[j]) / eta[j]
        fp = (w[j + 1] - x[j + 1]) / eta[j + 1]
        mono_f[j] = float((x[j + 1] - xs) @ (fp + us))
        mono_g[j] = float((y[j] - xs) @ (gp - us)) - mu * sq_norm(y[j] - xs)

    omega = 1 + 4 * N * mu**2
    case_values = np.zeros(N + 1)
    cases = []
    for j in range(-1, N):
        case = _case_of(j, N)
        cases.append(case)
        if case == "case1":
            continue
        if case == "case2":
            cg = nu**2 * 2 * eta[0] * (1 + omega)
            cf = nu**2 * 4 * eta[0] * omega
        elif case == "case3":
            cg = nu**2 * 4 * N * mu * (delta[j] + delta[j + 1])
            cf = nu**2 * 8 * N * delta[j + 1] * mu
        else:
            cg = 8 * N * mu * (1 + 2 * N * (2 * N - 1) * mu**2) * nu**2
            cf = 4 * N * mu * nu
        case_values[j + 1] = -cf * mono_f[j] - cg * mono_g[j]

    return LyapunovCertificate(
        N=N, mu=mu, nu=nu, R2=R2, delta=delta, omega=omega, values=V,
        case_values=case_values, mono_f=mono_f, mono_g=mono_g, cases=cases,
        final_sq_dist=sq_norm(x[N] - xs), v0_general=v0_general,
    )


def check_case_equalities(cert: LyapunovCertificate) -> dict:
    """Case-1 equality, per-step signs and agreement with the closed forms."""
    scale = cert.scale
    slacks = cert.slacks
    case1 = float(abs(slacks[0]))
    mismatch = np.abs(slacks - cert.case_values)
    v0_mismatch = abs(cert.v0_general - cert.values[1])
    report = {
        "N": cert.N,
        "mu": cert.mu,
        "R2": cert.R2,
        "case1_abs": case1,
        "case1_ok": case1 <= CASE1_RTOL * scale,
        "max_slack": float(slacks.max()),
        "dissipative": cert.dissipative,
        "slack_signs": [int(np.sign(s)) if abs(s) > CASE1_RTOL * scale else 0 for s in slacks],
        "cases": list(cert.cases),
        "closed_form_max_mismatch": float(mismatch.max()),
        "mono_f_min": float(cert.mono_f.min()),
        "mono_g_min": float(cert.mono_g.min()),
        "v0_forms_mismatch": float(v0_mismatch),
        "chain_bound_ok": bool(cert.final_sq_dist <= cert.values[-1] + SLACK_RTOL * scale
                               and cert.values[-1] <= cert.values[0] + SLACK_RTOL * scale * (cert.N + 1)),
    }
    report["ok"] = bool(report["case1_ok"] and report["dissipative"] and report["chain_bound_ok"])
    return report


def rate_bound_gap(trace: RunTrace, x_star, u_star) -> float:
    """R^2/(1+4N^2 mu^2) - |x_N - x*|^2 for an FDR trace."""
    N = trace.n_iters
    mu = float(trace.metadata["mu"])
    x0, u0 = trace["x"][0], trace["u0"][0]
    R2 = sq_norm(x0 - x_star) + sq_norm(u0 - u_star)
    return R2 / (1 + 4 * N**2 * mu**2) - sq_norm(trace["x"][N] - x_star)
