"""Elastic-net convergence benchmark: runs, CSV/JSON persistence and SVG plots.

FDR rows use terminal-iterate semantics: a fresh N = k run for each k in the
grid. Every other method runs once to max(k_grid) and is sampled along the
way. Work is split per instance over a bounded thread pool
(``FDR_LAB_THREADS``); results are reassembled in seed order so the output
does not depend on the number of workers.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import algorithms as alg
from .elasticnet import ElasticNetInstance, compute_reference, gen_instance
from .numeric import NonFiniteError, sq_norm

CSV_HEADER = ("instance_id", "algorithm", "k", "sq_dist", "bound")
DEFAULT_K_GRID = (1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000)
DEFAULT_ALGORITHMS = ("fdr", "fista", "drs", "cp", "dys")
BOUND_TOL = 1e-9


class BenchmarkError(RuntimeError):
    pass


@dataclass
class BenchmarkReport:
    rows: list  # (instance_id, algorithm, k, sq_dist, bound)
    metadata: dict = field(default_factory=dict)
    flagged: list = field(default_factory=list)  # (instance_id, algorithm, reason)

    @property
    def algorithms(self) -> list[str]:
        seen = []
        for r in self.rows:
            if r[1] not in seen:
                seen.append(r[1])
        return seen

    @property
    def k_grid(self) -> list[int]:
        return sorted({r[2] for r in self.rows})

    def values(self, algorithm: str, column: int = 3) -> dict[int, np.ndarray]:
        out: dict[int, list] = {}
        for r in self.rows:
            if r[1] == algorithm:
                out.setdefault(r[2], []).append(r[column])
        return {k: np.asarray(v, dtype=float) for k, v in sorted(out.items())}

    def summary(self, algorithm: str, column: int = 3) -> dict[str, np.ndarray]:
        """Median and quartiles across instances for each k."""
        vals = self.values(algorithm, column)
        ks = np.array(list(vals))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)  # all-NaN columns of flagged runs
            q = np.array([np.nanpercentile(v, [25, 50, 75]) for v in vals.values()]).reshape(-1, 3)
        return {"k": ks, "q1": q[:, 0], "median": q[:, 1], "q3": q[:, 2]}

    def bound_violations(self, tol: float = BOUND_TOL) -> list:
        return [r for r in self.rows if r[1] == "fdr" and not r[3] <= r[4] + tol]

    def ordering(self) -> dict:
        """Which method has the smallest median error at each k (reported only)."""
        sums = {a: self.summary(a) for a in self.algorithms}
        best = {}
        for i, k in enumerate(self.k_grid):
            meds = {a: s["median"][i] for a, s in sums.items() if i < s["median"].size}
            best[int(k)] = min(meds, key=lambda a: (meds[a], a))
        last = best[max(best)] if best else None
        return {"best_by_k": best, "best_at_max_k": last, "fdr_smallest_at_max_k": last == "fdr"}


# -- running -----------------------------------------------------------------


def _threads(threads: int | None) -> int:
    if threads is None:
        env = os.environ.get("FDR_LAB_THREADS")
        threads = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(threads))


def _run_instance(seed: int, algorithms, k_grid, start_params: dict, gen_kwargs: dict):
    inst = gen_instance(seed, **gen_kwargs)
    compute_reference(inst)
    p = inst.problem()
    n = inst.A.shape[1]
    x0 = np.zeros(n)
    u0 = np.zeros(n)
    R2 = sq_norm(x0 - inst.x_star) + sq_norm(u0 - inst.u_star)
    bounds = {k: R2 / (1 + 4 * k * k * inst.mu**2) for k in k_grid}
    kmax = max(k_grid)
    L = inst.lipschitz()
    rows, flagged = [], []
    for a in algorithms:
        try:
            if a == "fdr":
                errs = {k: sq_norm(alg.run_fdr(p, x0, u0, k).final - inst.x_star) for k in k_grid}
            else:
                tr = alg.run(a, p, x0, u0, kmax, L=L, **start_params)
                errs = {k: sq_norm(tr.outputs[k] - inst.x_star) for k in k_grid}
        except (NonFiniteError, FloatingPointError) as exc:
            flagged.append((seed, a, str(exc)))
            errs = {k: math.nan for k in k_grid}
        rows.extend((seed, a, int(k), float(errs[k]), float(bounds[k])) for k in k_grid)
    info = dict(inst.ref_info or {})
    info["lipschitz"] = L
    info["R2"] = R2
    return rows, flagged, info


def run_benchmark(seeds, algorithms=DEFAULT_ALGORITHMS, k_grid=DEFAULT_K_GRID, *, threads: int | None = None,
                  alpha: float = 1.0, gamma0: float = 1.0, tau0: float = 1.0, sigma0: float = 1.0,
                  **gen_kwargs) -> BenchmarkReport:
    seeds = [int(s) for s in seeds]
    algorithms = list(algorithms)
    k_grid = sorted({int(k) for k in k_grid})
    if not seeds:
        raise BenchmarkError("no instances requested")
    if not algorithms:
        raise BenchmarkError("empty algorithm set")
    if not k_grid or k_grid[0] < 1:
        raise BenchmarkError("k_grid must be nonempty with every k >= 1")
    for a in algorithms:
        if a not in alg.ALGORITHMS:
            raise BenchmarkError(f"unknown algorithm {a!r}")
    start = {"alpha": alpha, "gamma0": gamma0, "tau0": tau0, "sigma0": sigma0}
    work = lambda s: _run_instance(s, algorithms, k_grid, start, gen_kwargs)  # noqa: E731
    n = _threads(threads)
    if n == 1:
        results = [work(s) for s in seeds]
    else:
        with ThreadPoolExecutor(max_workers=n) as ex:
            results = list(ex.map(work, seeds))
    rows, flagged, infos = [], [], []
    for r, f, i in results:
        rows.extend(r)
        flagged.extend(f)
        infos.append(i)
    g = {"rows": 40, "cols": 100, "density": 0.1, "noise_sd": 0.01, "mu": 1e-3, "lam": 1e-3}
    g.update(gen_kwargs)
    meta = {
        "seeds": seeds,
        "algorithms": algorithms,
        "k_grid": k_grid,
        "instance": g,
        "matrix_distribution": "iid standard normal",
        "support": "uniform without replacement, nonzeros iid standard normal",
        "start": {"x0": "zeros", "u0": "zeros", "drs_z0": "x0 + alpha*u0", "dys_y0": "x0 + gamma0*u0",
                  "fista_x1": "x0"},
        "steps": start,
        "fista_L": "2*sigma_max(A)^2 + mu by power iteration",
        "fdr_protocol": "fresh run with N = k for every k",
        "reference": {
            "method": "fixed-step DRS (alpha=1) then support polish",
            "max_kkt": max(i["kkt"] for i in infos),
            "max_drs_iterations": max(i["drs_iterations"] for i in infos),
        },
    }
    rep = BenchmarkReport(rows, meta, flagged)
    rep.metadata["fdr_bound_violations"] = len(rep.bound_violations())
    rep.metadata["ordering"] = rep.ordering()
    return rep


# -- persistence ---------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def report_to_csv(report: BenchmarkReport) -> str:
    if not report.rows:
        raise BenchmarkError("report is empty")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for i, a, k, d, b in report.rows:
        w.writerow((i, a, k, _fmt(d), _fmt(b)))
    return buf.getvalue()


def emit_csv(report: BenchmarkReport, path) -> str:
    text = report_to_csv(report)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return str(path)


def read_csv(path) -> BenchmarkReport:
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = tuple(next(rd, ()))
        if header != CSV_HEADER:
            raise BenchmarkError(f"unexpected CSV header {header}")
        rows = [(int(i), a, int(k), float(d), float(b)) for i, a, k, d, b in rd]
    return BenchmarkReport(rows)


def report_json(report: BenchmarkReport) -> str:
    """Metadata plus per-algorithm medians, keys in a fixed order."""
    summaries = {}
    for a in report.algorithms:
        s = report.summary(a)
        summaries[a] = {key: [float(v) for v in s[key]] for key in ("k", "median", "q1", "q3")}
    doc = {"metadata": report.metadata, "flagged": [list(f) for f in report.flagged], "summary": summaries}
    return json.dumps(doc, indent=2, allow_nan=True) + "\n"


def emit_json(report: BenchmarkReport, path) -> str:
    with open(path, "w") as fh:
        fh.write(report_json(report))
    return str(path)


# -- SVG -----------------------------------------------------------------------

_COLORS = {
    "fdr": "#d62728",
    "fista": "#1f77b4",
    "drs": "#2ca02c",
    "cp": "#9467bd",
    "dys": "#ff7f0e",
    "prs": "#8c564b",
    "ohm": "#17becf",
}
_W, _H = 640, 440
_ML, _MR, _MT, _MB = 70, 120, 20, 50


def _log_axis(lo: float, hi: float) -> tuple[float, float]:
    lo = math.floor(math.log10(lo))
    hi = math.ceil(math.log10(hi))
    if hi <= lo:
        hi = lo + 1
    return lo, hi


def render_svg(report: BenchmarkReport) -> str:
    """Log-log median curves, IQR bands and the dashed FDR bound."""
    algos = report.algorithms
    if not algos:
        raise BenchmarkError("empty algorithm set")
    sums = {a: report.summary(a) for a in algos}
    bound = report.summary(algos[0], column=4)
    ks = bound["k"].astype(float)
    pos = [v for s in sums.values() for key in ("q1", "q3", "median") for v in s[key] if v > 0 and np.isfinite(v)]
    pos += [v for v in bound["median"] if v > 0]
    if not pos:
        raise BenchmarkError("no positive values to plot")
    ylo, yhi = _log_axis(min(pos), max(pos))
    xlo, xhi = _log_axis(ks.min(), ks.max())
    pw, ph = _W - _ML - _MR, _H - _MT - _MB
    floor_v = 10.0**ylo

    def X(k):
        return _ML + pw * (math.log10(k) - xlo) / (xhi - xlo)

    def Y(v):
        v = max(v, floor_v) if np.isfinite(v) else floor_v
        return _MT + ph * (yhi - math.log10(v)) / (yhi - ylo)

    def pts(xs, ys):
        return " ".join(f"{X(x):.2f},{Y(y):.2f}" for x, y in zip(xs, ys))

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for e in range(int(ylo), int(yhi) + 1):
        y = Y(10.0**e)
        out.append(f'<line x1="{_ML}" y1="{y:.2f}" x2="{_ML + pw}" y2="{y:.2f}" stroke="#dddddd"/>')
        out.append(f'<text x="{_ML - 6}" y="{y + 4:.2f}" font-size="11" text-anchor="end">1e{e}</text>')
    for e in range(int(xlo), int(xhi) + 1):
        x = X(10.0**e)
        out.append(f'<line x1="{x:.2f}" y1="{_MT}" x2="{x:.2f}" y2="{_MT + ph}" stroke="#dddddd"/>')
        out.append(f'<text x="{x:.2f}" y="{_MT + ph + 16}" font-size="11" text-anchor="middle">1e{e}</text>')
    out.append(f'<text x="{_ML + pw / 2:.1f}" y="{_H - 10}" font-size="12" text-anchor="middle">k</text>')
    out.append(f'<text x="16" y="{_MT + ph / 2:.1f}" font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 16 {_MT + ph / 2:.1f})">squared distance to solution</text>')
    for a in algos:
        s, c = sums[a], _COLORS.get(a, "#555555")
        kx = s["k"].astype(float)
        band = pts(kx, s["q3"]) + " " + pts(kx[::-1], s["q1"][::-1])
        out.append(f'<polygon points="{band}" fill="{c}" fill-opacity="0.18" stroke="none"/>')
        out.append(f'<polyline points="{pts(kx, s["median"])}" fill="none" stroke="{c}" stroke-width="1.8"/>')
    out.append(f'<polyline points="{pts(ks, bound["median"])}" fill="none" stroke="black" '
               f'stroke-width="1.2" stroke-dasharray="6,4"/>')
    ly = _MT + 10
    for a in algos + ["bound"]:
        c = "black" if a == "bound" else _COLORS.get(a, "#555555")
        dash = ' stroke-dasharray="6,4"' if a == "bound" else ""
        x0 = _ML + pw + 12
        out.append(f'<line x1="{x0}" y1="{ly}" x2="{x0 + 22}" y2="{ly}" stroke="{c}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{x0 + 28}" y="{ly + 4}" font-size="11">{a.upper() if a != "bound" else "FDR bound"}</text>')
        ly += 18
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(report: BenchmarkReport, path) -> str:
    text = render_svg(report)
    with open(path, "w") as fh:
        fh.write(text)
    return str(path)


__all__ = [
    "BenchmarkError",
    "BenchmarkReport",
    "CSV_HEADER",
    "DEFAULT_ALGORITHMS",
    "DEFAULT_K_GRID",
    "ElasticNetInstance",
    "emit_csv",
    "emit_json",
    "emit_svg",
    "read_csv",
    "render_svg",
    "report_json",
    "report_to_csv",
    "run_benchmark",
]
