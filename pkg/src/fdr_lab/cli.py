"""Command line entry point ``fdr-lab``.

Exit status is 0 iff every asserted invariant holds, 1 if one fails (the
report is still written and its path printed), and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import algorithms as alg
from . import bench
from . import lowerbound as lb
from .elasticnet import compute_reference, gen_instance
from .lyapunov import build_certificate, check_case_equalities
from .numeric import sq_norm

DEFAULT_REPORT = "fdr-lab-report"


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("N >= 1 required")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _common(p: argparse.ArgumentParser, mu_nargs=None):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mu", type=_positive_float, nargs=mu_nargs, default=None)
    p.add_argument("--lambda", dest="lam", type=_positive_float, default=None)
    p.add_argument("--out", default=None, help="output file (stdout if omitted)")
    p.add_argument("--format", choices=("csv", "json", "svg"), default="json")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fdr-lab", description="Fast Douglas-Rachford experiments.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("run", help="run one algorithm on an elastic-net instance")
    _common(p)
    p.add_argument("--algo", choices=alg.ALGORITHMS, default="fdr")
    p.add_argument("--n-iters", type=_positive_int, default=100)

    p = sub.add_parser("lyapunov", help="build and check the FDR Lyapunov certificate")
    _common(p)
    p.add_argument("--n-iters", type=_positive_int, default=50)

    p = sub.add_parser("lowerbound", help="worst-case instance experiment")
    _common(p, mu_nargs="+")
    p.add_argument("--N", dest="N", type=_positive_int, nargs="+", default=[1])
    p.add_argument("--algo", nargs="+", default=["fdr"],
                   help=f"methods among {', '.join(alg.PROX_PROX_METHODS)} or 'all'")

    p = sub.add_parser("bench", help="elastic-net benchmark over many seeds")
    _common(p)
    p.add_argument("--seeds", type=_positive_int, default=100, help="number of instances")
    p.add_argument("--algo", nargs="+", default=list(bench.DEFAULT_ALGORITHMS))
    p.add_argument("--k-grid", type=_positive_int, nargs="+", default=list(bench.DEFAULT_K_GRID))
    p.add_argument("--threads", type=_positive_int, default=None)

    p = sub.add_parser("plot", help="render a benchmark CSV as SVG")
    p.add_argument("csv", help="benchmark CSV")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("svg",), default="svg")
    return ap


def _emit(text: str, out: str | None) -> str | None:
    if out is None:
        sys.stdout.write(text)
        return None
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    Path(out).write_text(text)
    return out


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _finish(ok: bool, text: str, out: str | None, cmd: str) -> int:
    path = _emit(text, out)
    if ok:
        return 0
    if path is None:
        path = _emit(text, f"{DEFAULT_REPORT}-{cmd}.txt")
    print(f"invariant check failed; report: {os.path.abspath(path)}", file=sys.stderr)
    return 1


def _instance(args):
    kw = {}
    if args.mu is not None:
        kw["mu"] = args.mu
    if args.lam is not None:
        kw["lam"] = args.lam
    inst = gen_instance(args.seed, **kw)
    compute_reference(inst)
    return inst


def cmd_run(args) -> int:
    if args.format == "svg":
        raise SystemExit("run: svg output is produced by 'bench' or 'plot'")
    inst = _instance(args)
    p = inst.problem()
    n = inst.A.shape[1]
    x0 = np.zeros(n)
    N = args.n_iters
    tr = alg.run(args.algo, p, x0, np.zeros(n), N, L=inst.lipschitz())
    errs = [sq_norm(o - inst.x_star) for o in tr.outputs]
    R2 = sq_norm(inst.x_star) + sq_norm(inst.u_star)
    bound = R2 / (1 + 4 * N**2 * inst.mu**2)
    ok = args.algo != "fdr" or errs[-1] <= bound + bench.BOUND_TOL
    if args.format == "csv":
        text = _rows_csv(("k", "sq_dist"), [(k, repr(e)) for k, e in enumerate(errs)])
    else:
        text = _dump({
            "algorithm": args.algo,
            "N": N,
            "seed": args.seed,
            "mu": inst.mu,
            "lambda": inst.lam,
            "prox_calls": len(tr.calls),
            "sq_dist": errs[-1],
            "fdr_bound": bound,
            "objective": inst.objective(tr.final),
            "objective_star": inst.objective(inst.x_star),
            "ok": ok,
        })
    return _finish(ok, text, args.out, "run")


def cmd_lyapunov(args) -> int:
    if args.format == "svg":
        raise SystemExit("lyapunov: choose json or csv")
    inst = _instance(args)
    n = inst.A.shape[1]
    tr = alg.run_fdr(inst.problem(), np.zeros(n), np.zeros(n), args.n_iters)
    cert = build_certificate(tr, inst.x_star, inst.u_star)
    rep = check_case_equalities(cert)
    if args.format == "csv":
        rows = [(k - 1, repr(float(v)), cert.cases[k] if k < len(cert.cases) else "")
                for k, v in enumerate(cert.values)]
        text = _rows_csv(("k", "V", "next_step_case"), rows)
    else:
        rep = dict(rep, values=[float(v) for v in cert.values], bound=cert.bound,
                   final_sq_dist=cert.final_sq_dist)
        text = _dump(rep)
    return _finish(bool(rep["ok"]), text, args.out, "lyapunov")


def cmd_lowerbound(args) -> int:
    if args.format == "svg":
        raise SystemExit("lowerbound: choose json or csv")
    methods = list(alg.PROX_PROX_METHODS) if "all" in args.algo else args.algo
    for m in methods:
        if m not in alg.PROX_PROX_METHODS:
            raise SystemExit(f"lowerbound: {m!r} is not a prox-prox method")
    mus = args.mu or [1.0]
    results = []
    ok = True
    for N in args.N:
        for mu in mus:
            for m in methods:
                r = lb.lowerbound_experiment(m, N, mu)
                good = r["achieved"] >= r["floor"] - 1e-10 and r["span_ok"] and r["chain_ok"]
                if m == "fdr":
                    good = good and r["achieved"] <= r["ceiling"] + 1e-10
                ok = ok and good
                results.append(r)
    if args.format == "csv":
        keys = list(results[0])
        text = _rows_csv(keys, [[r[k] for k in keys] for r in results])
    else:
        text = _dump(results[0] if len(results) == 1 else results)
    return _finish(ok, text, args.out, "lowerbound")


def cmd_bench(args) -> int:
    kw = {}
    if args.mu is not None:
        kw["mu"] = args.mu
    if args.lam is not None:
        kw["lam"] = args.lam
    seeds = range(args.seed, args.seed + args.seeds)
    t0 = time.perf_counter()
    rep = bench.run_benchmark(seeds, args.algo, args.k_grid, threads=args.threads, **kw)
    elapsed = time.perf_counter() - t0
    out = Path(args.out or "runs")
    out.mkdir(parents=True, exist_ok=True)
    csv_path = bench.emit_csv(rep, out / "bench.csv")
    svg_path = bench.emit_svg(rep, out / "bench.svg")
    json_path = bench.emit_json(rep, out / "bench.json")
    ok = not rep.flagged and rep.metadata["fdr_bound_violations"] == 0
    print(f"wrote {csv_path}, {svg_path}, {json_path} ({elapsed:.1f} s)")
    if not ok:
        print(f"invariant check failed; report: {os.path.abspath(json_path)}", file=sys.stderr)
        return 1
    return 0


def cmd_plot(args) -> int:
    rep = bench.read_csv(args.csv)
    out = args.out or str(Path(args.csv).with_suffix(".svg"))
    bench.emit_svg(rep, out)
    print(f"wrote {out}")
    return 0


COMMANDS = {
    "run": cmd_run,
    "lyapunov": cmd_lyapunov,
    "lowerbound": cmd_lowerbound,
    "bench": cmd_bench,
    "plot": cmd_plot,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return COMMANDS[args.cmd](args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
