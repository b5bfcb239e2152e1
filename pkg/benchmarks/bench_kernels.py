"""Time the numba and numpy paths of each hot kernel.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from fdr_lab import _kernels as K
from fdr_lab.elasticnet import gen_instance
from fdr_lab.lowerbound import build_worstcase


def best_of(fn, repeat):
    fn()  # warm-up, includes JIT compilation
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def segment_case(N):
    inst = build_worstcase(N, 1.0)
    y = np.random.default_rng(0).standard_normal(inst.dim)
    args = inst.C._arrays
    return (lambda: [K.project_segments_numpy(y, *args) for _ in range(1000)],
            lambda: [K.project_segments_numba(y, *args) for _ in range(1000)])


def drs_case(iters):
    inst = gen_instance(0)
    n = inst.A.shape[1]
    Q = 2 * inst.A.T @ inst.A + inst.mu * np.eye(n)
    R = np.linalg.inv(Q + np.eye(n))
    c = R @ (2 * inst.A.T @ inst.b)
    z0 = np.zeros(n)
    return (lambda: K.drs_quadratic_l1_numpy(R, c, inst.lam, 1.0, z0, iters, 0.0),
            lambda: K.drs_quadratic_l1_numba(R, c, inst.lam, 1.0, z0, iters, 0.0))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    cases = [
        ("segment projection x1000, N=10", segment_case(10)),
        ("segment projection x1000, N=200", segment_case(200)),
        ("reference DRS, 20000 iters", drs_case(20000)),
    ]
    print(f"{'kernel':36s} {'numpy [s]':>10s} {'numba [s]':>10s} {'speedup':>8s}")
    for name, (np_fn, nb_fn) in cases:
        a = best_of(np_fn, args.repeat)
        b = best_of(nb_fn, args.repeat)
        print(f"{name:36s} {a:10.4f} {b:10.4f} {a / b:8.1f}")


if __name__ == "__main__":
    main()
