"""Compare the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Each workload is run on both backends with identical inputs; the table shows the
best-of-repeat wall time and the speedup.
"""
import argparse
import json
import time

import numpy as np

from frametop import _kernels
from frametop.hermitian import random_projection
from frametop.polytope import sample_polytope, uniform_d
from frametop.rng import derive_rng

FLOW = (0.5, 1e300, 2.0, 1e-4, 0.5, 60, 5000, 1e-12, 1e-9, 1e-10, 1e-12)


def flow_workload(n, k, count):
    d = uniform_d(n, k)
    starts = [random_projection(n, k, derive_rng(i, "bench-flow")) for i in range(count)]

    def run(mod):
        for P0 in starts:
            mod.retract_flow(P0, d, k, *FLOW)
    return run


def vertex_workload(count):
    d = np.array([1.0, 1.0, 0.0, 0.0])
    starts = [random_projection(4, 2, derive_rng(i, "bench-vertex")) for i in range(count)]
    args = list(FLOW)
    args[7] = 1e-30

    def run(mod):
        for P0 in starts:
            mod.retract_flow(P0, d, 2, *args)
    return run


def partition_workload(n, k):
    d = np.sort(sample_polytope(n, k, derive_rng(0, "bench-partitions")))[::-1].copy()
    return lambda mod: mod.level_partitions(d, k, 1e-9, 1e-12)


def chain_workload(n, k, count):
    ds = [np.sort(sample_polytope(n, k, derive_rng(i, "bench-chain")))[::-1].copy() for i in range(count)]

    def run(mod):
        for d in ds:
            mod.schur_horn_chain(d, k, 1e-15)
    return run


def subset_workload(n, k):
    d = uniform_d(n, k)
    return lambda mod: mod.all_subset_sums_at_least(d, n - k, 1 - 1e-9)


WORKLOADS = {
    "retract_flow n=5 k=2 (100 starts)": flow_workload(5, 2, 100),
    "retract_flow n=8 k=3 (50 starts)": flow_workload(8, 3, 50),
    "retract_flow vertex f_tol=1e-30 (50)": vertex_workload(50),
    "level_partitions n=8 k=3": partition_workload(8, 3),
    "schur_horn_chain n=12 (1000)": chain_workload(12, 5, 1000),
    "subset sums n=20 k=10": subset_workload(20, 10),
}


def best_time(fn, mod, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(mod)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--json")
    args = parser.parse_args(argv)
    backends = _kernels.backends()
    if "cython" not in backends:
        print("compiled kernels are not built; only the fallback is timed")
    rows = []
    print(f"{'workload':40s} {'python [s]':>11s} {'cython [s]':>11s} {'speedup':>8s}")
    for name, fn in WORKLOADS.items():
        times = {b: best_time(fn, mod, args.repeat) for b, mod in backends.items()}
        py, cy = times.get("python"), times.get("cython")
        speed = py / cy if cy else float("nan")
        cy_s = f"{cy:11.4f}" if cy is not None else f"{'-':>11s}"
        print(f"{name:40s} {py:11.4f} {cy_s} {speed:8.1f}")
        rows.append({"workload": name, **times, "speedup": speed})
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
