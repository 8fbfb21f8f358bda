"""Timing comparison of the compiled and fallback path kernels.

Runs the same path-mode Monte Carlo estimate through each backend and
reports throughput.  The estimates differ only in detection noise; their
means should agree within a few standard errors.
"""

import argparse
import time

from stopduel.engine import KERNEL_BACKEND, SimConfig, estimate_value
from stopduel.equilibrium import build_profile
from stopduel.model import GbmRealOptionModel
from stopduel.stopping import ValueOracle


def run(backend, n, seed):
    oracle = ValueOracle.closed_form(GbmRealOptionModel(0.0, 0.2, 0.04, 1.0))
    profile = build_profile(oracle, 0.15, 0.15, 1.5)
    cfg = SimConfig(n_paths=n, seed=seed, mode="path", backend=backend)
    t0 = time.perf_counter()
    est = estimate_value(profile, 1, cfg)
    return est, time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--n", type=int, default=100_000, help="paths per backend")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    backends = ["compiled", "fallback"]
    if KERNEL_BACKEND != "compiled":
        print("compiled kernel not available; timing the fallback only")
        backends = ["fallback"]

    rows = []
    for backend in backends:
        est, dt = run(backend, args.n, args.seed)
        rows.append((backend, dt, est))

    print("%-10s %9s %12s %12s %10s" % ("backend", "time", "paths/s",
                                        "mean", "stderr"))
    for backend, dt, est in rows:
        print("%-10s %8.2fs %12.0f %12.6f %10.6f" % (
            backend, dt, args.n / dt, est.mean, est.stderr))
    if len(rows) == 2:
        print("speedup: %.1fx" % (rows[1][1] / rows[0][1]))


if __name__ == "__main__":
    main()
