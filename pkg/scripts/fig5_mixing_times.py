"""Mixing times ``tau_eps`` over sizes and tolerances, fitted to ``c N / eps``; also the
three sums bounding the non-oscillatory part of the TVD."""

import argparse
import math
import os

import numpy as np

from coinless_walk import WalkParams, write_rows
from coinless_walk.cycle import mixing_times, termf_decomposition


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[500, 1000, 2000])
    ap.add_argument("--eps", type=float, nargs="+", default=[0.05, 0.02, 0.01])
    ap.add_argument("--termf-sizes", type=int, nargs="+", default=list(range(100, 1001, 100)))
    ap.add_argument("--out", default="out/fig5")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    p = WalkParams(math.pi / 2, 2 * math.pi / 3)
    rows = []
    for n in args.sizes:
        rows += [(n, r.epsilon, r.tau_epsilon) for r in mixing_times(n, p, args.eps)]
    write_rows(os.path.join(args.out, "tau.csv"), ("N", "epsilon", "tau"), rows)
    x = np.array([n / e for n, e, _ in rows])
    tau = np.array([t for *_, t in rows], float)
    c = x @ tau / (x @ x)
    r2 = 1 - np.sum((tau - c * x) ** 2) / np.sum((tau - tau.mean()) ** 2)
    print(f"tau = {c:.4f} N/eps, R^2 = {r2:.5f}")

    terms = [(n, *termf_decomposition(n, p)) for n in args.termf_sizes]
    write_rows(os.path.join(args.out, "termf.csv"), ("N", "term1", "term2", "term3"), terms)
    for n, t1, t2, t3 in terms:
        print(f"N={n}: term1 {t1:.4f} ({t1 / n:.5f} N), term2 {t2:.4f}, term3 {t3:.4f}")


if __name__ == "__main__":
    main()
