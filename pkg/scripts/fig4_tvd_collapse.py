"""Rescaled TVD curves ``t TVD / N`` against ``t / N`` for several cycle sizes."""

import argparse
import math
import os

import numpy as np

from coinless_walk import WalkParams, write_rows
from coinless_walk.cycle import tvd_curve


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[500, 2000, 5000])
    ap.add_argument("--t-over-n", type=float, default=0.5)
    ap.add_argument("--out", default="out/fig4")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    p = WalkParams(math.pi / 2, 2 * math.pi / 3)
    bins = np.round(np.arange(0.05, args.t_over_n + 1e-9, 0.05), 12)
    local = []
    for n in args.sizes:
        curve = tvd_curve(n, p, int(args.t_over_n * n))
        t = np.arange(1, len(curve) + 1)
        write_rows(os.path.join(args.out, f"tvd_N{n}.csv"), ("t_over_N", "rescaled"), zip(t / n, t * curve / n))
        u, y = t / n, t * curve / n
        local.append([y[(u >= lo) & (u < hi)].mean() for lo, hi in zip(bins[:-1], bins[1:])])
    local = np.array(local)
    spread = (local.max(axis=0) - local.min(axis=0)) / local.mean(axis=0)
    for lo, m, s in zip(bins[:-1], local.mean(axis=0), spread):
        print(f"t/N in [{lo:.2f}, {lo + 0.05:.2f}): mean {m:.4f}, spread {s:.2%}")


if __name__ == "__main__":
    main()
