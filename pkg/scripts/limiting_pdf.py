"""Limiting distribution on even cycles, with a long time average as a check at small N."""

import argparse
import math
import os

import numpy as np

from coinless_walk import WalkParams, write_rows
from coinless_walk.cycle import limiting_pdf, time_averaged_pdf


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[200, 198])
    ap.add_argument("--check-n", type=int, default=16)
    ap.add_argument("--check-t", type=int, default=10**6)
    ap.add_argument("--out", default="out/limiting")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    p = WalkParams(math.pi / 2, 2 * math.pi / 3)
    for n in args.sizes:
        pi = limiting_pdf(n, p)
        write_rows(os.path.join(args.out, f"pi_N{n}.csv"), ("x", "pi"), enumerate(pi))
        med = np.median(pi)
        print(f"N={n}: sum {pi.sum():.12f}, N*median {n * med:.3f}, pi/median at 0: {pi[0] / med:.2f}, at N/2: {pi[n // 2] / med:.2f}")
        for parity in (0, 1):
            sub = pi[parity::2]
            print(f"  parity {parity}: x=0 / median {pi[parity] / np.median(sub):.2f}")

    pi = limiting_pdf(args.check_n, p)
    gap = np.max(np.abs(pi - time_averaged_pdf(args.check_n, p, args.check_t)))
    print(f"N={args.check_n}: |pi - pbar(T={args.check_t})|_inf = {gap:.2e}, T * gap = {gap * args.check_t:.2f}")


if __name__ == "__main__":
    main()
