"""Three-site walk from the origin: the PDF after 20 steps and the trapped weight at x = 0."""

import argparse
import os

import numpy as np

from coinless_walk import initial_state, pdf, write_rows
from coinless_walk.evolution import step_coinless3
from coinless_walk.spectral import localization_weight, localized_site_probability


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--snapshot", type=int, default=20)
    ap.add_argument("--t-max", type=int, default=200)
    ap.add_argument("--out", default="out/fig3")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    psi0 = initial_state()
    pred = localized_site_probability(psi0, 0)
    print(f"trapped weight {localization_weight(psi0):.7f}, flat-band p0 {pred:.7f}")

    s, p0 = psi0, []
    for t in range(1, args.t_max + 1):
        s = step_coinless3(s)
        p0.append(abs(s.amplitude(0)) ** 2)
        if t == args.snapshot:
            write_rows(os.path.join(args.out, f"pdf_t{t}.csv"), ("site", "prob"), zip(s.sites, pdf(s)))
    p0 = np.array(p0)
    write_rows(os.path.join(args.out, "p0.csv"), ("t", "p0", "flat_band"), ((t, v, pred) for t, v in enumerate(p0, 1)))
    tail = p0[49:]
    print(f"p0 over t in [50, {args.t_max}]: mean {tail.mean():.7f}, range [{tail.min():.4f}, {tail.max():.4f}]")


if __name__ == "__main__":
    main()
