"""Frequency tail of the boundary data against the k^-1 bound.

For each k prints the tail integral over (k, 8k), the 16k value, the bound
with unit constant and their ratio.  A log-log slope near -1 would make the
ratio flat; smooth sources give much steeper decay.

    python scripts/tail_scaling.py [--alpha 1] [--ks 10 20 40]
"""

from __future__ import annotations

import argparse

import numpy as np

from layered_isp.medium import MediumConfig
from layered_isp.sources import SourceGrid, demo_pair, sobolev_norm
from layered_isp.stability import empirical_tail, tail_bound


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--c-n", type=float, default=1.5)
    p.add_argument("--ks", type=float, nargs="+", default=[10.0, 20.0, 40.0])
    args = p.parse_args()

    cfg = MediumConfig(1.0, args.c_n, args.alpha)
    sp = demo_pair(SourceGrid.for_bandwidth(16 * max(args.ks), cfg.c_max))
    n02, n11 = sobolev_norm(sp.f0, 2, sp.grid), sobolev_norm(sp.f1, 1, sp.grid)
    tails = []
    for k in args.ks:
        t8 = empirical_tail(cfg, sp, k)
        t16 = empirical_tail(cfg, sp, k, upper=16.0)
        b = tail_bound(k, cfg.alpha, n02, n11)
        tails.append(t8)
        print(f"k={k:6.1f} tail(8k)={t8:.4e} tail(16k)={t16:.4e} bound={b:.4e} ratio={t8 / b:.3e}")
    slope = np.polyfit(np.log(args.ks), np.log(tails), 1)[0]
    print(f"log-log slope of the tail: {slope:.2f}")


if __name__ == "__main__":
    main()
