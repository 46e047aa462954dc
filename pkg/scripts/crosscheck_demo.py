"""Compare the frequency-domain boundary data with Fourier-transformed wave traces.

Homogeneous medium only.  Prints the relative L2 mismatch for several
attenuations and final times.

    python scripts/crosscheck_demo.py [--n 201] [--T 20 40]
"""

from __future__ import annotations

import argparse

import numpy as np

from layered_isp.greens import SIGMA, boundary_data
from layered_isp.medium import MediumConfig
from layered_isp.sources import SourceGrid, demo_pair
from layered_isp.timedomain import solve_wave, trace_transform


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=201)
    p.add_argument("--T", type=float, nargs="+", default=[20.0, 40.0])
    p.add_argument("--alphas", type=float, nargs="+", default=[0.0, 0.5, 1.0])
    args = p.parse_args()

    sp = demo_pair(SourceGrid(args.n))
    om = np.linspace(1.0, 8.0, 141)
    for a in args.alphas:
        cfg = MediumConfig(1.0, 1.0, a)
        fd = boundary_data(cfg, sp, om)
        ref = np.r_[fd.d_minus, fd.d_plus] * SIGMA
        for T in args.T:
            ws = solve_wave(cfg, sp, T=T)
            for tail in (False, True):
                td = trace_transform(ws, om, tail=tail)
                rel = np.linalg.norm(np.r_[td.d_minus, td.d_plus] - ref) / np.linalg.norm(ref)
                print(f"alpha={a:4.2f} T={T:5.1f} tail={'on ' if tail else 'off'} mismatch {rel:.2e}")


if __name__ == "__main__":
    main()
