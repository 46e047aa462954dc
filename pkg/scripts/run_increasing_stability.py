"""Error of the Tikhonov reconstruction across bandwidth K and attenuation alpha.

Writes one CSV row per (K, alpha, seed) cell plus a manifest with the fitted
dominance constant and the two trend verdicts, then prints the median-error
table.

    python scripts/run_increasing_stability.py --out out/stability [--full] [--seeds 0 1 2 3 4]
"""

from __future__ import annotations

import argparse
from pathlib import Path

from layered_isp.medium import MediumConfig
from layered_isp.sources import SourceGrid, demo_pair
from layered_isp.stability import dominance_constant, median_errors, reports_to_csv, run_sweep, trend_verdicts, write_manifest

SMALL = ([5, 10, 20, 40], [0, 1, 2, 4])
FULL = ([2, 3, 5, 8, 12, 20, 30, 40], [0, 0.25, 0.5, 1, 1.5, 2, 2.5, 3, 4])


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="out/stability")
    p.add_argument("--full", action="store_true", help="8 x 9 grid instead of 4 x 4")
    p.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    p.add_argument("--eps2", type=float, default=1e-6)
    p.add_argument("--c-n", type=float, default=1.5)
    p.add_argument("--jobs", type=int, default=1)
    args = p.parse_args()

    K_list, alpha_list = FULL if args.full else SMALL
    medium = MediumConfig(1.0, args.c_n)
    sp = demo_pair(SourceGrid.for_bandwidth(max(K_list), medium.c_max))
    reports = run_sweep(medium, sp, K_list, alpha_list, args.eps2, args.seeds, jobs=args.jobs)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    reports_to_csv(reports, out / "sweep.csv")
    verdicts = trend_verdicts(reports)
    C = dominance_constant(reports)
    grid = {"K_list": K_list, "alpha_list": alpha_list, "seeds": args.seeds, "eps2": args.eps2, "n": sp.grid.n}
    write_manifest(out / "sweep_manifest.json", grid, {"dominance_C": C}, verdicts)

    med = median_errors(reports)
    print("median err_l2; rows K, columns alpha")
    print("K \\ alpha " + " ".join(f"{a:>9}" for a in alpha_list))
    for K in K_list:
        print(f"{K:9} " + " ".join(f"{med[(float(K), float(a))]:9.2e}" for a in alpha_list))
    print(f"dominance C = {C:.3e}; K trend {verdicts['K_trend_holds']}, alpha trend {verdicts['alpha_trend_holds']}")


if __name__ == "__main__":
    main()
