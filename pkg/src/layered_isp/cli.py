"""Command-line front end.

    layered-isp forward    --config cfg.json [--out DIR]
    layered-isp crosscheck --config cfg.json [--out DIR]
    layered-isp invert     --config cfg.json [--out DIR]
    layered-isp sweep      --config cfg.json [--out DIR] [--jobs N]
    layered-isp bounds     --K 10 --eps2 1e-8 [--alpha 0] [--M 1] [--k 20]

Exit codes: 0 success, 1 a checked property failed, 2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig, load_config
from .greens import SIGMA, boundary_data, frequency_grid, log_inverse
from .inversion import add_noise, invert
from .medium import MediumConfig
from .stability import (
    dominance_constant,
    harmonic_measure_lb,
    k_split,
    reports_to_csv,
    run_sweep,
    theorem_rhs,
    trend_verdicts,
    write_manifest,
)
from .timedomain import solve_wave, trace_transform

log = logging.getLogger("layered_isp")

EXIT_OK, EXIT_FAILED, EXIT_INVALID = 0, 1, 2
CROSSCHECK_MIN_N = 201


def _out_dir(cfg: ExperimentConfig, out: str | None) -> Path:
    d = Path(out) if out else cfg.base_dir / cfg.output
    d.mkdir(parents=True, exist_ok=True)
    return d


def _header(cfg: ExperimentConfig) -> str:
    return f"config_sha256={cfg.digest}"


def _dataset(cfg: ExperimentConfig, medium: MediumConfig | None = None):
    medium = medium or cfg.medium
    if cfg.K is None:
        raise ConfigError("omegas.K is required")
    grid, sp = cfg.sources_grid(cfg.K)
    omegas = frequency_grid(cfg.K, cfg.omega_count, medium.c_max)
    return grid, sp, boundary_data(medium, sp, omegas)


def cmd_forward(cfg: ExperimentConfig, out: Path, args) -> int:
    _, _, ds = _dataset(cfg)
    ds.to_files(out / "boundary.csv", out / "boundary.json", _header(cfg), {"config_sha256": cfg.digest})
    print(f"wrote {out / 'boundary.csv'} (eps2={ds.epsilon2:.6e}, E={ds.E})")
    return EXIT_OK


def crosscheck(cfg: ExperimentConfig) -> tuple[dict, np.ndarray, np.ndarray, np.ndarray]:
    med = cfg.medium
    if not (med.c_p == med.c_n == 1.0):
        raise ConfigError(
            "crosscheck needs c_p == c_n == 1: the time-domain wave equation has no layer speeds, "
            "so the Fourier identity only matches the homogeneous Helmholtz model"
        )
    cc = cfg.crosscheck
    if cfg.n is None and "csv" not in cfg.sources:
        # the leapfrog traces need a finer grid than the quadrature rule alone asks for
        cfg.n = max(CROSSCHECK_MIN_N, cfg.grid(cc.omega_max).n)
    grid, sp = cfg.sources_grid(cc.omega_max)
    omegas = np.linspace(cc.omega_min, cc.omega_max, cc.count)
    fd = boundary_data(med, sp, omegas)
    ws = solve_wave(med, sp, T=cc.T)
    td = trace_transform(ws, omegas)
    ref_m, ref_p = SIGMA * fd.d_minus, SIGMA * fd.d_plus
    num = np.sum(np.abs(td.d_minus - ref_m) ** 2 + np.abs(td.d_plus - ref_p) ** 2)
    den = np.sum(np.abs(ref_m) ** 2 + np.abs(ref_p) ** 2)
    rel = float(np.sqrt(num / den)) if den > 0 else float(np.sqrt(num))
    err_m = np.abs(td.d_minus - ref_m) / np.maximum(np.abs(ref_m), 1e-300)
    err_p = np.abs(td.d_plus - ref_p) / np.maximum(np.abs(ref_p), 1e-300)
    if den == 0:
        err_m = np.abs(td.d_minus)
        err_p = np.abs(td.d_plus)
    report = {
        "rel_l2_mismatch": rel,
        "threshold": cc.threshold,
        "pass": bool(rel <= cc.threshold),
        "T": ws.T,
        "h": ws.h,
        "dt": ws.dt,
        "alpha": med.alpha,
    }
    return report, omegas, err_m, err_p


def cmd_crosscheck(cfg: ExperimentConfig, out: Path, args) -> int:
    report, omegas, err_m, err_p = crosscheck(cfg)
    with open(out / "crosscheck.csv", "w") as fh:
        fh.write(f"# {_header(cfg)}\n")
        fh.write("omega,rel_err_minus,rel_err_plus\n")
        for row in zip(omegas, err_m, err_p):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    report["config_sha256"] = cfg.digest
    (out / "crosscheck.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(f"crosscheck relative L2 mismatch {report['rel_l2_mismatch']:.3e} ({'pass' if report['pass'] else 'FAIL'})")
    return EXIT_OK if report["pass"] else EXIT_FAILED


def reconstruct(cfg: ExperimentConfig):
    grid, sp, ds = _dataset(cfg)
    seed = cfg.seeds[0]
    if cfg.eps2_target > 0:
        ds = add_noise(ds, cfg.eps2_target, seed)
    res = invert(cfg.medium, grid, ds, math.sqrt(cfg.eps2_target), truth=sp, support_margin=sp.support_margin, lambda_range=cfg.lambda_bounds)
    return sp, ds, res, seed


def cmd_invert(cfg: ExperimentConfig, out: Path, args) -> int:
    sp, ds, res, seed = reconstruct(cfg)
    extra = {
        "eps2": cfg.eps2_target,
        "K": ds.K,
        "alpha": cfg.medium.alpha,
        "seed": seed,
        "config_sha256": cfg.digest,
    }
    res.to_files(out / "reconstruction.csv", out / "reconstruction.json", sp, _header(cfg), extra)
    print(f"lambda={res.lam:.3e} rel_err_f0={res.rel_err_f0:.3e} rel_err_f1={res.rel_err_f1:.3e}")
    return EXIT_OK


def cmd_sweep(cfg: ExperimentConfig, out: Path, args) -> int:
    if not cfg.K_list or not cfg.alpha_list:
        raise ConfigError("sweep.K_list and sweep.alpha_list must be non-empty")
    if not cfg.eps2_target > 0:
        raise ConfigError("sweep needs noise.eps2_target > 0")
    grid, sp = cfg.sources_grid(max(cfg.K_list))
    reports = run_sweep(cfg.medium, sp, cfg.K_list, cfg.alpha_list, cfg.eps2_target, cfg.seeds, jobs=args.jobs)
    reports_to_csv(reports, out / "sweep.csv", _header(cfg))
    verdicts = trend_verdicts(reports)
    fitted = {"dominance_C": dominance_constant(reports)}
    grid_meta = {
        "K_list": cfg.K_list,
        "alpha_list": cfg.alpha_list,
        "seeds": cfg.seeds,
        "eps2": cfg.eps2_target,
        "n": grid.n,
        "medium": {"c_p": cfg.medium.c_p, "c_n": cfg.medium.c_n},
    }
    write_manifest(out / "sweep_manifest.json", grid_meta, fitted, verdicts, {"config_sha256": cfg.digest})
    print(
        f"{len(reports)} cells; dominance C={fitted['dominance_C']:.3e}; "
        f"K trend {verdicts['K_trend_holds']}, alpha trend {verdicts['alpha_trend_holds']}"
    )
    return EXIT_OK


def cmd_bounds(args) -> int:
    if not args.K > 1:
        raise ConfigError("--K must exceed 1")
    if args.E is not None:
        E = args.E
        eps2 = math.exp(-2 * E)
    elif args.eps2 is not None:
        eps2 = args.eps2
        E = log_inverse(eps2)
    else:
        raise ConfigError("give --E or --eps2")
    out = {"K": args.K, "E": E, "eps2": eps2, "alpha": args.alpha, "M": args.M}
    if E is not None and E > 0:
        out["k_split"] = k_split(args.K, E)
    k = args.k if args.k is not None else out.get("k_split", args.K)
    out["k"] = k
    out["harmonic_measure_lb"] = harmonic_measure_lb(k, args.K)
    out["theorem_rhs"], out["E_flagged"] = theorem_rhs(eps2, args.K, E, args.alpha, args.M)
    print(json.dumps(out, indent=2, sort_keys=True))
    return EXIT_OK


COMMANDS = {"forward": cmd_forward, "crosscheck": cmd_crosscheck, "invert": cmd_invert, "sweep": cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="layered-isp", description="Inverse source problem in a two-layer attenuated medium")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON experiment config")
        sp.add_argument("--out", help="output directory (default: config 'output')")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes for sweep cells")
    b = sub.add_parser("bounds", help="evaluate the closed-form bounds")
    b.add_argument("--K", type=float, required=True)
    b.add_argument("--E", type=float)
    b.add_argument("--eps2", type=float)
    b.add_argument("--alpha", type=float, default=0.0)
    b.add_argument("--M", type=float, default=1.0)
    b.add_argument("--k", type=float, help="frequency for the harmonic-measure bound (default: k_split)")
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "bounds":
            return cmd_bounds(args)
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        cfg = load_config(args.config)
        out = _out_dir(cfg, args.out)
        return COMMANDS[args.command](cfg, out, args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
