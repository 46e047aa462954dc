"""Stability functionals, closed-form bounds and the increasing-stability sweep.

Every bound is evaluated with its generic constant set to 1; constants are
fitted afterwards from sweep data (``dominance_constant``), because the
estimates only hold up to unspecified constants.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .greens import (
    BoundaryDataset,
    boundary_data,
    boundary_values,
    check_resolution,
    frequency_grid,
    log_inverse,
)
from .inversion import TikhonovSolver, add_noise, assemble, invert
from .medium import MediumConfig
from .sources import SourcePair, constant_M, l2_error, sobolev_norm

log = logging.getLogger(__name__)

TWO_QUARTER = 2.0**0.25


def I_functionals(data, k: float, points: int = 2001) -> tuple[float, float]:
    """I1(k) = int_0^k |omega u(-1)|^2, I2(k) = int_0^k |omega u(1)|^2.

    ``data`` is either a BoundaryDataset (trapezoid over its grid, linear
    interpolation of the integrand at ``k``) or a callable
    ``omegas -> (d_minus, d_plus)`` sampled on a uniform grid over (0, k].
    """
    if not k > 0:
        raise ValueError("upper frequency must be positive")
    if isinstance(data, BoundaryDataset):
        om = data.omegas
        if k > om[-1] * (1 + 1e-12):
            raise ValueError(f"k={k} lies beyond the data grid (K={om[-1]})")
        out = []
        for d in (data.d_minus, data.d_plus):
            g = np.abs(d) ** 2
            sel = om <= k
            o, v = om[sel], g[sel]
            if o[-1] < k:
                o = np.append(o, k)
                v = np.append(v, np.interp(k, om, g))
            out.append(float(np.trapezoid(v, o)))
        return out[0], out[1]
    om = k * np.arange(1, points + 1) / points
    d_minus, d_plus = data(om)
    # d vanishes or stays finite as omega -> 0; extend the integrand to 0 by its first value
    om = np.concatenate([[0.0], om])
    gm = np.abs(d_minus) ** 2
    gp = np.abs(d_plus) ** 2
    gm = np.concatenate([[gm[0]], gm])
    gp = np.concatenate([[gp[0]], gp])
    return float(np.trapezoid(gm, om)), float(np.trapezoid(gp, om))


def lemma21_bound(k_modulus: float, k1: float, alpha: float, norm_f1_0: float, norm_f0_0: float, c_max: float) -> float:
    """(|k| ||f1||^2 + (|k| alpha^2 + |k|^3/3) ||f0||^2) exp(4 c_max (4 k1 + alpha))."""
    k = k_modulus
    poly = k * norm_f1_0**2 + (k * alpha**2 + k**3 / 3.0) * norm_f0_0**2
    if poly == 0:
        return 0.0
    exponent = 4.0 * c_max * (4.0 * k1 + alpha)
    if exponent + math.log(poly) > 709.0:
        return math.inf
    return poly * math.exp(exponent)


def harmonic_measure_lb(k: float, K: float) -> float:
    """Lower bound on the harmonic measure of [0, K] seen from k."""
    if not (k > 0 and K > 0):
        raise ValueError("k and K must be positive")
    if k <= TWO_QUARTER * K:
        return 0.5
    return 1.0 / (math.pi * math.sqrt((k / K) ** 4 - 1.0))


def tail_bound(k: float, alpha: float, norm_f0_2: float, norm_f1_1: float) -> float:
    """k^-1 ((1 + alpha^2) ||f0||_2^2 + ||f1||_1^2)."""
    if not k > 0:
        raise ValueError("k must be positive")
    return ((1.0 + alpha**2) * norm_f0_2**2 + norm_f1_1**2) / k


def k_split(K: float, E: float) -> float:
    """Intermediate frequency: K^(2/3) E^(1/4) if 2^(1/4) K^(1/3) < E^(1/4), else K."""
    if not K > 1:
        raise ValueError("bandwidth K must exceed 1")
    if not E > 0:
        raise ValueError("E must be positive")
    if TWO_QUARTER * K ** (1.0 / 3.0) < E**0.25:
        return K ** (2.0 / 3.0) * E**0.25
    return float(K)


def theorem_rhs(eps2: float, K: float, E: float | None, alpha: float, M: float) -> tuple[float, bool]:
    """exp(alpha^2) (eps^2 + (alpha^2 + 1) M^2 / (K^(2/3) E^(1/4) + 1)).

    Returns (value, flagged); ``flagged`` is True when E is undefined
    (eps2 >= 1) and E = 0 was substituted.
    """
    if not K > 1:
        raise ValueError("bandwidth K must exceed 1")
    flagged = E is None or not (eps2 < 1)
    E = 0.0 if flagged else E
    tail = (alpha**2 + 1.0) * M**2 / (K ** (2.0 / 3.0) * E**0.25 + 1.0)
    return math.exp(alpha**2) * (eps2 + tail), flagged


def empirical_tail(cfg: MediumConfig, sp: SourcePair, k: float, upper: float = 8.0, per_unit: float = 8.0) -> float:
    """int_k^{upper*k} |omega u(-1)|^2 + |omega u(1)|^2 d omega via the forward model."""
    om = np.linspace(k, upper * k, int(np.ceil(per_unit * (upper - 1) * k)) + 1)
    dm, dp = boundary_values(cfg, sp, om)
    return float(np.trapezoid(np.abs(dm) ** 2 + np.abs(dp) ** 2, om))


@dataclass
class StabilityReport:
    K: float
    alpha: float
    seed: int
    eps2: float
    E: float | None
    k_split: float
    I1: float
    I2: float
    I: float
    mu_lb: float
    lemma21_rhs: float
    tail_rhs: float
    thm_rhs: float
    err_l2: float
    M: float
    rel_err_f0: float | None = None
    rel_err_f1: float | None = None
    lam: float | None = None
    warning: str | None = None


REPORT_FIELDS = [f.name for f in fields(StabilityReport)]


def _error_pair(truth: SourcePair, rec: SourcePair) -> SourcePair:
    return SourcePair(truth.grid, truth.f0 - rec.f0, truth.f1 - rec.f1, truth.support_margin)


def evaluate_cell(
    cfg: MediumConfig,
    truth: SourcePair,
    K: float,
    eps2: float,
    seed: int,
    dataset: BoundaryDataset | None = None,
    solver: TikhonovSolver | None = None,
) -> StabilityReport:
    """Synthesize data, add noise, invert and evaluate every bound for one cell."""
    if dataset is None:
        dataset = boundary_data(cfg, truth, frequency_grid(K, c_max=cfg.c_max))
    noisy = add_noise(dataset, eps2, seed)
    res = invert(cfg, truth.grid, noisy, math.sqrt(eps2), truth=truth, support_margin=truth.support_margin, solver=solver)
    err = _error_pair(truth, res.recovered)
    E = log_inverse(eps2)
    ks = k_split(K, E) if E else float(K)
    I1, I2 = I_functionals(lambda om: boundary_values(cfg, err, om, check=False), ks)
    g = truth.grid
    n1_0, n0_0 = sobolev_norm(err.f1, 0, g), sobolev_norm(err.f0, 0, g)
    M = constant_M(truth)
    thm, flagged = theorem_rhs(eps2, K, E, cfg.alpha, M)
    warning = res.warning
    if flagged:
        warning = (warning + "; " if warning else "") + "E undefined, used E = 0"
    return StabilityReport(
        K=float(K),
        alpha=cfg.alpha,
        seed=int(seed),
        eps2=eps2,
        E=E,
        k_split=ks,
        I1=I1,
        I2=I2,
        I=I1 + I2,
        mu_lb=harmonic_measure_lb(ks, K),
        lemma21_rhs=lemma21_bound(ks, ks, cfg.alpha, n1_0, n0_0, cfg.c_max),
        tail_rhs=tail_bound(ks, cfg.alpha, sobolev_norm(err.f0, 2, g), sobolev_norm(err.f1, 1, g)),
        thm_rhs=thm,
        err_l2=l2_error(truth, res.recovered),
        M=M,
        rel_err_f0=res.rel_err_f0,
        rel_err_f1=res.rel_err_f1,
        lam=res.lam,
        warning=warning,
    )


def _run_block(args) -> list[StabilityReport]:
    c_p, c_n, alpha, truth, K, eps2, seeds = args
    cfg = MediumConfig(c_p, c_n, alpha)
    omegas = frequency_grid(K, c_max=cfg.c_max)
    ds = boundary_data(cfg, truth, omegas)
    solver = TikhonovSolver(assemble(cfg, truth.grid, omegas, truth.support_margin))
    return [evaluate_cell(cfg, truth, K, eps2, s, ds, solver) for s in seeds]


def run_sweep(
    medium: MediumConfig,
    truth: SourcePair,
    K_list: Sequence[float],
    alpha_list: Sequence[float],
    eps_target: float,
    seeds: Sequence[int],
    jobs: int = 1,
) -> list[StabilityReport]:
    """Every (K, alpha, seed) cell; ``medium`` supplies c_p, c_n (its alpha is ignored).

    ``eps_target`` is the injected noise energy eps^2.  Reports come back
    sorted by (K, alpha, seed) regardless of ``jobs``.
    """
    if not K_list or not alpha_list or not seeds:
        raise ValueError("sweep needs non-empty K, alpha and seed lists")
    if any(K <= 1 for K in K_list):
        raise ValueError("every K must exceed 1")
    if not 0 < eps_target < 1:
        raise ValueError("noise level eps^2 must lie in (0, 1)")
    check_resolution(truth.grid, medium.c_max, max(K_list))
    blocks = [(medium.c_p, medium.c_n, float(a), truth, float(K), eps_target, list(seeds)) for K in K_list for a in alpha_list]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_run_block, blocks))
    else:
        results = [_run_block(b) for b in blocks]
    reports = [r for block in results for r in block]
    reports.sort(key=lambda r: (r.K, r.alpha, r.seed))
    return reports


def median_errors(reports: Iterable[StabilityReport]) -> dict[tuple[float, float], float]:
    cells: dict[tuple[float, float], list[float]] = {}
    for r in reports:
        cells.setdefault((r.K, r.alpha), []).append(r.err_l2)
    return {key: float(np.median(v)) for key, v in sorted(cells.items())}


def is_monotone(values: Sequence[float], increasing: bool, jitter: float = 0.05) -> bool:
    """Non-decreasing (or non-increasing) allowing each step a relative jitter."""
    for a, b in zip(values, values[1:]):
        if increasing and b < a * (1 - jitter):
            return False
        if not increasing and b > a * (1 + jitter):
            return False
    return True


def trend_verdicts(reports: Sequence[StabilityReport], jitter: float = 0.05) -> dict:
    """Trend verdicts: the error should fall along K and rise along alpha."""
    med = median_errors(reports)
    Ks = sorted({k for k, _ in med})
    alphas = sorted({a for _, a in med})
    along_K = {}
    for a in alphas:
        series = [med[(K, a)] for K in Ks]
        along_K[str(a)] = {"K": Ks, "median_err": series, "non_increasing": is_monotone(series, False, jitter)}
    along_alpha = {}
    for K in Ks:
        series = [med[(K, a)] for a in alphas]
        along_alpha[str(K)] = {"alpha": alphas, "median_err": series, "non_decreasing": is_monotone(series, True, jitter)}
    return {
        "along_K": along_K,
        "along_alpha": along_alpha,
        "K_trend_holds": all(v["non_increasing"] for v in along_K.values()) if len(Ks) > 1 else None,
        "alpha_trend_holds": all(v["non_decreasing"] for v in along_alpha.values()) if len(alphas) > 1 else None,
    }


def dominance_constant(reports: Sequence[StabilityReport]) -> float:
    """Smallest C with median err_l2 <= C * thm_rhs in every (K, alpha) cell."""
    med = median_errors(reports)
    rhs = {(r.K, r.alpha): r.thm_rhs for r in reports}
    return max(med[key] / rhs[key] for key in med)


def fit_growth_constant(alphas: Sequence[float], ratios: Sequence[float]) -> dict:
    """Fit r(alpha) / r(0) ~ exp(C alpha^2) by least squares in log space.

    Returns the fitted C, the worst multiplicative misfit (residual factor)
    and the smallest C making r(alpha) <= r(0) exp(C alpha^2) hold exactly.
    """
    a = np.asarray(alphas, dtype=float)
    r = np.asarray(ratios, dtype=float)
    if a[0] != 0:
        raise ValueError("the first attenuation value must be 0 (reference)")
    y = np.log(r / r[0])[1:]
    x = a[1:] ** 2
    C = float(x @ y / (x @ x))
    resid = y - C * x
    return {
        "C": C,
        "residual_factor": float(np.exp(np.max(np.abs(resid)))),
        "C_dominating": float(np.max(y / x)),
    }


def reports_to_csv(reports: Sequence[StabilityReport], path, header_comment: str | None = None) -> None:
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        w = csv.writer(fh)
        w.writerow(REPORT_FIELDS)
        for r in reports:
            row = asdict(r)
            w.writerow(["" if row[k] is None else (repr(row[k]) if isinstance(row[k], float) else row[k]) for k in REPORT_FIELDS])


def write_manifest(path, grid: dict, fitted: dict, verdicts: dict, extra: dict | None = None) -> None:
    meta = {"grid": grid, "fitted_constants": fitted, "verdicts": verdicts}
    if extra:
        meta.update(extra)
    Path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
