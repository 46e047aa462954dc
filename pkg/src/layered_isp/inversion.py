"""Tikhonov reconstruction of (f0, f1) from band-limited boundary data.

The data depend linearly on the sources, so the problem is a real linear
least-squares system: rows are Re/Im parts of omega*u(-1) and omega*u(1),
columns are the source values at interior nodes of the support.  The
penalty is lam^2 (||f0''||^2 + ||f1'||^2) with zero boundary values outside
the support, which makes the penalty operator injective.  Both norms are
trapezoid-weighted so the misfit equals the data-energy functional.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg as sla

from .greens import BoundaryDataset, boundary_kernels, layer_speed
from .medium import MediumConfig
from .sources import DEFAULT_MARGIN, SourceGrid, SourcePair, sobolev_norm

log = logging.getLogger(__name__)

LAMBDA_RANGE = (1e-12, 1e4)
MAX_BISECTIONS = 60
DISCREPANCY_TOL = 0.01


@dataclass(frozen=True)
class ForwardMatrix:
    matrix: np.ndarray  # (4 * n_omega, 2 * n_support)
    omegas: np.ndarray
    grid: SourceGrid
    support: np.ndarray  # boolean mask over grid nodes
    row_weights: np.ndarray  # sqrt of frequency trapezoid weights, per row
    medium: MediumConfig
    support_margin: float = DEFAULT_MARGIN

    @property
    def n_support(self) -> int:
        return int(self.support.sum())

    def unknowns(self, sp: SourcePair) -> np.ndarray:
        return np.concatenate([sp.f0[self.support], sp.f1[self.support]])

    def to_pair(self, x: np.ndarray) -> SourcePair:
        m = self.n_support
        f0 = np.zeros(self.grid.n)
        f1 = np.zeros(self.grid.n)
        f0[self.support] = x[:m]
        f1[self.support] = x[m:]
        return SourcePair(self.grid, f0, f1, self.support_margin)

    def apply(self, sp: SourcePair) -> np.ndarray:
        return self.matrix @ self.unknowns(sp)


def data_vector(ds: BoundaryDataset) -> np.ndarray:
    return np.concatenate([ds.d_minus.real, ds.d_minus.imag, ds.d_plus.real, ds.d_plus.imag])


def vector_to_data(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    re_m, im_m, re_p, im_p = np.split(np.asarray(v), 4)
    return re_m + 1j * im_m, re_p + 1j * im_p


def _trapezoid_weights(t: np.ndarray) -> np.ndarray:
    w = np.zeros_like(t)
    dt = np.diff(t)
    w[:-1] += 0.5 * dt
    w[1:] += 0.5 * dt
    return w


def assemble(cfg: MediumConfig, grid: SourceGrid, omegas, support_margin: float = DEFAULT_MARGIN) -> ForwardMatrix:
    omegas = np.asarray(omegas, dtype=float)
    support = grid.support_mask(support_margin)
    y = grid.x[support]
    w = grid.weights[support]
    km, kp = boundary_kernels(cfg, omegas, y)
    f0_mult = (-cfg.alpha + 1j * np.outer(omegas, layer_speed(cfg, y))) * w
    f1_mult = -w
    blocks = []
    for kern in (km, kp):
        c0 = kern * f0_mult
        c1 = kern * f1_mult
        blocks.append(np.hstack([c0.real, c1.real]))
        blocks.append(np.hstack([c0.imag, c1.imag]))
    A = np.vstack([blocks[0], blocks[1], blocks[2], blocks[3]])
    rw = np.tile(np.sqrt(_trapezoid_weights(omegas)), 4)
    return ForwardMatrix(A, omegas, grid, support, rw, cfg, support_margin)


def penalty_operator(n_support: int, h: float) -> np.ndarray:
    """blockdiag(sqrt(h) D2, sqrt(h) D1) on support values padded with zeros."""
    m = n_support
    d2 = (np.diag(np.full(m, -2.0)) + np.diag(np.ones(m - 1), 1) + np.diag(np.ones(m - 1), -1)) / h**2
    d1 = np.zeros((m + 1, m))
    idx = np.arange(m)
    d1[idx, idx] = 1.0 / h
    d1[idx + 1, idx] = -1.0 / h
    return np.sqrt(h) * sla.block_diag(d2, d1)


@dataclass
class ReconstructionResult:
    recovered: SourcePair
    lam: float
    residual: float
    rel_err_f0: float | None = None
    rel_err_f1: float | None = None
    iterations: int = 0
    warning: str | None = None

    def errors_against(self, truth: SourcePair) -> "ReconstructionResult":
        g = truth.grid
        for name in ("f0", "f1"):
            t = getattr(truth, name)
            r = getattr(self.recovered, name)
            den = sobolev_norm(t, 0, g)
            num = sobolev_norm(r - t, 0, g)
            setattr(self, f"rel_err_{name}", num / den if den > 0 else num)
        return self

    def summary(self) -> dict:
        return {
            "lambda": self.lam,
            "residual": self.residual,
            "rel_err_f0": self.rel_err_f0,
            "rel_err_f1": self.rel_err_f1,
            "iterations": self.iterations,
            "warning": self.warning,
        }

    def to_files(self, csv_path, json_path, truth: SourcePair | None = None, header_comment=None, extra=None):
        rec = self.recovered
        t0 = truth.f0 if truth is not None else np.full(rec.grid.n, np.nan)
        t1 = truth.f1 if truth is not None else np.full(rec.grid.n, np.nan)
        with open(csv_path, "w", newline="") as fh:
            if header_comment:
                fh.write(f"# {header_comment}\n")
            w = csv.writer(fh)
            w.writerow(["x", "f0_true", "f0_rec", "f1_true", "f1_rec"])
            for row in zip(rec.x, t0, rec.f0, t1, rec.f1):
                w.writerow([repr(float(v)) for v in row])
        meta = self.summary()
        if extra:
            meta.update(extra)
        Path(json_path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


class TikhonovSolver:
    """Standard-form Tikhonov via one SVD; each lambda costs O(size)."""

    def __init__(self, A: ForwardMatrix):
        self.A = A
        L = penalty_operator(A.n_support, A.grid.h)
        self._R = np.linalg.qr(L, mode="r")
        Aw = A.row_weights[:, None] * A.matrix
        At = sla.solve_triangular(self._R, Aw.T, trans="T", lower=False).T
        self._U, self._s, self._Vt = np.linalg.svd(At, full_matrices=False)

    @property
    def norm(self) -> float:
        return float(self._s[0])

    def _project(self, d: np.ndarray):
        dw = self.A.row_weights * d
        beta = self._U.T @ dw
        perp = dw - self._U @ beta
        perp2 = float(perp @ perp)
        return beta, perp2

    def residual(self, d: np.ndarray, lam: float) -> float:
        beta, perp2 = self._project(d)
        f = lam**2 / (self._s**2 + lam**2)
        return float(np.sqrt(np.sum((f * beta) ** 2) + perp2))

    def solve(self, d: np.ndarray, lam: float) -> np.ndarray:
        if not lam > 0:
            raise ValueError(f"regularisation weight must be positive, got {lam}")
        beta, _ = self._project(d)
        z = self._Vt.T @ (self._s / (self._s**2 + lam**2) * beta)
        return sla.solve_triangular(self._R, z, lower=False)

    def result(self, d: np.ndarray, lam: float, iterations: int = 0, warning: str | None = None):
        x = self.solve(d, lam)
        return ReconstructionResult(self.A.to_pair(x), lam, self.residual(d, lam), iterations=iterations, warning=warning)


def tikhonov_solve(A: ForwardMatrix, d: np.ndarray, lam: float) -> ReconstructionResult:
    """Minimise ||W(Ax - d)||^2 + lam^2 (||D2 x_f0||^2 + ||D1 x_f1||^2)."""
    return TikhonovSolver(A).result(np.asarray(d, dtype=float), lam)


def discrepancy_lambda(solver: TikhonovSolver, d: np.ndarray, delta: float, lambda_range=LAMBDA_RANGE):
    """Bisection on log(lam) so that the weighted residual equals ``delta``.

    ``lambda_range`` is relative to ||A||.  Returns (lam, iterations, warning).
    """
    scale = solver.norm
    lo, hi = np.log(lambda_range[0] * scale), np.log(lambda_range[1] * scale)
    r_lo = solver.residual(d, np.exp(lo))
    r_hi = solver.residual(d, np.exp(hi))
    # an endpoint already within tolerance (e.g. pure-noise data, where
    # ||d|| == delta and lam -> inf is the right answer) needs no bisection
    for end, r in ((hi, r_hi), (lo, r_lo)):
        if abs(r / delta - 1.0) < DISCREPANCY_TOL:
            return float(np.exp(end)), 0, None
    if r_lo > delta:
        return float(np.exp(lo)), 0, f"residual {r_lo:.3e} exceeds noise level {delta:.3e} at the smallest lambda"
    if r_hi < delta:
        return float(np.exp(hi)), 0, f"residual {r_hi:.3e} stays below noise level {delta:.3e} at the largest lambda"
    it = 0
    mid = 0.5 * (lo + hi)
    for it in range(1, MAX_BISECTIONS + 1):
        mid = 0.5 * (lo + hi)
        r = solver.residual(d, np.exp(mid))
        if abs(r / delta - 1.0) < DISCREPANCY_TOL:
            return float(np.exp(mid)), it, None
        if r > delta:
            hi = mid
        else:
            lo = mid
    return float(np.exp(mid)), it, "discrepancy bisection did not converge"


def invert(
    cfg: MediumConfig,
    grid: SourceGrid,
    dataset: BoundaryDataset,
    noise_level: float = 0.0,
    truth: SourcePair | None = None,
    support_margin: float = DEFAULT_MARGIN,
    solver: TikhonovSolver | None = None,
    lambda_range=LAMBDA_RANGE,
) -> ReconstructionResult:
    """Reconstruct sources; ``noise_level`` is the noise norm sqrt(noise eps^2).

    Positive noise selects lambda by the discrepancy principle; zero noise uses
    lam = 1e-8 * ||A||.
    """
    if noise_level < 0:
        raise ValueError("noise level must be non-negative")
    if solver is None:
        solver = TikhonovSolver(assemble(cfg, grid, dataset.omegas, support_margin))
    d = data_vector(dataset)
    if noise_level == 0:
        res = solver.result(d, 1e-8 * solver.norm)
    else:
        lam, it, warn = discrepancy_lambda(solver, d, noise_level, lambda_range)
        if warn:
            log.warning(warn)
        res = solver.result(d, lam, it, warn)
    if truth is not None:
        res.errors_against(truth)
    return res


def add_noise(dataset: BoundaryDataset, target_eps2: float, seed: int) -> BoundaryDataset:
    """Add complex Gaussian noise whose data energy is exactly ``target_eps2``."""
    if not target_eps2 > 0:
        raise ValueError("noise energy must be positive")
    rng = np.random.default_rng(seed)
    n = len(dataset.omegas)
    eta = rng.standard_normal((4, n))
    noise_m = eta[0] + 1j * eta[1]
    noise_p = eta[2] + 1j * eta[3]
    e = float(np.trapezoid(np.abs(noise_m) ** 2 + np.abs(noise_p) ** 2, dataset.omegas))
    s = np.sqrt(target_eps2 / e)
    return dataset.with_data(dataset.d_minus + s * noise_m, dataset.d_plus + s * noise_p, noise_eps2=target_eps2)
