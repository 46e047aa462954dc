"""Source pairs (f0, f1) sampled on a uniform grid over [-1, 1]."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np

DEFAULT_MARGIN = 0.1

Bump = tuple[float, float, float]  # (center, width, amplitude)


@dataclass(frozen=True)
class SourceGrid:
    n: int

    def __post_init__(self):
        if self.n < 33 or self.n % 2 == 0:
            raise ValueError(f"grid size must be odd and >= 33, got {self.n}")

    @property
    def h(self) -> float:
        return 2.0 / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        # built from integers so that the middle node is exactly 0.0
        j = np.arange(self.n)
        return (2 * j - (self.n - 1)) / (self.n - 1)

    @property
    def weights(self) -> np.ndarray:
        """Composite trapezoid weights."""
        w = np.full(self.n, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w

    def support_mask(self, margin: float = DEFAULT_MARGIN) -> np.ndarray:
        return np.abs(self.x) < 1.0 - margin

    @classmethod
    def for_bandwidth(cls, K: float, c_max: float, nodes_per_wavelength: int = 20, n_min: int = 33):
        """Smallest odd grid resolving the shortest wavelength 2*pi/(c_max*K)."""
        wavelength = 2 * np.pi / (c_max * K)
        intervals = int(np.ceil(2.0 * nodes_per_wavelength / wavelength))
        n = max(intervals + 1, n_min)
        return cls(n if n % 2 else n + 1)


@dataclass(frozen=True)
class SourcePair:
    grid: SourceGrid
    f0: np.ndarray
    f1: np.ndarray
    support_margin: float = DEFAULT_MARGIN

    def __post_init__(self):
        f0 = np.asarray(self.f0, dtype=float)
        f1 = np.asarray(self.f1, dtype=float)
        if f0.shape != (self.grid.n,) or f1.shape != (self.grid.n,):
            raise ValueError("source samples must match the grid size")
        if not (0 < self.support_margin < 1):
            raise ValueError("support margin must lie in (0, 1)")
        if not (np.all(np.isfinite(f0)) and np.all(np.isfinite(f1))):
            raise ValueError("source samples must be finite")
        outside = ~self.grid.support_mask(self.support_margin)
        if np.any(f0[outside] != 0) or np.any(f1[outside] != 0):
            raise ValueError(f"sources must vanish within {self.support_margin} of the endpoints")
        object.__setattr__(self, "f0", f0)
        object.__setattr__(self, "f1", f1)

    @classmethod
    def zeros(cls, grid: SourceGrid, support_margin: float = DEFAULT_MARGIN):
        return cls(grid, np.zeros(grid.n), np.zeros(grid.n), support_margin)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def scaled(self, factor: float) -> "SourcePair":
        return SourcePair(self.grid, factor * self.f0, factor * self.f1, self.support_margin)

    def to_csv(self, path, header_comment: str | None = None) -> None:
        with open(path, "w", newline="") as fh:
            if header_comment:
                fh.write(f"# {header_comment}\n")
            w = csv.writer(fh)
            w.writerow(["x", "f0", "f1"])
            for row in zip(self.x, self.f0, self.f1):
                w.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path, support_margin: float = DEFAULT_MARGIN) -> "SourcePair":
        rows = []
        with open(path, newline="") as fh:
            reader = csv.reader(line for line in fh if not line.startswith("#"))
            header = next(reader, None)
            if header != ["x", "f0", "f1"]:
                raise ValueError(f"{path}: expected header x,f0,f1, got {header}")
            for row in reader:
                rows.append([float(v) for v in row])
        data = np.array(rows)
        if data.ndim != 2 or data.shape[1] != 3:
            raise ValueError(f"{path}: no source samples")
        grid = SourceGrid(len(data))
        if np.any(np.diff(data[:, 0]) <= 0):
            raise ValueError(f"{path}: nodes must be strictly increasing")
        if not np.allclose(data[:, 0], grid.x, atol=1e-12):
            raise ValueError(f"{path}: nodes are not a uniform grid on [-1, 1]")
        return cls(grid, data[:, 1], data[:, 2], support_margin)


@dataclass(frozen=True)
class SourceSplitting:
    f1p: np.ndarray
    f1n: np.ndarray
    f0p: np.ndarray
    f0n: np.ndarray


def bump(x: np.ndarray, center: float, width: float, amplitude: float) -> np.ndarray:
    """C^2 polynomial bump a*(1 - s^2)^3 with s = (x - center)/width, zero for |s| >= 1."""
    s = (np.asarray(x, dtype=float) - center) / width
    return np.where(np.abs(s) < 1.0, amplitude * (1.0 - s * s) ** 3, 0.0)


def _bumps(x, specs: Sequence[Bump], margin: float) -> np.ndarray:
    out = np.zeros_like(x)
    for center, width, amplitude in specs:
        if width <= 0:
            raise ValueError(f"bump width must be positive, got {width}")
        if abs(center) + width > 1.0 - margin:
            raise ValueError(
                f"bump (center={center}, width={width}) leaves the support (-1+{margin}, 1-{margin})"
            )
        out += bump(x, center, width, amplitude)
    return out


def make_bump_pair(
    grid: SourceGrid,
    f0_bumps: Sequence[Bump] = (),
    f1_bumps: Sequence[Bump] = (),
    support_margin: float = DEFAULT_MARGIN,
) -> SourcePair:
    x = grid.x
    return SourcePair(grid, _bumps(x, f0_bumps, support_margin), _bumps(x, f1_bumps, support_margin), support_margin)


DEMO_F0 = ((-0.4, 0.3, 1.0), (0.35, 0.25, 0.6))
DEMO_F1 = ((-0.3, 0.25, 0.8), (0.45, 0.3, -1.0))


def demo_pair(grid: SourceGrid) -> SourcePair:
    """Two-bump sources straddling the interface, used by the experiments."""
    return make_bump_pair(grid, DEMO_F0, DEMO_F1)


def split(sp: SourcePair) -> SourceSplitting:
    # the x = 0 node goes to the positive layer
    pos = sp.x >= 0
    return SourceSplitting(
        f1p=np.where(pos, sp.f1, 0.0),
        f1n=np.where(pos, 0.0, sp.f1),
        f0p=np.where(pos, sp.f0, 0.0),
        f0n=np.where(pos, 0.0, sp.f0),
    )


def derivative(f: np.ndarray, order: int, h: float) -> np.ndarray:
    """Central-difference derivative of order 0, 1 or 2 (second order accurate)."""
    f = np.asarray(f, dtype=float)
    if order == 0:
        return f
    if order == 1:
        return np.gradient(f, h, edge_order=2)
    if order == 2:
        d2 = np.empty_like(f)
        d2[1:-1] = (f[2:] - 2 * f[1:-1] + f[:-2]) / h**2
        # one-sided second order stencils at the ends
        d2[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / h**2
        d2[-1] = (2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]) / h**2
        return d2
    raise ValueError(f"derivative order must be 0, 1 or 2, got {order}")


def sobolev_norm(f: np.ndarray, l: int, grid: SourceGrid) -> float:
    """Discrete H^l norm: sqrt(sum_{j<=l} ||D^j f||^2) with trapezoid quadrature."""
    if l not in (0, 1, 2):
        raise ValueError(f"Sobolev index must be 0, 1 or 2, got {l}")
    w = grid.weights
    total = sum(float(w @ derivative(f, j, grid.h) ** 2) for j in range(l + 1))
    return float(np.sqrt(total))


def constant_M(sp: SourcePair) -> float:
    return max(sobolev_norm(sp.f0, 2, sp.grid) + sobolev_norm(sp.f1, 1, sp.grid), 1.0)


def l2_error(truth: SourcePair, approx: SourcePair) -> float:
    """||f0 - g0||^2 + ||f1 - g1||^2 (squared L^2 norms)."""
    g = truth.grid
    return sobolev_norm(truth.f0 - approx.f0, 0, g) ** 2 + sobolev_norm(truth.f1 - approx.f1, 0, g) ** 2
