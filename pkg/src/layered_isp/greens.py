"""Two-layer Green's function, forward field and boundary data at x = +-1.

Sign convention: the kernel G below satisfies G'' + kappa^2 G = -delta(x - y),
so the representation ``u = int G s`` with ``s = -f1 - alpha f0 + i k f0``
solves ``u'' + kappa^2 u = SIGMA * s``.  ``SIGMA`` was fixed by comparing the
representation with a direct finite-difference solve of the Helmholtz problem
(see ``scripts/fix_sign_oracle.py``).  The physical field, i.e. the Fourier
transform in time of the damped wave solution, is ``SIGMA * u``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .medium import MediumConfig, layer_kappas
from .sources import SourceGrid, SourcePair

SIGMA = -1
NODES_PER_WAVELENGTH = 20


def _check_omega(omega):
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise ValueError("frequencies must be positive")
    return omega


def green(cfg: MediumConfig, omega, x, y):
    """Outgoing two-layer Green's function G(x, y) at frequency ``omega``.

    Broadcasts over ``x``, ``y`` (and ``omega``).  Points with x == 0 or
    y == 0 use the positive-layer branch; G is continuous there.
    """
    omega = _check_omega(omega)
    kp, kn = layer_kappas(cfg, omega)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ksum = kp + kn
    xpos = x >= 0
    ypos = y >= 0
    with np.errstate(over="ignore", invalid="ignore"):
        pp = 1j * (kp - kn) / (2 * kp * ksum) * np.exp(1j * kp * (x + y)) + 1j / (2 * kp) * np.exp(
            1j * kp * np.abs(x - y)
        )
        np_ = 1j / ksum * np.exp(1j * (kp * y - kn * x))
        nn = 1j * (kn - kp) / (2 * kn * ksum) * np.exp(-1j * kn * (x + y)) + 1j / (2 * kn) * np.exp(
            1j * kn * np.abs(x - y)
        )
        pn = 1j / ksum * np.exp(1j * (kp * x - kn * y))
    return np.where(ypos, np.where(xpos, pp, np_), np.where(xpos, pn, nn))


def layer_speed(cfg: MediumConfig, y) -> np.ndarray:
    """c(y): c_p for y >= 0, c_n for y < 0."""
    return np.where(np.asarray(y) >= 0, cfg.c_p, cfg.c_n)


def source_density(cfg: MediumConfig, sp: SourcePair, omega: float) -> np.ndarray:
    """-f1 - alpha*f0 + i*k(y)*f0 on the source grid, with k(y) = c(y)*omega."""
    k = layer_speed(cfg, sp.x) * omega
    return -sp.f1 - cfg.alpha * sp.f0 + 1j * k * sp.f0


def forward_field(cfg: MediumConfig, sp: SourcePair, omega: float, x) -> complex | np.ndarray:
    """Trapezoid quadrature of int_{-1}^{1} G(x, y) s(y) dy."""
    _check_omega(omega)
    x = np.asarray(x, dtype=float)
    y = sp.x
    s = source_density(cfg, sp, omega) * sp.grid.weights
    G = green(cfg, omega, x[..., None], y)
    out = G @ s
    return complex(out) if out.ndim == 0 else out


def ode_residual(cfg: MediumConfig, sp: SourcePair, omega: float, exclude: float | None = None, stride: int = 8) -> float:
    """Relative residual of u'' + (k^2 + i alpha k) u = SIGMA * s for u = forward_field.

    u is evaluated at the source nodes and differentiated with the centered
    three-point stencil.  Nodes within ``exclude`` of the interface (default
    two grid steps) and outside the source support are skipped; every
    ``stride``-th remaining node is checked (the stencil keeps step h).
    """
    g = sp.grid
    exclude = 2 * g.h if exclude is None else exclude
    sel = g.support_mask(sp.support_margin) & (np.abs(g.x) >= exclude)
    idx = np.flatnonzero(sel)
    idx = idx[(idx > 0) & (idx < g.n - 1)][::stride]
    pts = np.concatenate([idx - 1, idx, idx + 1])
    u = forward_field(cfg, sp, omega, g.x[pts]).reshape(3, -1)
    upp = (u[0] - 2 * u[1] + u[2]) / g.h**2
    k = layer_speed(cfg, g.x[idx]) * omega
    lhs = upp + (k * k + 1j * cfg.alpha * k) * u[1]
    rhs = SIGMA * source_density(cfg, sp, omega)[idx]
    den = np.linalg.norm(rhs)
    return float(np.linalg.norm(lhs - rhs) / den) if den > 0 else float(np.linalg.norm(lhs))


def check_resolution(grid: SourceGrid, c_max: float, omega_max: float, nodes_per_wavelength: int = NODES_PER_WAVELENGTH):
    wavelength = 2 * np.pi / (c_max * omega_max)
    if wavelength / grid.h < nodes_per_wavelength * (1 - 1e-9):
        raise ValueError(
            f"grid n={grid.n} gives {wavelength / grid.h:.1f} nodes per wavelength at omega={omega_max}; "
            f"need {nodes_per_wavelength} (use SourceGrid.for_bandwidth)"
        )


def boundary_kernels(cfg: MediumConfig, omegas, y):
    """Kernels of omega*u(-1, omega) and omega*u(1, omega) in the split form.

    Returns complex arrays of shape (len(omegas), len(y)).  For y >= 0 the
    data at x = -1 see a single transmitted wave, at x = +1 a direct and an
    interface-reflected wave; for y < 0 the roles swap.  Exponents use the
    complex wavenumbers, so attenuation damps every path.
    """
    omegas = _check_omega(omegas)[:, None]
    y = np.asarray(y, dtype=float)[None, :]
    kp, kn = layer_kappas(cfg, omegas)
    ksum = kp + kn
    pos = y >= 0
    trans_m = 1j / ksum * np.exp(1j * (kp * y + kn))
    refl_m = 1j * (kn - kp) / (2 * kn * ksum) * np.exp(1j * kn * (1 - y)) + 1j / (2 * kn) * np.exp(1j * kn * (1 + y))
    refl_p = 1j * (kp - kn) / (2 * kp * ksum) * np.exp(1j * kp * (1 + y)) + 1j / (2 * kp) * np.exp(1j * kp * (1 - y))
    trans_p = 1j / ksum * np.exp(1j * (kp - kn * y))
    k_minus = omegas * np.where(pos, trans_m, refl_m)
    k_plus = omegas * np.where(pos, refl_p, trans_p)
    return k_minus, k_plus


@dataclass(frozen=True)
class BoundaryDataset:
    omegas: np.ndarray
    d_minus: np.ndarray
    d_plus: np.ndarray
    medium: MediumConfig
    noise_eps2: float = 0.0
    epsilon2: float = field(init=False)
    E: float | None = field(init=False)

    def __post_init__(self):
        om = np.asarray(self.omegas, dtype=float)
        if om.ndim != 1 or len(om) < 2:
            raise ValueError("need at least two frequencies")
        if np.any(om <= 0) or np.any(np.diff(om) <= 0):
            raise ValueError("frequencies must be positive and strictly increasing")
        object.__setattr__(self, "omegas", om)
        object.__setattr__(self, "d_minus", np.asarray(self.d_minus, dtype=complex))
        object.__setattr__(self, "d_plus", np.asarray(self.d_plus, dtype=complex))
        eps2 = data_energy(om, self.d_minus, self.d_plus)
        object.__setattr__(self, "epsilon2", eps2)
        object.__setattr__(self, "E", log_inverse(eps2))

    @property
    def K(self) -> float:
        return float(self.omegas[-1])

    def with_data(self, d_minus, d_plus, noise_eps2: float = 0.0) -> "BoundaryDataset":
        return BoundaryDataset(self.omegas, d_minus, d_plus, self.medium, noise_eps2)

    def summary(self) -> dict:
        return {
            "K": self.K,
            "epsilon2": self.epsilon2,
            "E": self.E,
            "noise_eps2": self.noise_eps2,
            "medium": self.medium.to_dict(),
        }

    def to_files(self, csv_path, json_path, header_comment: str | None = None, extra: dict | None = None) -> None:
        with open(csv_path, "w", newline="") as fh:
            if header_comment:
                fh.write(f"# {header_comment}\n")
            w = csv.writer(fh)
            w.writerow(["omega", "re_dminus", "im_dminus", "re_dplus", "im_dplus"])
            for om, dm, dp in zip(self.omegas, self.d_minus, self.d_plus):
                w.writerow([repr(float(v)) for v in (om, dm.real, dm.imag, dp.real, dp.imag)])
        meta = self.summary()
        if extra:
            meta.update(extra)
        Path(json_path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")

    @classmethod
    def from_files(cls, csv_path, json_path) -> "BoundaryDataset":
        meta = json.loads(Path(json_path).read_text())
        rows = []
        with open(csv_path, newline="") as fh:
            reader = csv.reader(line for line in fh if not line.startswith("#"))
            next(reader)
            for row in reader:
                rows.append([float(v) for v in row])
        a = np.array(rows)
        med = MediumConfig(**meta["medium"])
        return cls(a[:, 0], a[:, 1] + 1j * a[:, 2], a[:, 3] + 1j * a[:, 4], med, meta.get("noise_eps2", 0.0))


def data_energy(omegas, d_minus, d_plus) -> float:
    """Trapezoid integral of |d_minus|^2 + |d_plus|^2 over the frequency grid."""
    return float(np.trapezoid(np.abs(d_minus) ** 2 + np.abs(d_plus) ** 2, omegas))


def log_inverse(eps2: float) -> float | None:
    """E = -ln(eps) for eps = sqrt(eps2); undefined (None) unless 0 < eps2 < 1."""
    if 0 < eps2 < 1:
        return -0.5 * float(np.log(eps2))
    return None


def boundary_values(cfg: MediumConfig, sp: SourcePair, omegas, check: bool = True, chunk: int = 512):
    """omega*u(-1, omega), omega*u(1, omega) on ``omegas`` (complex arrays)."""
    omegas = _check_omega(omegas)
    if check:
        check_resolution(sp.grid, cfg.c_max, float(omegas.max()))
    y = sp.x
    w = sp.grid.weights
    c = layer_speed(cfg, y)
    real_part = (-sp.f1 - cfg.alpha * sp.f0) * w
    imag_part = c * sp.f0 * w
    d_minus = np.empty(len(omegas), dtype=complex)
    d_plus = np.empty(len(omegas), dtype=complex)
    for start in range(0, len(omegas), chunk):
        om = omegas[start : start + chunk]
        km, kp = boundary_kernels(cfg, om, y)
        d_minus[start : start + chunk] = km @ real_part + 1j * om * (km @ imag_part)
        d_plus[start : start + chunk] = kp @ real_part + 1j * om * (kp @ imag_part)
    return d_minus, d_plus


def boundary_data(cfg: MediumConfig, sp: SourcePair, omegas, check: bool = True) -> BoundaryDataset:
    d_minus, d_plus = boundary_values(cfg, sp, omegas, check=check)
    return BoundaryDataset(np.asarray(omegas, dtype=float), d_minus, d_plus, cfg)


def frequency_grid(K: float, count: int | None = None, c_max: float = 1.0) -> np.ndarray:
    """Uniform grid omega_j = j*K/count, j = 1..count.

    The default count keeps the spacing at most pi/(4*c_max).
    """
    if K <= 0:
        raise ValueError("bandwidth must be positive")
    if count is None:
        count = int(np.ceil(K / (np.pi / (4 * c_max))))
    count = max(int(count), 2)
    return K * np.arange(1, count + 1) / count
