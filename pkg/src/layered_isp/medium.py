"""Two-layer attenuated medium and complex wavenumbers.

The medium occupies the real line with an interface at x = 0.  On each side
the real wavenumber is ``k = c * omega`` and attenuation turns it into the
complex wavenumber ``kappa = sqrt(k**2 + 1j*alpha*k)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class MediumConfig:
    c_p: float = 1.0
    c_n: float = 1.0
    alpha: float = 0.0
    c_max: float = field(init=False)

    def __post_init__(self):
        if not (self.c_p > 0 and self.c_n > 0):
            raise ValueError(f"layer coefficients must be positive, got c_p={self.c_p}, c_n={self.c_n}")
        if not self.alpha >= 0:
            raise ValueError(f"attenuation must be non-negative, got alpha={self.alpha}")
        object.__setattr__(self, "c_max", max(self.c_p, self.c_n))

    @property
    def homogeneous(self) -> bool:
        return self.c_p == self.c_n

    def to_dict(self) -> dict:
        return {"c_p": self.c_p, "c_n": self.c_n, "alpha": self.alpha}


@dataclass(frozen=True)
class ComplexWavenumber:
    k: float
    kappa: complex

    @property
    def kappa1(self) -> float:
        return self.kappa.real

    @property
    def kappa2(self) -> float:
        return self.kappa.imag


def kappa_values(k, alpha: float):
    """Vectorised complex wavenumber for real ``k >= 0``.

    k**2 + 1j*alpha*k lies in the closed upper half plane, so the principal
    square root lands in the first quadrant: Re >= 0 and Im >= 0.  With
    ``alpha == 0`` the result is ``k`` exactly.
    """
    k = np.asarray(k, dtype=float)
    if np.any(k < 0):
        raise ValueError("wavenumber must be non-negative")
    if alpha < 0:
        raise ValueError("attenuation must be non-negative")
    if alpha == 0:
        return k.astype(complex)
    return np.sqrt(k * k + 1j * alpha * k)


def kappa_of(k: float, alpha: float) -> ComplexWavenumber:
    return ComplexWavenumber(float(k), complex(kappa_values(k, alpha)))


def layer_kappas(cfg: MediumConfig, omega):
    """Return (kappa_p, kappa_n) as complex arrays shaped like ``omega``."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise ValueError("frequency must be non-negative")
    return kappa_values(cfg.c_p * omega, cfg.alpha), kappa_values(cfg.c_n * omega, cfg.alpha)


def layer_wavenumbers(cfg: MediumConfig, omega: float) -> tuple[ComplexWavenumber, ComplexWavenumber]:
    return kappa_of(cfg.c_p * omega, cfg.alpha), kappa_of(cfg.c_n * omega, cfg.alpha)


def modulus_bound(k: float, alpha: float) -> float:
    """Upper bound 2 k^(1/2) (k^(1/2) + alpha)^(1/2) on |kappa| for real k > 0."""
    return 2.0 * np.sqrt(k) * np.sqrt(np.sqrt(k) + alpha)
