"""Fix the sign of the Green representation against a direct Helmholtz solve.

Solves u'' + (k(x)^2 + i alpha k(x)) u = -f1 - alpha f0 + i k(x) f0 on [-1, 1]
by second-order finite differences with outgoing Robin conditions
u'(1) = i kappa_p u(1), u'(-1) = -i kappa_n u(-1), then fits the scalar
sigma in  u_fd ~ sigma * u_repr.  Prints sigma and the fit residual.

    python scripts/fix_sign_oracle.py [--n 4097]
"""

from __future__ import annotations

import argparse

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from layered_isp.greens import forward_field, layer_speed, source_density
from layered_isp.medium import MediumConfig, layer_kappas
from layered_isp.sources import SourceGrid, demo_pair


def fd_helmholtz(cfg: MediumConfig, sp, omega: float) -> np.ndarray:
    x, h, n = sp.x, sp.grid.h, sp.grid.n
    kp, kn = layer_kappas(cfg, omega)
    k = layer_speed(cfg, x) * omega
    ksq = k * k + 1j * cfg.alpha * k
    mid = n // 2
    ksq[mid] = 0.5 * (kp**2 + kn**2)
    main = -2.0 / h**2 + ksq
    off = np.full(n - 1, 1.0 / h**2, dtype=complex)
    lower, upper = off.copy(), off.copy()
    # ghost-point elimination of the Robin conditions
    upper[0] = 2.0 / h**2
    main[0] += 2j * kn / h
    lower[-1] = 2.0 / h**2
    main[-1] += 2j * kp / h
    A = sps.diags([lower, main, upper], [-1, 0, 1], format="csc")
    rhs = source_density(cfg, sp, omega)
    return spla.spsolve(A, rhs)


def fit_sign(cfg: MediumConfig, n: int = 2049, omegas=(2.0, 5.0, 8.0)):
    sp = demo_pair(SourceGrid(n))
    sigmas, residuals = [], []
    for om in omegas:
        u_fd = fd_helmholtz(cfg, sp, om)
        u_rep = forward_field(cfg, sp, om, sp.x)
        s = np.vdot(u_rep, u_fd) / np.vdot(u_rep, u_rep)
        sigmas.append(s)
        residuals.append(np.linalg.norm(u_fd - s * u_rep) / np.linalg.norm(u_fd))
    return np.array(sigmas), np.array(residuals)


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=4097)
    args = p.parse_args()
    for cfg in (MediumConfig(1.0, 1.0, 0.0), MediumConfig(1.0, 1.5, 0.5), MediumConfig(2.0, 0.7, 2.0)):
        sig, res = fit_sign(cfg, args.n)
        print(f"{cfg}: sigma fits {np.round(sig, 6)}  rel. residual {res}")


if __name__ == "__main__":
    main()
