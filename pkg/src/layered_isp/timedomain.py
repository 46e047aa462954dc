"""Damped wave equation U_tt - U_xx + alpha U_t = 0 on the line.

Explicit leapfrog with the damping term averaged centrally in time.  The
domain [-L, L] is truncated far enough that reflections from the Dirichlet
ends cannot reach x = +-1 before the final time.  Used to cross-check the
frequency-domain boundary data through u(x, w) = int_0^inf U(x, t) e^{iwt} dt.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .greens import BoundaryDataset
from .medium import MediumConfig
from .sources import SourcePair, sobolev_norm

CFL = 0.9
OBSERVATION_WINDOW = (8.0, 10.0)  # 4(D+1) < T < 5(D+1) with D = 1


@dataclass
class WaveState:
    x: np.ndarray
    dt: float
    T: float
    alpha: float
    t: np.ndarray
    u_minus: np.ndarray
    u_plus: np.ndarray
    ut_minus: np.ndarray
    ut_plus: np.ndarray
    snapshot_times: np.ndarray | None = None
    snapshots: np.ndarray | None = None

    @property
    def h(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def L(self) -> float:
        return float(self.x[-1])

    def to_csv(self, path, header_comment: str | None = None) -> None:
        with open(path, "w", newline="") as fh:
            if header_comment:
                fh.write(f"# {header_comment}\n")
            w = csv.writer(fh)
            w.writerow(["t", "u_minus", "u_plus", "ut_minus", "ut_plus"])
            for row in zip(self.t, self.u_minus, self.u_plus, self.ut_minus, self.ut_plus):
                w.writerow([repr(float(v)) for v in row])


def _initial_data(sp: SourcePair, x: np.ndarray):
    if np.allclose(sp.grid.h, x[1] - x[0]):
        f0 = np.zeros_like(x)
        f1 = np.zeros_like(x)
        inside = np.abs(x) <= 1 + 1e-12
        f0[inside] = sp.f0
        f1[inside] = sp.f1
        return f0, f1
    inside = np.abs(x) <= 1
    f0 = np.zeros_like(x)
    f1 = np.zeros_like(x)
    f0[inside] = CubicSpline(sp.x, sp.f0)(x[inside])
    f1[inside] = CubicSpline(sp.x, sp.f1)(x[inside])
    return f0, f1


def _laplacian(u: np.ndarray, h: float) -> np.ndarray:
    out = np.zeros_like(u)
    out[1:-1] = (u[2:] - 2 * u[1:-1] + u[:-2]) / (h * h)
    return out


def solve_wave(
    cfg: MediumConfig,
    sp: SourcePair,
    T: float = 9.0,
    h: float | None = None,
    dt: float | None = None,
    L: float | None = None,
    snapshot_every: int | None = None,
) -> WaveState:
    """Leapfrog solution with traces at x = +-1 recorded at every step.

    ``h`` defaults to the source grid spacing and must divide 1.  The default
    truncation L = 1 + T + 1 keeps the traces free of boundary reflections.
    """
    if not (cfg.c_p == cfg.c_n == 1.0):
        raise ValueError("time-domain solver is restricted to c_p == c_n == 1")
    if not (np.isfinite(T) and T > 0):
        raise ValueError(f"final time must be positive and finite, got {T}")
    h = sp.grid.h if h is None else float(h)
    per_unit = round(1.0 / h)
    if abs(per_unit * h - 1.0) > 1e-9:
        raise ValueError(f"spatial step {h} must divide 1 so that x = +-1 are nodes")
    h = 1.0 / per_unit
    dt = CFL * h if dt is None else float(dt)
    if dt > CFL * h * (1 + 1e-12):
        raise ValueError(f"CFL violated: dt={dt} > {CFL}*h={CFL * h}")
    L = 1.0 + T + 1.0 if L is None else float(L)
    nL = int(np.ceil(L * per_unit))
    x = np.arange(-nL, nL + 1) / per_unit
    i_minus, i_plus = nL - per_unit, nL + per_unit

    steps = int(np.ceil(T / dt - 1e-9))
    a = cfg.alpha
    f0, f1 = _initial_data(sp, x)
    prev = f0.copy()
    cur = f0 + dt * f1 + 0.5 * dt * dt * (_laplacian(f0, h) - a * f1)
    cur[0] = cur[-1] = 0.0

    n_t = steps + 1
    u = np.empty((n_t, 2))
    u[0] = prev[i_minus], prev[i_plus]
    u[1] = cur[i_minus], cur[i_plus]
    ut = np.empty((n_t, 2))
    ut[0] = f1[i_minus], f1[i_plus]

    snaps, snap_t = [], []
    if snapshot_every:
        snaps.append(prev.copy())
        snap_t.append(0.0)
        if snapshot_every == 1:
            snaps.append(cur.copy())
            snap_t.append(dt)

    c_plus = 1.0 / (1.0 + 0.5 * a * dt)
    c_minus = 1.0 - 0.5 * a * dt
    r = (dt / h) ** 2
    nxt = np.empty_like(cur)
    for m in range(1, steps):
        nxt[1:-1] = c_plus * (
            2 * cur[1:-1] - c_minus * prev[1:-1] + r * (cur[2:] - 2 * cur[1:-1] + cur[:-2])
        )
        nxt[0] = nxt[-1] = 0.0
        u[m + 1] = nxt[i_minus], nxt[i_plus]
        ut[m] = (nxt[i_minus] - prev[i_minus]) / (2 * dt), (nxt[i_plus] - prev[i_plus]) / (2 * dt)
        prev, cur, nxt = cur, nxt, prev
        if snapshot_every and (m + 1) % snapshot_every == 0:
            snaps.append(cur.copy())
            snap_t.append((m + 1) * dt)
    # one-sided second-order estimate of the last velocity
    ut[-1] = (3 * u[-1] - 4 * u[-2] + u[-3]) / (2 * dt)

    t = dt * np.arange(n_t)
    return WaveState(
        x=x,
        dt=dt,
        T=float(t[-1]),
        alpha=a,
        t=t,
        u_minus=u[:, 0].copy(),
        u_plus=u[:, 1].copy(),
        ut_minus=ut[:, 0].copy(),
        ut_plus=ut[:, 1].copy(),
        snapshot_times=np.array(snap_t) if snapshot_every else None,
        snapshots=np.array(snaps) if snapshot_every else None,
    )


def _tail_correction(g: np.ndarray, dt: float, T: float, omegas: np.ndarray, terms: int = 3) -> np.ndarray:
    """Asymptotic value of int_T^inf g(t) e^{iwt} dt from derivatives of g at T.

    Repeated integration by parts gives
    -e^{iwT} sum_j (-1)^j g^(j)(T) / (iw)^(j+1); valid once g varies slowly
    compared to 1/w, which holds for the diffusive tail of damped waves and
    for the constant tail of undamped ones.
    """
    derivs = [g[-1]]
    tail = g[-8:]
    for j in range(1, terms):
        tail = np.diff(tail) / dt
        derivs.append(tail[-1])
    iw = 1j * omegas
    acc = np.zeros_like(omegas, dtype=complex)
    for j, d in enumerate(derivs):
        acc += (-1) ** j * d / iw ** (j + 1)
    return -np.exp(1j * omegas * T) * acc


def fourier_trace(t: np.ndarray, g: np.ndarray, omegas, tail: bool = True) -> np.ndarray:
    """int_0^inf g(t) e^{iwt} dt: trapezoid on [0, T] plus the asymptotic tail."""
    omegas = np.asarray(omegas, dtype=float)
    dt = float(t[1] - t[0])
    w = np.full(len(t), dt)
    w[0] = w[-1] = 0.5 * dt
    out = np.exp(1j * np.outer(omegas, t)) @ (w * g)
    if tail:
        out = out + _tail_correction(g, dt, float(t[-1]), omegas)
    return out


def trace_transform(ws: WaveState, omegas, tail: bool = True) -> BoundaryDataset:
    """omega * u_hat(+-1, omega) from the recorded traces (U = 0 for t < 0)."""
    omegas = np.asarray(omegas, dtype=float)
    d_minus = omegas * fourier_trace(ws.t, ws.u_minus, omegas, tail)
    d_plus = omegas * fourier_trace(ws.t, ws.u_plus, omegas, tail)
    return BoundaryDataset(omegas, d_minus, d_plus, MediumConfig(1.0, 1.0, ws.alpha))


def trace_energy(ws: WaveState, T: float | None = None) -> float:
    """||U_t||^2 + ||U||^2 over {-1, 1} x (0, T)."""
    sel = ws.t <= (ws.T if T is None else T) + 1e-12
    t = ws.t[sel]
    integrand = ws.ut_minus[sel] ** 2 + ws.ut_plus[sel] ** 2 + ws.u_minus[sel] ** 2 + ws.u_plus[sel] ** 2
    return float(np.trapezoid(integrand, t))


def observability_check(ws: WaveState, sp: SourcePair) -> dict:
    if not (OBSERVATION_WINDOW[0] < ws.T < OBSERVATION_WINDOW[1]):
        raise ValueError(f"observation time must lie in {OBSERVATION_WINDOW}, got {ws.T}")
    lhs = sobolev_norm(sp.f0, 1, sp.grid) ** 2 + sobolev_norm(sp.f1, 0, sp.grid) ** 2
    rhs = trace_energy(ws)
    ratio = lhs / rhs if rhs > 0 else 0.0
    return {"lhs": lhs, "rhs": rhs, "ratio": ratio}


def parseval_check(ws: WaveState, omega_max: float = 150.0, d_omega: float = 0.05) -> dict:
    """Both sides of int_R w^4 |u_hat(+-1)|^2 dw = 2 pi int_0^T |U_tt(+-1)|^2 dt.

    U is real, so the frequency integral is twice the one over (0, omega_max).
    The traces vanish near t = 0 (sources inside the support), so U_tt has no
    jump there.  Returns lhs, rhs and their relative difference.
    """
    dt = ws.dt
    rhs = 0.0
    lhs = 0.0
    omegas = np.arange(d_omega, omega_max + 0.5 * d_omega, d_omega)
    for g in (ws.u_minus, ws.u_plus):
        padded = np.concatenate([[0.0], g])
        utt = (padded[2:] - 2 * padded[1:-1] + padded[:-2]) / dt**2
        rhs += 2 * np.pi * float(np.trapezoid(utt**2, dx=dt))
        uh = fourier_trace(ws.t, g, omegas)
        lhs += 2 * float(np.trapezoid(np.concatenate([[0.0], omegas**4 * np.abs(uh) ** 2]), dx=d_omega))
    rel = abs(lhs - rhs) / rhs if rhs > 0 else abs(lhs)
    return {"lhs": lhs, "rhs": rhs, "rel_diff": rel}


def energy(ws_snapshot: np.ndarray, prev_snapshot: np.ndarray, h: float, dt: float) -> float:
    """Discrete energy int (U_t)^2 + (U_x)^2 dx between two consecutive levels."""
    ut = (ws_snapshot - prev_snapshot) / dt
    ux = np.diff(0.5 * (ws_snapshot + prev_snapshot)) / h
    return float(h * (ut @ ut) + h * (ux @ ux))


def decay_check(ws: WaveState) -> np.ndarray:
    """Rows (t, ||U(., t)||_L2) over the truncated domain."""
    if ws.snapshots is None:
        raise ValueError("solve_wave was run without snapshots")
    h = ws.h
    norms = np.sqrt(h * np.sum(ws.snapshots**2, axis=1))
    if not np.all(np.isfinite(norms)):
        raise FloatingPointError("non-finite norm in the wave solution")
    return np.column_stack([ws.snapshot_times, norms])


def decay_exponent(series: np.ndarray, t_min: float = 5.0) -> float:
    """Least-squares slope of log ||U|| against log(1 + t) for t >= t_min."""
    sel = series[:, 0] >= t_min
    t, nrm = series[sel, 0], series[sel, 1]
    return float(np.polyfit(np.log1p(t), np.log(nrm), 1)[0])
