"""First-order boundary-layer correction.

q = u~^P_(1) solves (d_t - d_YY) q = 0, q(Y=0) = -gamma u1 (tangential),
q(t=0) = 0, and vbar1 = int_Y^inf d_x q.

The wall datum splits as -gamma(wR + I[w*]) (regular, handled by the boundary
heat operator) and -sqrt(t) gamma wSb = -c1 |xi| u00 sqrt(t) (singular, closed
form through F_half: the heat solution with wall datum sqrt(t) is 2 F_half).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.linalg import solve_banded

from .halfspace import OperatorContext, e1_apply
from .prandtl0 import SQPI, ierfc, tail_integral


# ------------------------------------------------------------------ F_half

def _breakpoints(start: float, scale: float, stop: float) -> list:
    """Geometric points start + scale * 2^k inside (start, stop), resolving features of size ``scale``."""
    if scale <= 0:
        return []
    pts = start + scale * 2.0 ** np.arange(-4, 60)
    return list(pts[(pts > start) & (pts < stop)])


def _f_half_sigma(t: float, Y: float) -> float:
    if t <= 0:
        return 0.0
    lo = Y / (2 * np.sqrt(t))
    hi = lo + 10.0                                 # e^{-s^2} is below 1e-43 past this point
    fn = lambda s: np.exp(-s * s) * np.sqrt(max(t - (Y / (2 * s)) ** 2, 0.0)) if s > 0 else 0.0
    val, _ = integrate.quad(fn, lo, hi, epsabs=1e-15, epsrel=1e-12, limit=400,
                            points=_breakpoints(lo, lo, hi) or None)
    return val / SQPI


def F_half(t: float, Y: float, method: str = "sigma") -> float:
    """F_1/2(t, Y); ``method`` is "sigma" (default), "kernel" or "closed"."""
    if t < 0 or Y < 0:
        raise ValueError("F_half needs t >= 0 and Y >= 0")
    if Y < 1e-150:
        Y = 0.0          # F is Lipschitz in Y; below this the kernel quadrature would overflow
    if method == "sigma":
        return _f_half_sigma(t, Y)
    if method == "kernel":
        return _f_half_kernel_direct(t, Y)
    if method == "closed":
        return float(F_half_closed(t, np.array([Y]))[0])
    raise ValueError(f"unknown method {method!r}")


def _f_half_kernel_direct(t: float, Y: float) -> float:
    """Time-convolution form, integrated in s with the substitution s = t - r^2 near the endpoint."""
    if t <= 0:
        return 0.0
    if Y == 0:
        return 0.5 * np.sqrt(t)

    def fn(r):
        # K(r^2, Y) * 2r with z = Y / 2r, written to avoid underflow of r^2
        z = Y / (2 * r) if r > 0 else np.inf
        if z > 30.0:
            return 0.0
        return z / r * np.exp(-z * z) * np.sqrt(max(t - r * r, 0.0)) / SQPI

    val, _ = integrate.quad(fn, 0.0, np.sqrt(t), epsabs=1e-15, epsrel=1e-12, limit=400,
                            points=_breakpoints(0.0, Y / np.sqrt(6.0), np.sqrt(t)) or None)
    return val


def F_half_closed(t: float, Y) -> np.ndarray:
    """sqrt(pi t)/2 * ierfc(Y / 2 sqrt t)."""
    Y = np.asarray(Y, dtype=float)
    if t <= 0:
        return np.zeros_like(Y)
    return 0.5 * np.sqrt(np.pi * t) * ierfc(Y / (2 * np.sqrt(t)))


def F_half_dY(t: float, Y) -> np.ndarray:
    """d_Y F_half = -sqrt(pi)/4 erfc(Y / 2 sqrt t)."""
    from scipy.special import erfc
    Y = np.asarray(Y, dtype=float)
    if t <= 0:
        return np.zeros_like(Y)
    return -0.25 * SQPI * erfc(Y / (2 * np.sqrt(t)))


def F_half_dYY(t: float, Y) -> np.ndarray:
    Y = np.asarray(Y, dtype=float)
    if t <= 0:
        return np.zeros_like(Y)
    return 0.25 * np.exp(-Y ** 2 / (4 * t)) / np.sqrt(t)


def F_half_table(times, Y, method: str = "closed") -> np.ndarray:
    """F_half on a (t, Y) grid, [Nt+1, NY]; the table is mode independent."""
    if method == "closed":
        return np.array([F_half_closed(t, Y) for t in times])
    return np.array([[F_half(t, y, method) for y in Y] for t in times])


# ------------------------------------------------------------- correction

def singular_uS1(u00, xi, c1: float, times, Y, table=None) -> np.ndarray:
    """Singular tangential part, modes [Nt+1, Nx, NY]: -2 c1 |xi| u00 F_half."""
    table = F_half_table(times, Y) if table is None else table
    amp = -2.0 * c1 * np.abs(xi) * np.asarray(u00)
    return amp[None, :, None] * table[:, None, :]


def solve_uR1(wall_datum, ctx: OperatorContext) -> np.ndarray:
    """Regular tangential part: heat solution in Y (no x-diffusion) with wall datum [Nt+1, Nx]."""
    return e1_apply(wall_datum, ctx, x_diffusion=False)


def heat_cn(source, Y, times, wall=None) -> np.ndarray:
    """Crank-Nicolson for (d_t - d_YY) u = source [Nt+1, Nx, NY], u(0) = wall(t), u(Y_max) = 0, u(t=0) = 0."""
    source = np.asarray(source, dtype=complex)
    nt = len(times) - 1
    nx = source.shape[1]
    hm = np.diff(Y)[:-1]
    hp = np.diff(Y)[1:]
    lo = 2 / (hm * (hm + hp))
    di = -2 / (hm * hp)
    up = 2 / (hp * (hm + hp))
    wall = np.zeros((nt + 1, nx), dtype=complex) if wall is None else np.asarray(wall, dtype=complex)
    out = np.zeros((nt + 1, nx, len(Y)), dtype=complex)
    out[0, :, 0] = wall[0]
    u = out[0].copy()
    for n in range(1, nt + 1):
        dt = times[n] - times[n - 1]
        lap = np.zeros_like(u[:, 1:-1])
        lap += lo * u[:, :-2] + di * u[:, 1:-1] + up * u[:, 2:]
        rhs = u[:, 1:-1] + 0.5 * dt * lap + 0.5 * dt * (source[n, :, 1:-1] + source[n - 1, :, 1:-1])
        rhs[:, 0] += 0.5 * dt * lo[0] * wall[n]
        ab = np.zeros((3, len(Y) - 2))
        ab[0, 1:] = -0.5 * dt * up[:-1]
        ab[1, :] = 1 - 0.5 * dt * di
        ab[2, :-1] = -0.5 * dt * lo[1:]
        new = np.zeros_like(u)
        new[:, 1:-1] = solve_banded((1, 1), ab, rhs.T).T
        new[:, 0] = wall[n]
        u = new
        out[n] = u
    return out


def normal_vbar1(q, xi, Y) -> np.ndarray:
    """vbar1 = int_Y^inf d_x q, trapezoid from the top; q [..., Nx, NY]."""
    return tail_integral(1j * np.asarray(xi)[:, None] * q, Y)


@dataclass
class PrandtlCorrection:
    times: np.ndarray
    Y: np.ndarray
    xi: np.ndarray
    uS1: np.ndarray
    uR1: np.ndarray
    F12: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def q(self) -> np.ndarray:
        return self.uS1 + self.uR1

    def vbar1(self) -> np.ndarray:
        return normal_vbar1(self.q, self.xi, self.Y)

    def vbar1_singular(self) -> np.ndarray:
        return normal_vbar1(self.uS1, self.xi, self.Y)


def build_prandtl1(u1, sing, ctx: OperatorContext, u00, c1: float, source_diagnostic: bool = False,
                   uS0=None) -> PrandtlCorrection:
    """Assemble q from the outer correction ``u1`` (OuterCorrection) and its singular data ``sing``."""
    times = u1.times
    Y = ctx.Y
    xi = ctx.xi
    nt = times.size
    # regular wall datum: -gamma(u1 - sqrt(t) wSb), tangential
    root = np.sqrt(times)
    unit_t = -1j * xi / np.where(xi == 0, 1.0, np.abs(xi)) * sing.beta_unit
    reg = np.array([-(u1.wall_tangential(n) - root[n] * unit_t) for n in range(nt)])
    uR1 = solve_uR1(reg, ctx)
    table = F_half_table(times, Y)
    uS1 = singular_uS1(u00, xi, c1, times, Y, table)
    meta = {}
    if source_diagnostic and uS0 is not None:
        diag = heat_cn(uS0, Y, times)
        meta["uS_source_response_max"] = float(np.abs(diag).max())
    return PrandtlCorrection(times, Y, xi, uS1, uR1, table, meta)
