"""Leading-order boundary layer.

The Prandtl velocity is split as u^P = u^S + r where

    u^S = -u00(x) erfc(Y / 2 sqrt t)

carries the mismatch between the initial data and no-slip, and the
compatible part r solves

    r_t - r_YY = U_t + U U_x - (u u_x + v u_Y),   u = u^S + r,
    r(Y=0) = u00,  r(Y_max) = U(t),  r(t=0) = u00,

with U = gamma u^E and v = -int_0^Y u_x.  The regular layer part is
u~^R = r - U and u~^P = u^S + u~^R.

Everything here is in layer variables; the normal layer velocity
vbar = int_Y^inf d_x u~^P is O(1) and multiplies eps when assembled.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded
from scipy.special import erfc

from .domain import BoundaryTrace, Domain, LayerField, from_modes, to_modes
from .errors import LayerBlowup, SignConvention

SQPI = np.sqrt(np.pi)
# g^S = GS_SIGN * (2/sqrt(pi)) sqrt(t) * i xi u00, fixed by the consistency check in influx_g
GS_SIGN = -1.0


# ------------------------------------------------------------ closed forms

def erfc_profile(t: float, Y) -> np.ndarray:
    """erfc(Y / 2 sqrt t) with the t -> 0+ limit (1 at the wall, 0 inside)."""
    Y = np.asarray(Y, dtype=float)
    if t <= 0:
        return np.where(Y == 0, 1.0, 0.0)
    return erfc(Y / (2 * np.sqrt(t)))


def ierfc(z) -> np.ndarray:
    """First integral of erfc: int_z^inf erfc = exp(-z^2)/sqrt(pi) - z erfc(z)."""
    z = np.asarray(z, dtype=float)
    return np.exp(-z ** 2) / SQPI - z * erfc(z)


def erfc_tail_integral(t: float, Y) -> np.ndarray:
    """int_Y^inf erfc(Y'/2 sqrt t) dY' = 2 sqrt(t) ierfc(Y / 2 sqrt t)."""
    Y = np.asarray(Y, dtype=float)
    if t <= 0:
        return np.zeros_like(Y)
    return 2 * np.sqrt(t) * ierfc(Y / (2 * np.sqrt(t)))


def gaussian_slope(t: float, Y) -> np.ndarray:
    """d/dY of -erfc(Y/2 sqrt t): exp(-Y^2/4t)/sqrt(pi t); zero at t = 0."""
    Y = np.asarray(Y, dtype=float)
    if t <= 0:
        return np.zeros_like(Y)
    return np.exp(-Y ** 2 / (4 * t)) / np.sqrt(np.pi * t)


def _u00_modes(u00) -> np.ndarray:
    if isinstance(u00, BoundaryTrace):
        return np.asarray(u00.modes[:, 0])
    return np.asarray(u00)


def singular_u(u00, t: float, Y, xi=None) -> LayerField:
    """u^S modes [Nx, NY, 1]."""
    m = _u00_modes(u00)
    Y = np.asarray(Y, dtype=float)
    if t < 0:
        raise ValueError("t must be nonnegative")
    modes = -m[:, None] * erfc_profile(t, Y)[None, :]
    xi = u00.xi if xi is None and isinstance(u00, BoundaryTrace) else xi
    return LayerField(modes[:, :, None], xi, Y, decay_tag="gaussian", meta={"t": t})


def singular_v(u00, t: float, Y, xi) -> LayerField:
    """v^S = int_Y^inf d_x u^S modes [Nx, NY, 1]."""
    m = _u00_modes(u00)
    Y = np.asarray(Y, dtype=float)
    if t < 0:
        raise ValueError("t must be nonnegative")
    modes = -1j * np.asarray(xi)[:, None] * m[:, None] * erfc_tail_integral(t, Y)[None, :]
    return LayerField(modes[:, :, None], np.asarray(xi), Y, decay_tag="gaussian", meta={"t": t})


def singular_influx(u00, t: float, xi) -> np.ndarray:
    """g^S modes at time t."""
    return GS_SIGN * (2 / SQPI) * np.sqrt(max(t, 0.0)) * 1j * np.asarray(xi) * _u00_modes(u00)


# --------------------------------------------------------------- quadrature

def tail_integral(f: np.ndarray, Y: np.ndarray, axis: int = -1) -> np.ndarray:
    """int_Y^{Y_max} f dY' by the trapezoidal rule, accumulated from the top."""
    f = np.moveaxis(np.asarray(f), axis, -1)
    dY = np.diff(Y)
    seg = 0.5 * (f[..., 1:] + f[..., :-1]) * dY
    out = np.zeros_like(f)
    out[..., :-1] = np.cumsum(seg[..., ::-1], axis=-1)[..., ::-1]
    return np.moveaxis(out, -1, axis)


def head_integral(f: np.ndarray, Y: np.ndarray, axis: int = -1) -> np.ndarray:
    """int_0^Y f dY' by the trapezoidal rule."""
    f = np.moveaxis(np.asarray(f), axis, -1)
    seg = 0.5 * (f[..., 1:] + f[..., :-1]) * np.diff(Y)
    out = np.zeros_like(f)
    out[..., 1:] = np.cumsum(seg, axis=-1)
    return np.moveaxis(out, -1, axis)


def d_Y(f: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return np.gradient(f, Y, axis=-1, edge_order=2)


# ------------------------------------------------------------- time march

@dataclass(frozen=True)
class PrandtlConfig:
    substeps: int = 1      # uniform steps per output interval
    ramp_steps: int = 16   # sqrt(t)-graded steps inside the first output interval
    blowup_floor: float = 1e-3


@dataclass
class PrandtlState:
    uS: LayerField
    uR: LayerField
    vbar: LayerField
    g: BoundaryTrace
    gR: BoundaryTrace
    gS: BoundaryTrace
    t: float


@dataclass
class PrandtlSeries:
    """Snapshots of the compatible part r (modes [Nt+1, Nx, NY]) and wall data."""

    times: np.ndarray
    Y: np.ndarray
    xi: np.ndarray
    u00: np.ndarray
    r: np.ndarray
    U: np.ndarray
    Ux: np.ndarray
    meta: dict = field(default_factory=dict)

    # layer pieces as mode arrays [Nx, NY]
    def uS(self, n: int) -> np.ndarray:
        return -self.u00[:, None] * erfc_profile(self.times[n], self.Y)[None, :]

    def uR(self, n: int) -> np.ndarray:
        return self.r[n] - self.U[n][:, None]

    def u_tilde(self, n: int) -> np.ndarray:
        return self.uS(n) + self.uR(n)

    def vbar_S(self, n: int) -> np.ndarray:
        return -1j * self.xi[:, None] * self.u00[:, None] * erfc_tail_integral(self.times[n], self.Y)[None, :]

    def vbar_R(self, n: int) -> np.ndarray:
        return tail_integral(1j * self.xi[:, None] * self.uR(n), self.Y)

    def vbar(self, n: int) -> np.ndarray:
        return self.vbar_S(n) + self.vbar_R(n)

    def v_prandtl(self, n: int) -> np.ndarray:
        """v^P = -int_0^Y d_x u^P = vbar - g - Y U_x."""
        vb = self.vbar(n)
        return vb - vb[:, :1] - self.Y[None, :] * self.Ux[n][:, None]

    def state(self, n: int) -> PrandtlState:
        g = influx_g(self)
        t = float(self.times[n])
        return PrandtlState(
            uS=LayerField(self.uS(n)[:, :, None], self.xi, self.Y, "gaussian", meta={"t": t}),
            uR=LayerField(self.uR(n)[:, :, None], self.xi, self.Y, "exponential", meta={"t": t}),
            vbar=LayerField(self.vbar(n)[:, :, None], self.xi, self.Y, "exponential", meta={"t": t}),
            g=g["g"], gR=g["gR"], gS=g["gS"], t=t)


def _forcing(r, t, u00_phys, U, Ux, Ut, xi, Y, mask):
    """U_t + U U_x - (u u_x + v u_Y) in physical x, dealiased; r is physical [Nx, NY]."""
    ers = erfc_profile(t, Y)
    uS = -u00_phys[:, None] * ers[None, :]
    u = uS + r
    r_m = to_modes(r)
    u00x = from_modes(1j * xi * to_modes(u00_phys))
    u_x = -u00x[:, None] * ers[None, :] + from_modes(1j * xi[:, None] * r_m)
    # v = -int_0^Y u_x, with the u^S part exact
    headS = (2 * np.sqrt(max(t, 0.0)) / SQPI) - erfc_tail_integral(t, Y)
    v = u00x[:, None] * headS[None, :] - head_integral(u_x + u00x[:, None] * ers[None, :], Y)
    u_Y = u00_phys[:, None] * gaussian_slope(t, Y)[None, :] + d_Y(r, Y)
    f = (Ut + U * Ux)[:, None] - (u * u_x + v * u_Y)
    return from_modes(to_modes(f) * mask[:, None])


def _cn_matrix(dt: float, dY: float, n: int):
    """Banded (I - dt/2 D2) on interior nodes."""
    lam = 0.5 * dt / dY ** 2
    ab = np.zeros((3, n))
    ab[0, 1:] = -lam
    ab[1, :] = 1 + 2 * lam
    ab[2, :-1] = -lam
    return ab, lam


def _time_grid(times: np.ndarray, cfg: PrandtlConfig) -> np.ndarray:
    """Internal step times: sqrt-graded in the first output interval, uniform after."""
    pts = [times[0]]
    if times.size > 1:
        t1 = times[1]
        K = cfg.ramp_steps
        pts += list(times[0] + (np.arange(1, K + 1) / K) ** 2 * (t1 - times[0]))
        for a, b in zip(times[1:-1], times[2:]):
            pts += list(a + (b - a) * np.arange(1, cfg.substeps + 1) / cfg.substeps)
    return np.array(pts)


def solve_prandtl_regular(u00, euler, domain: Domain, T: float | None = None,
                          config: PrandtlConfig = PrandtlConfig()) -> PrandtlSeries:
    """March the compatible part r with Crank-Nicolson in Y and Heun for the forcing.

    ``euler`` is an EulerSeries (or anything with ``times`` and ``wall_value_at``);
    output times are the Euler output times up to T.
    """
    times = np.asarray(euler.times)
    if T is not None:
        times = times[times <= T + 1e-14]
    Y = np.asarray(domain.Y)
    dY = Y[1] - Y[0]
    if not np.allclose(np.diff(Y), dY):
        raise ValueError("the layer grid must be uniform")
    xi = domain.xi
    mask = domain.dealias_mask()
    u00m = _u00_modes(u00)
    u00p = from_modes(u00m)

    def wall(t):
        U = from_modes(euler.wall_value_at(t))
        Ux = from_modes(euler.wall_value_at(t, dx=1))
        Ut = from_modes(euler.wall_value_at(t, dt=1))
        return U, Ux, Ut

    grid = _time_grid(times, config)
    out_idx = {0: 0}
    if times.size > 1:
        out_idx[config.ramp_steps] = 1
        for k in range(2, times.size):
            out_idx[config.ramp_steps + (k - 1) * config.substeps] = k

    nY = Y.size
    r = np.repeat(u00p[:, None], nY, axis=1)
    R = np.empty((times.size, domain.Nx, nY), dtype=complex)
    Us = np.empty((times.size, domain.Nx), dtype=complex)
    Uxs = np.empty_like(Us)
    U, Ux, Ut = wall(grid[0])
    R[0] = to_modes(r)
    Us[0], Uxs[0] = to_modes(U), to_modes(Ux)
    scale = max(np.abs(u00p).max(), np.abs(U).max(), config.blowup_floor)
    cache = {}
    F0 = _forcing(r, grid[0], u00p, U, Ux, Ut, xi, Y, mask)
    for k in range(1, grid.size):
        t0, t1 = grid[k - 1], grid[k]
        dt = t1 - t0
        key = round(dt, 15)
        if key not in cache:
            cache[key] = _cn_matrix(dt, dY, nY - 2)
        ab, lam = cache[key]
        U1, Ux1, Ut1 = wall(t1)

        def cn_step(src):
            lap = np.zeros_like(r)
            lap[:, 1:-1] = r[:, 2:] - 2 * r[:, 1:-1] + r[:, :-2]
            rhs = r[:, 1:-1] + lam * lap[:, 1:-1] + dt * src[:, 1:-1]
            rhs[:, 0] += lam * u00p
            rhs[:, -1] += lam * U1
            new = np.empty_like(r)
            new[:, 1:-1] = solve_banded((1, 1), ab, rhs.T).T
            new[:, 0] = u00p
            new[:, -1] = U1
            return new

        pred = cn_step(F0)
        F1 = _forcing(pred, t1, u00p, U1, Ux1, Ut1, xi, Y, mask)
        new = cn_step(0.5 * (F0 + F1))
        if not np.all(np.isfinite(new)) or np.abs(new).max() > 2 * max(np.abs(r).max(), scale):
            raise LayerBlowup(f"regular layer part doubled in one step at t={t1:.4g}")
        r = new
        U, Ux, Ut = U1, Ux1, Ut1
        F0 = _forcing(r, t1, u00p, U, Ux, Ut, xi, Y, mask)
        if k in out_idx:
            n = out_idx[k]
            R[n] = to_modes(r)
            Us[n], Uxs[n] = to_modes(U), to_modes(Ux)
    return PrandtlSeries(times, Y, xi, u00m, R, Us, Uxs, meta={"steps": grid.size - 1})


# ------------------------------------------------------------- assembly

def influx_g(series: PrandtlSeries, tol: float = 1e-6) -> dict:
    """Wall influx g = gamma vbar^P split into regular and singular parts."""
    nt = series.times.size
    gR = np.array([series.vbar_R(n)[:, 0] for n in range(nt)]).T
    gS = np.array([singular_influx(series.u00, t, series.xi) for t in series.times]).T
    g = gR + gS
    check = np.array([series.vbar(n)[:, 0] for n in range(nt)]).T
    scale = max(np.abs(check).max(), 1.0)
    if np.abs(check - g).max() > tol * scale:
        raise SignConvention("influx g disagrees with the trace of vbar^P")
    mk = lambda m: BoundaryTrace(m, series.times.copy(), series.xi)
    return {"g": mk(g), "gR": mk(gR), "gS": mk(gS)}


def assemble_ubarP(series: PrandtlSeries, n: int, eps: float) -> LayerField:
    """Layer velocity (u~^P, eps vbar^P) modes [Nx, NY, 2] at output index n."""
    modes = np.stack([series.u_tilde(n), eps * series.vbar(n)], axis=2)
    return LayerField(modes, series.xi, series.Y, "exponential", meta={"t": float(series.times[n])})
