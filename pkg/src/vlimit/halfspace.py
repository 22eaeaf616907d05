"""Explicit half-space operators in layer variables (x, Y), one x-mode at a time.

Series arrays are time-major: [Nt+1, Nx, NY] for fields and [Nt+1, Nx] for
wall traces.  Velocities are physical components, so the divergence reads
i xi u + eps^-1 d_Y v and exponential kernels carry the rate a = eps |xi|.
The Y grid may be nonuniform; exponential convolutions are evaluated exactly
for piecewise-linear data by one forward and one backward recursion.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded
from scipy.special import erfc

SQPI = np.sqrt(np.pi)


@dataclass(frozen=True)
class OperatorContext:
    eps: float
    xi: np.ndarray
    Y: np.ndarray
    t: np.ndarray
    e2_scheme: str = "cn"   # "cn" or "euler" (backward Euler)

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        t = np.asarray(self.t)
        if t[0] != 0 or np.any(np.diff(t) <= 0):
            raise ValueError("t grid must start at 0 and increase strictly")

    @property
    def rate(self) -> np.ndarray:
        """a = eps |xi| per mode."""
        return self.eps * np.abs(self.xi)

    @property
    def dt(self) -> float:
        d = np.diff(self.t)
        if not np.allclose(d, d[0], rtol=1e-9, atol=0):
            raise ValueError("operator time grid must be uniform")
        return float(d[0])


def riesz_Np(modes, xi, axis: int = -1) -> np.ndarray:
    """Multiply mode xi by i xi/|xi| (0 on the mean mode); ``axis`` indexes xi."""
    xi = np.asarray(xi, dtype=float)
    modes = np.asarray(modes)
    s = np.where(xi == 0, 0.0, np.sign(xi))
    shape = [1] * modes.ndim
    shape[axis] = xi.size
    return 1j * s.reshape(shape) * modes


# ------------------------------------------------------- exponential sweeps

def _phi1(z):
    """(1 - e^-z)/z, stable for small z."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-4
    zs = np.where(small, 1.0, z)
    return np.where(small, 1 - z / 2 + z * z / 6, -np.expm1(-zs) / zs)


def _phi2(z):
    """(1 - e^-z (1 + z))/z^2, stable for small z."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-3
    zs = np.where(small, 1.0, z)
    big = (-np.expm1(-zs) - zs * np.exp(-zs)) / zs ** 2
    return np.where(small, 0.5 - z / 3 + z * z / 8 - z ** 3 / 30, big)


def _weights(a, h):
    """Weights (near, far) for int_0^h e^{-a s} [near (1 - s/h) + far s/h] ds; shapes [Nx, NY-1]."""
    z = np.outer(a, h)
    near = h * (_phi1(z) - _phi2(z))
    far = h * _phi2(z)
    return near, far, np.exp(-z)


def forward_sweep(f, a, Y):
    """L f(Y) = int_0^Y e^{-a (Y - Y')} f dY' for f [..., Nx, NY]."""
    h = np.diff(Y)
    near, far, dec = _weights(a, h)
    out = np.zeros_like(f, dtype=complex)
    for j in range(1, Y.size):
        out[..., j] = dec[:, j - 1] * out[..., j - 1] + near[:, j - 1] * f[..., j] + far[:, j - 1] * f[..., j - 1]
    return out


def backward_sweep(f, a, Y):
    """R f(Y) = int_Y^{Y_max} e^{-a (Y' - Y)} f dY'."""
    h = np.diff(Y)
    near, far, dec = _weights(a, h)
    out = np.zeros_like(f, dtype=complex)
    for j in range(Y.size - 2, -1, -1):
        out[..., j] = dec[:, j] * out[..., j + 1] + near[:, j] * f[..., j] + far[:, j] * f[..., j + 1]
    return out


def ukai_apply(f, ctx: OperatorContext) -> np.ndarray:
    """U f = a int_0^Y e^{-a (Y - Y')} f dY'."""
    a = ctx.rate
    return a[:, None] * forward_sweep(np.asarray(f), a, ctx.Y)


def pinf_project(v1, v2, ctx: OperatorContext):
    """Whole-plane Leray projection of the odd extension of (v1, v2), restricted to Y >= 0."""
    a = ctx.rate
    Y = ctx.Y
    xi = ctx.xi
    Nv1 = riesz_Np(v1, xi, axis=-2)
    Nv2 = riesz_Np(v2, xi, axis=-2)
    decay = np.exp(-np.outer(a, Y))
    L = lambda g: forward_sweep(g, a, Y)
    R = lambda g: backward_sweep(g, a, Y)
    M = lambda g: backward_sweep(g, a, Y)[..., :1]
    half = 0.5 * a[:, None]
    m_n = -Nv1 + v2
    pn = half * (L(m_n) + R(Nv1 + v2) - decay * M(m_n))
    m_t = v1 + Nv2
    pt = v1 - half * (L(m_t) + R(v1 - Nv2) - decay * M(m_t))
    return pt, pn


# ---------------------------------------------------------- boundary heat

def _heat_moments(tau, Y):
    """Phi0 = int_0^tau K dr = erfc(Y/2 sqrt tau), Phi1 = int_0^tau r K dr, for the
    boundary kernel K(r, Y) = Y e^{-Y^2/4r} / (2 sqrt(pi) r^{3/2})."""
    tau = np.asarray(tau, dtype=float)[:, None]
    Y = np.asarray(Y, dtype=float)[None, :]
    pos = tau > 0
    st = np.sqrt(np.where(pos, tau, 1.0))
    eta = Y / (2 * st)
    p0 = np.where(pos, erfc(eta), 0.0)
    p1 = np.where(pos, Y * st / SQPI * np.exp(-eta ** 2) - 0.5 * Y ** 2 * erfc(eta), 0.0)
    return p0, p1


def e1_weights(nt: int, dt: float, Y):
    """Lag weights for hat-function product integration of the boundary heat kernel.

    Returns (W, W_end): W[l] weights f(t_n - l dt) for 0 <= l < n, W_end[n]
    weights f(0) (the truncated hat at s = 0).
    """
    tau = dt * np.arange(nt + 2)
    p0, p1 = _heat_moments(tau, Y)
    c = tau[:, None]
    lower = np.zeros((nt + 1, len(Y)))
    upper = np.zeros((nt + 1, len(Y)))
    lower[1:] = (p1[1:nt + 1] - p1[:nt] - c[:nt] * (p0[1:nt + 1] - p0[:nt])) / dt
    upper[:] = (c[1:nt + 2] * (p0[1:nt + 2] - p0[:nt + 1]) - (p1[1:nt + 2] - p1[:nt + 1])) / dt
    return lower + upper, lower


def e1_apply(f, ctx: OperatorContext, x_diffusion: bool = True) -> np.ndarray:
    """Heat solution with wall datum f [Nt+1, Nx], zero initial data; f[0] is read as f(0+).

    With x_diffusion the symbol e^{-eps^2 xi^2 (t-s)} is included (operator E1~).
    """
    f = np.asarray(f, dtype=complex)
    nt = ctx.t.size - 1
    dt = ctx.dt if nt > 0 else 1.0
    W, Wend = e1_weights(nt, dt, ctx.Y)
    lam = (ctx.eps * ctx.xi) ** 2 if x_diffusion else np.zeros_like(ctx.xi)
    damp = np.exp(-np.outer(dt * np.arange(nt + 1), lam))   # [lag, Nx]
    out = np.zeros((nt + 1, f.shape[1], ctx.Y.size), dtype=complex)
    for n in range(1, nt + 1):
        lags = np.arange(n)
        data = f[n - lags] * damp[lags]                        # [n, Nx]
        out[n] = np.einsum("lk,ly->ky", data, W[:n])
        out[n] += (f[0] * damp[n])[:, None] * Wend[n][None, :]
    return out


# ----------------------------------------------------------- source heat

def _d2_bands(Y):
    """Three-point second derivative on a nonuniform grid (interior rows)."""
    hm = np.diff(Y)[:-1]
    hp = np.diff(Y)[1:]
    lo = 2 / (hm * (hm + hp))
    di = -2 / (hm * hp)
    up = 2 / (hp * (hm + hp))
    return lo, di, up


def e2_apply(f, ctx: OperatorContext) -> np.ndarray:
    """Heat solution of (d_t - eps^2 d_xx - d_YY) u = f with u = 0 at Y = 0, Y_max and t = 0.

    Second-order finite differences in Y; Crank-Nicolson or backward Euler in t.
    """
    f = np.asarray(f, dtype=complex)
    Y = ctx.Y
    nt = ctx.t.size - 1
    nx = f.shape[1]
    lo, di, up = _d2_bands(Y)
    lam = (ctx.eps * ctx.xi) ** 2
    theta = 0.5 if ctx.e2_scheme == "cn" else 1.0
    out = np.zeros((nt + 1, nx, Y.size), dtype=complex)
    u = np.zeros((nx, Y.size - 2), dtype=complex)
    dts = np.diff(ctx.t)
    for n in range(1, nt + 1):
        dt = dts[n - 1]
        src = theta * f[n, :, 1:-1] + (1 - theta) * f[n - 1, :, 1:-1]
        lap = di * u - lam[:, None] * u
        lap[:, 1:] += lo[1:] * u[:, :-1]
        lap[:, :-1] += up[:-1] * u[:, 1:]
        rhs = u + dt * (1 - theta) * lap + dt * src
        new = np.empty_like(u)
        for k in range(nx):
            ab = np.zeros((3, Y.size - 2))
            ab[0, 1:] = -dt * theta * up[:-1]
            ab[1, :] = 1 - dt * theta * (di - lam[k])
            ab[2, :-1] = -dt * theta * lo[1:]
            new[k] = solve_banded((1, 1), ab, rhs[k])
        u = new
        out[n, :, 1:-1] = u
    return out


# ---------------------------------------------------------------- Stokes

def stokes_solve(g_t, g_n, ctx: OperatorContext):
    """Stokes flow with wall velocity (g_t, g_n) [Nt+1, Nx], zero initial data.

    S g = (-N' e^{-aY} g_n + N'(1 - U) E1~ V g,  e^{-aY} g_n + U E1~ V g),
    V g = g_n - N' g_t.  The mean mode carries no pressure coupling: its
    tangential part is E1 g_t and its normal part the constant g_n.
    """
    xi = ctx.xi
    a = ctx.rate
    g_t = np.asarray(g_t, dtype=complex)
    g_n = np.asarray(g_n, dtype=complex)
    V = g_n - riesz_Np(g_t, xi)
    E = e1_apply(V, ctx)
    UE = ukai_apply(E, ctx)
    decay = np.exp(-np.outer(a, ctx.Y))[None]
    s1 = riesz_Np(-decay * g_n[:, :, None] + (E - UE), xi, axis=-2)
    s2 = decay * g_n[:, :, None] + UE
    zero = xi == 0
    if zero.any():
        mean = e1_apply(g_t[:, zero], _sub(ctx, zero))
        s1[:, zero] = mean
        s2[:, zero] = g_n[:, zero][:, :, None] * np.ones_like(ctx.Y)
    return s1, s2


def _sub(ctx: OperatorContext, sel) -> OperatorContext:
    return OperatorContext(ctx.eps, ctx.xi[sel], ctx.Y, ctx.t, ctx.e2_scheme)


def nstar_apply(w1, w2, ctx: OperatorContext):
    """N* w = P E2 w - S gamma P E2 w: Stokes flow forced by w with zero wall velocity."""
    h1 = e2_apply(w1, ctx)
    h2 = e2_apply(w2, ctx)
    p1, p2 = pinf_project(h1, h2, ctx)
    s1, s2 = stokes_solve(p1[..., 0], p2[..., 0], ctx)
    return p1 - s1, p2 - s2


# ------------------------------------------------------------ diagnostics

def layer_divergence(v1, v2, ctx: OperatorContext) -> np.ndarray:
    """i xi v1 + eps^-1 d_Y v2 with second-order differences in Y."""
    dv2 = np.gradient(v2, ctx.Y, axis=-1, edge_order=2)
    return 1j * ctx.xi[:, None] * v1 + dv2 / ctx.eps


def pinf_divergence(v1, v2, ctx: OperatorContext) -> np.ndarray:
    """Divergence of pinf_project(v1, v2) from the sweep identities
    d_Y L f = f - a L f, d_Y R f = -f + a R f (no differencing)."""
    a = ctx.rate
    Y = ctx.Y
    xi = ctx.xi
    Nv1 = riesz_Np(v1, xi, axis=-2)
    Nv2 = riesz_Np(v2, xi, axis=-2)
    decay = np.exp(-np.outer(a, Y))
    half = 0.5 * a[:, None]
    ac = a[:, None]
    m_n, s_n = -Nv1 + v2, Nv1 + v2
    m_t, s_t = v1 + Nv2, v1 - Nv2
    Ln, Rn, Mn = forward_sweep(m_n, a, Y), backward_sweep(s_n, a, Y), backward_sweep(m_n, a, Y)[..., :1]
    Lt, Rt, Mt = forward_sweep(m_t, a, Y), backward_sweep(s_t, a, Y), backward_sweep(m_t, a, Y)[..., :1]
    dpn = half * (m_n - ac * Ln - s_n + ac * Rn + ac * decay * Mn)
    pt = v1 - half * (Lt + Rt - decay * Mt)
    return 1j * xi[:, None] * pt + dpn / ctx.eps


def stokes_divergence(g_t, g_n, ctx: OperatorContext) -> np.ndarray:
    """Divergence of stokes_solve(g_t, g_n) from the same identities."""
    xi = ctx.xi
    a = ctx.rate
    g_t = np.asarray(g_t, dtype=complex)
    g_n = np.asarray(g_n, dtype=complex)
    E = e1_apply(g_n - riesz_Np(g_t, xi), ctx)
    LE = forward_sweep(E, a, ctx.Y)
    decay = np.exp(-np.outer(a, ctx.Y))[None]
    ac = a[:, None]
    s1, _ = stokes_solve(g_t, g_n, ctx)
    ds2 = -ac * decay * g_n[:, :, None] + ac * (E - ac * LE)
    div = 1j * xi[:, None] * s1 + ds2 / ctx.eps
    div[:, xi == 0] = 0.0   # mean mode: s2 is the constant g_n
    return div


def nstar_divergence(w1, w2, ctx: OperatorContext) -> np.ndarray:
    h1 = e2_apply(w1, ctx)
    h2 = e2_apply(w2, ctx)
    p1, p2 = pinf_project(h1, h2, ctx)
    return pinf_divergence(h1, h2, ctx) - stokes_divergence(p1[..., 0], p2[..., 0], ctx)


def weak_divergence(v1, v2, ctx: OperatorContext) -> np.ndarray:
    """v2(Y) - v2(0) + eps i xi int_0^Y v1: zero for divergence-free fields (trapezoid in Y)."""
    h = np.diff(ctx.Y)
    seg = 0.5 * (v1[..., 1:] + v1[..., :-1]) * h
    cum = np.zeros_like(v1)
    cum[..., 1:] = np.cumsum(seg, axis=-1)
    return v2 - v2[..., :1] + ctx.eps * 1j * ctx.xi[:, None] * cum


def stretched_grid(Y_max: float, n: int, h0: float) -> np.ndarray:
    """n points on [0, Y_max], first spacing about h0, sinh-stretched."""
    if h0 * (n - 1) >= Y_max:
        return np.linspace(0.0, Y_max, n)
    s = np.linspace(0.0, 1.0, n)
    lo, hi = 1e-8, 50.0
    for _ in range(200):
        b = 0.5 * (lo + hi)
        first = Y_max * np.sinh(b * s[1]) / np.sinh(b)
        if first > h0:
            lo = b
        else:
            hi = b
    b = 0.5 * (lo + hi)
    return Y_max * np.sinh(b * s) / np.sinh(b)
