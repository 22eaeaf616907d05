"""The remainder e of the expansion, split as e = N* e* + sigma + h.

All fields live on a stretched layer grid Y in [0, y_e / eps] so that the
Stokes-type pieces (which spread over the outer scale) are captured.
Components are physical velocities: divergence i xi e1 + eps^-1 d_Y e2.

h      = (h', eps h_n): heat response to eps d_xx u^S,  h' = -eps d_xx u00 F.
sigma  = Stokes flow with wall velocity (0, eps G), G = -gamma vbar1 - gamma h_n.
k      = forcing of e* (the residual of the truncated expansion, divided by eps,
         minus the equations solved by h and sigma).
e*     = k - [B'.grad N + N.grad B' + eps N.grad N],  N = N* e*,  B' = B + eps (sigma + h).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline
from scipy.special import erfc

from .domain import from_modes, to_modes
from .errors import NoContraction
from .euler1 import C1
from .halfspace import OperatorContext, nstar_apply, stokes_solve, stretched_grid
from .prandtl0 import erfc_profile, erfc_tail_integral, gaussian_slope, ierfc, tail_integral
from .prandtl1 import F_half_closed, F_half_dY


# ------------------------------------------------------------ heat kernel F

def i2erfc(z):
    z = np.asarray(z, dtype=float)
    return 0.25 * (erfc(z) - 2 * z * ierfc(z))


def i3erfc(z):
    z = np.asarray(z, dtype=float)
    return (ierfc(z) - 2 * z * i2erfc(z)) / 6.0


def F_heat_closed(t: float, Y) -> np.ndarray:
    """Heat solution with source erfc(Y/2 sqrt t), zero wall value and zero data: Y sqrt(t) ierfc(Y/2 sqrt t)."""
    Y = np.asarray(Y, dtype=float)
    if t <= 0:
        return np.zeros_like(Y)
    return Y * np.sqrt(t) * ierfc(Y / (2 * np.sqrt(t)))


def F_heat_dY(t: float, Y) -> np.ndarray:
    Y = np.asarray(Y, dtype=float)
    if t <= 0:
        return np.zeros_like(Y)
    z = Y / (2 * np.sqrt(t))
    return np.sqrt(t) * ierfc(z) - 0.5 * Y * erfc(z)


def F_heat_tail(t: float, Y) -> np.ndarray:
    """int_Y^inf F dY' = 4 t^{3/2} [z i2erfc(z) + i3erfc(z)], z = Y / 2 sqrt t."""
    Y = np.asarray(Y, dtype=float)
    if t <= 0:
        return np.zeros_like(Y)
    z = Y / (2 * np.sqrt(t))
    return 4 * t ** 1.5 * (z * i2erfc(z) + i3erfc(z))


def F_heat_quad(t: float, Y: float) -> float:
    """Nested quadrature of int_0^t ds int_0^inf (E0^- - E0^+)(t - s) erfc(Y'/2 sqrt s) dY'."""
    if t <= 0:
        return 0.0

    def inner(s):
        r = t - s
        if r <= 0:
            return float(erfc(Y / (2 * np.sqrt(s)))) if s > 0 else 0.0
        sr = np.sqrt(4 * np.pi * r)
        f = lambda yp: (np.exp(-(Y - yp) ** 2 / (4 * r)) - np.exp(-(Y + yp) ** 2 / (4 * r))) / sr * erfc(yp / (2 * np.sqrt(s)))
        w = 12 * np.sqrt(r)
        lo, hi = max(0.0, Y - w), Y + w
        val, _ = integrate.quad(f, lo, hi, epsabs=1e-13, epsrel=1e-11, limit=200, points=[Y] if lo < Y < hi else None)
        return val

    val, _ = integrate.quad(inner, 0.0, t, epsabs=1e-12, epsrel=1e-10, limit=200)
    return val


@dataclass
class HeatTerm:
    h_prime: np.ndarray   # [Nt+1, Nx, NY]
    h_n: np.ndarray
    h_prime_Y: np.ndarray
    F_table: np.ndarray


def h_build(u00, eps: float, times, Y, xi) -> HeatTerm:
    """h' = -eps d_xx u00 F (F solves the heat equation with source erfc), h_n = int_Y^inf d_x h'."""
    u00 = np.asarray(u00)
    xi = np.asarray(xi)
    F = np.array([F_heat_closed(t, Y) for t in times])
    FY = np.array([F_heat_dY(t, Y) for t in times])
    Ft = np.array([F_heat_tail(t, Y) for t in times])
    amp = eps * xi ** 2 * u00          # -eps (i xi)^2 u00
    hp = amp[None, :, None] * F[:, None, :]
    hpY = amp[None, :, None] * FY[:, None, :]
    hn = (1j * xi * amp)[None, :, None] * Ft[:, None, :]
    return HeatTerm(hp, hn, hpY, F)


@dataclass
class SigmaTerm:
    s1: np.ndarray
    s2: np.ndarray
    G: np.ndarray   # [Nt+1, Nx]


def sigma_build(G, ctx: OperatorContext) -> SigmaTerm:
    """Stokes flow with wall velocity (0, eps G)."""
    G = np.asarray(G, dtype=complex)
    s1, s2 = stokes_solve(np.zeros_like(G), ctx.eps * G, ctx)
    return SigmaTerm(s1, s2, G)


# ------------------------------------------------------------- background

_GL_S, _GL_W = np.polynomial.legendre.leggauss(8)
_GL_S = 0.5 * (_GL_S + 1)
_GL_W = 0.5 * _GL_W


def _spline(values, src, dst, deriv: int = 0):
    """Cubic spline of mode arrays [Nx, len(src)] at dst; zero past the source grid."""
    out = np.zeros((values.shape[0], dst.size), dtype=complex)
    inside = dst <= src[-1]
    sp = CubicSpline(src, values, axis=1)
    out[:, inside] = sp(dst[inside], deriv) if deriv else sp(dst[inside])
    return out


class Background:
    """Every expansion field needed by the forcing, sampled on the error grid at one output time."""

    def __init__(self, exp, eps: float, Ye: np.ndarray):
        self.exp = exp
        self.eps = eps
        self.Ye = Ye
        self.xi = exp.euler.xi
        self.YL = exp.prandtl.Y
        self.inner = Ye <= self.YL[-1]
        self.YeL = Ye[self.inner]

    def _taylor(self, n, series_eval, order: int):
        """Integral Taylor remainders on the layer part of the grid.

        order 1: (f(eps Y) - f(0))/eps = Y int_0^1 f_y(s eps Y) ds
        order 2: (f(eps Y) - f(0) - eps Y f_y(0))/eps^2 = Y^2 int_0^1 (1 - s) f_yy(s eps Y) ds
        """
        Y = self.YeL
        pts = (self.eps * np.outer(_GL_S, Y)).ravel()
        vals = series_eval(pts, order).reshape(-1, _GL_S.size, Y.size)
        w = _GL_W if order == 1 else _GL_W * (1 - _GL_S)
        out = np.zeros((vals.shape[0], self.Ye.size), dtype=complex)
        out[:, self.inner] = np.einsum("kqy,q->ky", vals, w) * Y ** order
        return out

    def fields(self, n: int) -> dict:
        exp, eps, Ye, xi = self.exp, self.eps, self.Ye, self.xi
        ix = 1j * xi[:, None]
        y = eps * Ye
        es, u1 = exp.euler, exp.u1
        t = float(es.times[n])
        f = {}
        # outer Euler at y = eps Y
        f["uE"] = es.eval(n, y, 0)
        f["uE_y"] = es.eval(n, y, 0, dy=1)
        f["uE_lap"] = es.eval(n, y, 0, dx=2) + es.eval(n, y, 0, dy=2)
        f["vE"] = es.eval(n, y, 1)
        f["vE_y"] = es.eval(n, y, 1, dy=1)
        f["vE_lap"] = es.eval(n, y, 1, dx=2) + es.eval(n, y, 1, dy=2)
        f["uE_x"] = ix * f["uE"]
        f["vE_x"] = ix * f["vE"]
        # first-order outer
        f["a"] = u1.eval(n, y, 0)
        f["a_y"] = u1.eval(n, y, 0, dy=1)
        f["a_lap"] = u1.eval(n, y, 0, dx=2) + u1.eval(n, y, 0, dy=2)
        f["b"] = u1.eval(n, y, 1)
        f["b_y"] = u1.eval(n, y, 1, dy=1)
        f["b_lap"] = u1.eval(n, y, 1, dx=2) + u1.eval(n, y, 1, dy=2)
        f["a_x"] = ix * f["a"]
        f["b_x"] = ix * f["b"]
        # grouped quotients (layer part only)
        f["dU"] = self._taylor(n, lambda p, o: es.eval(n, p, 0, dy=1), 1)
        f["dUx"] = ix * f["dU"]
        f["qv"] = self._taylor(n, lambda p, o: es.eval(n, p, 1, dy=2), 2)
        f["vq"] = self._taylor(n, lambda p, o: es.eval(n, p, 1, dy=1), 1)
        f["vxq"] = ix * f["vq"]
        f["bq"] = self._taylor(n, lambda p, o: u1.eval(n, p, 1, dy=1), 1)
        # leading layer: singular part analytic, regular part by spline
        pr = exp.prandtl
        u00 = pr.u00[:, None]
        uR = pr.uR(n)
        vR = pr.vbar_R(n)
        f["ut"] = -u00 * erfc_profile(t, Ye)[None, :] + _spline(uR, self.YL, Ye)
        f["ut_Y"] = u00 * gaussian_slope(t, Ye)[None, :] + _spline(uR, self.YL, Ye, 1)
        f["uR_xx"] = -(xi ** 2)[:, None] * _spline(uR, self.YL, Ye)
        f["ut_x"] = ix * f["ut"]
        vS = -ix * u00 * erfc_tail_integral(t, Ye)[None, :]
        f["vb"] = vS + _spline(vR, self.YL, Ye)
        f["vb_x"] = ix * f["vb"]
        f["vb_Y"] = -f["ut_x"]
        f["vR_xx"] = -(xi ** 2)[:, None] * _spline(vR, self.YL, Ye)
        # first-order layer
        q = exp.q
        amp = -2.0 * C1 * np.abs(xi) * pr.u00
        f["q"] = amp[:, None] * F_half_closed(t, Ye)[None, :] + _spline(q.uR1[n], self.YL, Ye)
        f["q_Y"] = amp[:, None] * F_half_dY(t, Ye)[None, :] + _spline(q.uR1[n], self.YL, Ye, 1)
        f["q_x"] = ix * f["q"]
        f["q_xx"] = ix * f["q_x"]
        vb1R = tail_integral(1j * xi[:, None] * q.uR1[n], self.YL)
        vb1S = (ix * amp[:, None]) * (np.sqrt(np.pi) * t * i2erfc(Ye / (2 * np.sqrt(t))))[None, :] if t > 0 \
            else np.zeros_like(f["q"])
        f["vb1"] = vb1S + _spline(vb1R, self.YL, Ye)
        f["vb1_x"] = ix * f["vb1"]
        f["vb1_xx"] = ix * f["vb1_x"]
        f["vb1_Y"] = -f["q_x"]
        # wall data
        f["U"] = pr.U[n]
        f["Ux"] = 1j * xi * pr.U[n]
        f["g"] = pr.vbar(n)[:, 0]
        f["NP_int"] = _spline(self._np_integral(n), self.YL, Ye)
        return f

    def _np_integral(self, n: int) -> np.ndarray:
        """int_Y^inf d_x N_P on the Prandtl grid, N_P = U u~_x + u~ U_x + u~ u~_x + v^P u~_Y."""
        pr = self.exp.prandtl
        Y = pr.Y
        t = float(pr.times[n])
        xi = pr.xi
        ix = 1j * xi[:, None]
        ut = pr.u_tilde(n)
        utY = pr.u00[:, None] * gaussian_slope(t, Y)[None, :] + np.gradient(pr.uR(n), Y, axis=1, edge_order=2)
        vP = pr.v_prandtl(n)
        P = from_modes
        U = P(pr.U[n])[:, None]
        Ux = P(1j * xi * pr.U[n])[:, None]
        NP = U * P(ix * ut) + P(ut) * Ux + P(ut) * P(ix * ut) + P(vP) * P(utY)
        m = to_modes(NP) * self._mask()[:, None]
        return tail_integral(ix * m, Y)

    def _mask(self):
        n = self.xi.size
        return np.abs(np.arange(-n // 2, n // 2)) < n / 3.0


# ------------------------------------------------------------------ forcing

def _dY(f, Y):
    return np.gradient(f, Y, axis=-1, edge_order=2)


def _convect(A1, A2, A1x, A1Ye, A2x, A2Ye, C1_, C2_, C1x, C1Ye, C2x, C2Ye):
    """(A . grad C + C . grad A) in physical space; *Ye are eps^-1 d_Y derivatives."""
    x = A1 * C1x + A2 * C1Ye + C1_ * A1x + C2_ * A1Ye
    y = A1 * C2x + A2 * C2Ye + C1_ * A2x + C2_ * A2Ye
    return x, y


@dataclass
class ErrorInputs:
    """Per-time physical background B' and derivatives, plus H = sigma + h (modes)."""

    B: list
    H1: np.ndarray
    H2: np.ndarray


def forcing_k_assemble(bg: Background, H1, H2, eps: float, n_list=None, parts: bool = False):
    """k = Xi_r + Psi at every output time; returns (k1, k2, Bprime) with k modes [Nt+1, Nx, NY]."""
    exp = bg.exp
    Ye = bg.Ye
    xi = bg.xi
    ix = 1j * xi[:, None]
    nt = exp.euler.times.size
    P = from_modes
    mask = bg._mask()[:, None]
    k1 = np.zeros((nt, xi.size, Ye.size), dtype=complex)
    k2 = np.zeros_like(k1)
    Bp = []
    for n in range(nt):
        f = bg.fields(n)
        e = eps
        # physical samples
        g = {k: P(v) for k, v in f.items() if np.ndim(v) == 2}
        u0 = g["uE"] + g["ut"]
        u0x = g["uE_x"] + g["ut_x"]
        v0 = g["vE"] + e * g["vb"]
        A = g["a"] + g["q"]
        Ax = g["a_x"] + g["q_x"]
        Bn = g["b"] + e * g["vb1"]
        ut, utx, utY = g["ut"], g["ut_x"], g["ut_Y"]
        vb, vbx, vbY = g["vb"], g["vb_x"], g["vb_Y"]
        q, qx, qY = g["q"], g["q_x"], g["q_Y"]
        vb1, vb1x, vb1Y = g["vb1"], g["vb1_x"], g["vb1_Y"]
        kx = -(ut * g["dUx"] + utx * g["dU"] + utY * g["qv"] + utY * g["bq"])
        kx += -vb * g["uE_y"] + e * g["uE_lap"] + e * g["uR_xx"]
        kx += -(ut * g["a_x"] + g["a"] * utx + u0 * qx + q * u0x + e * vb * g["a_y"]
                + (g["vq"] + vb) * qY + e * vb1 * g["uE_y"] + vb1 * utY)
        kx += e * e * g["a_lap"] + e * e * g["q_xx"] - e * A * Ax - e * Bn * g["a_y"] - Bn * qY
        ky = g["NP_int"] - ut * g["vxq"] - q * g["vE_x"] - (u0 + e * A) * vbx - (ut + e * A) * g["b_x"]
        ky += -e * (u0 + e * A) * vb1x
        ky += -(g["vq"] + vb) * vbY - v0 * vb1Y - vb * (g["vE_y"] + e * g["b_y"])
        ky += -Bn * (vbY + e * g["b_y"] + e * vb1Y) - e * vb1 * g["vE_y"]
        ky += e * g["vE_lap"] + e * e * g["vR_xx"] + e * e * g["b_lap"] + e ** 3 * g["vb1_xx"]
        # background B and its gradient (eps^-1 d_Y written as *Ye)
        B1 = u0 + e * A
        B2 = v0 + e * Bn
        B1x = u0x + e * Ax
        B1Ye = g["uE_y"] + utY / e + e * g["a_y"] + qY
        B2x = g["vE_x"] + e * vbx + e * (g["b_x"] + e * vb1x)
        B2Ye = g["vE_y"] + vbY + e * g["b_y"] + e * vb1Y
        # H = sigma + h terms
        h1, h2 = H1[n], H2[n]
        H1p, H2p = P(h1), P(h2)
        H1x, H2x = P(ix * h1), P(ix * h2)
        H1Ye, H2Ye = P(_dY(h1, Ye)) / e, P(_dY(h2, Ye)) / e
        cx, cy = _convect(B1, B2, B1x, B1Ye, B2x, B2Ye, H1p, H2p, H1x, H1Ye, H2x, H2Ye)
        kx -= cx + e * (H1p * H1x + H2p * H1Ye)
        ky -= cy + e * (H1p * H2x + H2p * H2Ye)
        k1[n] = to_modes(kx) * mask
        k2[n] = to_modes(ky) * mask
        # B' = B + eps H
        Bp.append((B1 + e * H1p, B2 + e * H2p, B1x + e * H1x, B1Ye + e * H1Ye, B2x + e * H2x, B2Ye + e * H2Ye))
    return k1, k2, Bp


def add_heat_viscous(k1, k2, heat: HeatTerm, xi, eps):
    """The x-diffusion of h that h itself does not solve: + eps^2 h'_xx, + eps^3 h_n,xx."""
    lap = -(np.asarray(xi) ** 2)[None, :, None]
    return k1 + eps ** 2 * lap * heat.h_prime, k2 + eps ** 3 * lap * heat.h_n


# --------------------------------------------------------------- e* solve

@dataclass
class ErrorState:
    e_star1: np.ndarray
    e_star2: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    Y: np.ndarray
    eps: float
    picard_log: list = field(default_factory=list)
    parts: dict = field(default_factory=dict)

    def k_norm(self, Lx: float = np.pi) -> np.ndarray:
        return layer_norm(self.k1, self.k2, self.Y, Lx)

    def e_norm(self, Lx: float = np.pi) -> np.ndarray:
        return layer_norm(self.e1, self.e2, self.Y, Lx)

    def picard_ratios(self) -> np.ndarray:
        r = np.asarray(self.picard_log)
        return r[1:] / r[:-1] if r.size > 1 else np.array([])

    def eval(self, n: int, y, comp: int) -> np.ndarray:
        """Mode values of e at outer points y (Y = y / eps); zero beyond the grid."""
        vals = self.e1[n] if comp == 0 else self.e2[n]
        return _spline(vals, self.Y, np.asarray(y, dtype=float) / self.eps)


def layer_norm(f1, f2, Y, Lx: float = np.pi) -> np.ndarray:
    """L2 norm in (x, Y) per time of a two-component mode series [Nt+1, Nx, NY] (trapezoid in Y)."""
    w = np.zeros_like(Y)
    h = np.diff(Y)
    w[1:] += 0.5 * h
    w[:-1] += 0.5 * h
    sq = (np.abs(f1) ** 2 + np.abs(f2) ** 2) @ w
    return np.sqrt(2 * Lx * sq.sum(axis=-1))


def _feedback(N1, N2, Bp, Ye, eps, xi, mask, linear_only: bool):
    """[B'.grad N + N.grad B' + eps N.grad N] as modes."""
    ix = 1j * xi[:, None]
    P = from_modes
    out1 = np.zeros_like(N1)
    out2 = np.zeros_like(N2)
    for n in range(N1.shape[0]):
        b = Bp[n]
        n1, n2 = P(N1[n]), P(N2[n])
        n1x, n2x = P(ix * N1[n]), P(ix * N2[n])
        n1Ye, n2Ye = P(_dY(N1[n], Ye)) / eps, P(_dY(N2[n], Ye)) / eps
        cx, cy = _convect(*b, n1, n2, n1x, n1Ye, n2x, n2Ye)
        if not linear_only:
            cx = cx + eps * (n1 * n1x + n2 * n1Ye)
            cy = cy + eps * (n1 * n2x + n2 * n2Ye)
        out1[n] = to_modes(cx) * mask
        out2[n] = to_modes(cy) * mask
    return out1, out2


def solve_estar(k1, k2, Bp, ctx: OperatorContext, tol: float = 1e-8, max_iter: int = 50,
                linear_only: bool = False):
    """Picard iteration e* <- k - feedback(N* e*), starting from e* = k."""
    mask = (np.abs(np.arange(-ctx.xi.size // 2, ctx.xi.size // 2)) < ctx.xi.size / 3.0)[:, None]
    s1, s2 = k1.copy(), k2.copy()
    log, worse = [], 0
    N1 = N2 = None
    for it in range(max_iter):
        N1, N2 = nstar_apply(s1, s2, ctx)
        f1, f2 = _feedback(N1, N2, Bp, ctx.Y, ctx.eps, ctx.xi, mask, linear_only)
        n1, n2 = k1 - f1, k2 - f2
        top = max(np.abs(n1).max(), np.abs(n2).max(), 1e-300)
        res = max(np.abs(n1 - s1).max(), np.abs(n2 - s2).max()) / top
        s1, s2 = n1, n2
        if log and res >= log[-1]:
            worse += 1
            if worse >= 5:
                raise NoContraction(f"e* iteration stalled at {res:.3e}")
        else:
            worse = 0
        log.append(float(res))
        if res <= tol:
            break
    N1, N2 = nstar_apply(s1, s2, ctx)
    return s1, s2, N1, N2, log


def error_grid(eps: float, y_extent: float = 8.0, n: int = 320, h0: float = 0.05) -> np.ndarray:
    return stretched_grid(y_extent / eps, n, h0)


def build_error(exp, eps: float, Ye=None, tol: float = 1e-8, max_iter: int = 50,
                linear_only: bool = False) -> ErrorState:
    """Assemble h, sigma, k and e* for one eps; returns the full error field e on the grid Ye."""
    Ye = error_grid(eps) if Ye is None else Ye
    times = exp.euler.times
    xi = exp.euler.xi
    ctx = OperatorContext(eps, xi, Ye, times)
    heat = h_build(exp.prandtl.u00, eps, times, Ye, xi)
    # G = -gamma vbar1 - gamma h_n
    bg = Background(exp, eps, Ye)
    vb1_wall = np.array([bg_wall_vbar1(exp, n) for n in range(times.size)])
    G = -vb1_wall - heat.h_n[:, :, 0]
    sig = sigma_build(G, ctx)
    H1 = sig.s1 + heat.h_prime
    H2 = sig.s2 + eps * heat.h_n
    k1, k2, Bp = forcing_k_assemble(bg, H1, H2, eps)
    k1, k2 = add_heat_viscous(k1, k2, heat, xi, eps)
    s1, s2, N1, N2, log = solve_estar(k1, k2, Bp, ctx, tol, max_iter, linear_only)
    return ErrorState(s1, s2, k1, k2, N1 + H1, N2 + H2, Ye, eps, log,
                      parts={"sigma": sig, "heat": heat, "N": (N1, N2), "G": G})


def bg_wall_vbar1(exp, n: int) -> np.ndarray:
    """gamma vbar1 = int_0^inf d_x q: singular part in closed form plus the regular quadrature."""
    t = float(exp.euler.times[n])
    xi = exp.euler.xi
    amp = -2.0 * C1 * np.abs(xi) * exp.prandtl.u00
    sing = 1j * xi * amp * (np.sqrt(np.pi) * t * float(i2erfc(0.0))) if t > 0 else 0 * xi
    reg = tail_integral(1j * xi[:, None] * exp.q.uR1[n], exp.prandtl.Y)[:, 0]
    return sing + reg
