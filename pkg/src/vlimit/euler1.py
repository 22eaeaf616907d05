"""First-order outer correction u1 = u^E_(1).

u1 solves the Euler equations linearized about u^E,

    d_t u1 + u^E . grad u1 + u1 . grad u^E + grad p1 = 0,  div u1 = 0,
    gamma_n u1 = -g,  u1(0) = 0,

where g is the wall influx of the leading-order layer.  Each field is held as
a potential lift carrying the normal wall velocity beta = -g (analytic in y)
plus a remainder w0 with zero normal trace stored in the mirror basis.  The
time derivative of the lift is a gradient, so w0' = -P[u^E . grad u1 + u1 . grad u^E].

Splitting g = gR + gS gives u1 = wR + wS with wS = sqrt(t) wSb + I[w*], where
wSb is the lift of the unit singular influx and I[f](t) = int_0^t sqrt(s) f(s) ds.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .domain import Domain, SpectralField, from_modes, to_modes
from .errors import NoContraction
from .euler import EulerSeries, MirrorBasis, coef_at, project_modes

C1 = 2.0 / np.sqrt(np.pi)


def lift_values(beta, xi, y, comp: int, dx: int = 0, dy: int = 0) -> np.ndarray:
    """Potential flow with normal wall velocity beta [Nx]: modes [Nx, len(y)]."""
    ax = np.abs(xi)
    safe = np.where(ax == 0, 1.0, ax)
    decay = np.exp(-np.outer(ax, np.atleast_1d(y))) * ((-ax) ** dy)[:, None]
    amp = np.where(ax == 0, 0.0, 1.0) * beta * (1j * xi) ** dx
    if comp == 0:
        amp = amp * (-1j * xi / safe)
    return amp[:, None] * decay


def wSb_profile(u00, xi, y, c1: float = C1) -> SpectralField:
    """c1 (-i xi/|xi|, 1) e^{-|xi| y} i xi u00; the mean mode is zero."""
    beta = c1 * 1j * np.asarray(xi) * np.asarray(u00)
    modes = np.stack([lift_values(beta, xi, y, 0), lift_values(beta, xi, y, 1)], axis=2)
    return SpectralField(modes, np.asarray(xi), np.asarray(y), decay_tag="exponential")


@dataclass
class OuterCorrection:
    """u1(t_n) = lift(beta_n) + (a_n cos, b_n sin)."""

    times: np.ndarray
    beta: np.ndarray   # [Nt+1, Nx]
    a: np.ndarray      # [Nt+1, Nx, Ny]
    b: np.ndarray
    basis: MirrorBasis
    xi: np.ndarray
    meta: dict = field(default_factory=dict)

    def eval(self, n: int, y, comp: int, dx: int = 0, dy: int = 0) -> np.ndarray:
        y = np.atleast_1d(np.asarray(y, dtype=float))
        out = lift_values(self.beta[n], self.xi, y, comp, dx, dy)
        coef = (self.a[n] if comp == 0 else self.b[n]) * ((1j * self.xi) ** dx)[:, None]
        return out + self.basis.eval_at(coef, y, "even" if comp == 0 else "odd", deriv=dy)

    def field(self, n: int) -> SpectralField:
        y = self.basis.y
        modes = np.stack([self.eval(n, y, 0), self.eval(n, y, 1)], axis=2)
        return SpectralField(modes, self.xi, y)

    def wall_normal(self, n: int) -> np.ndarray:
        return self.eval(n, [0.0], 1)[:, 0]

    def wall_tangential(self, n: int) -> np.ndarray:
        return self.eval(n, [0.0], 0)[:, 0]


class LinearizedEuler:
    """w0' = -P[u^E . grad u1 + u1 . grad u^E] with u1 = lift(beta) + w0."""

    def __init__(self, domain: Domain, euler: EulerSeries):
        self.domain = domain
        self.euler = euler
        self.basis = euler.basis
        self.xi = domain.xi
        self.y = self.basis.y
        self.mask = domain.dealias_mask()[:, None] & self.basis.band[None, :]
        self.xmask = domain.dealias_mask()[:, None]

    def _phys(self, coef, parity):
        f = self.basis.even_eval(coef) if parity == "even" else self.basis.odd_eval(coef)
        return from_modes(f)

    def _fields(self, a, b, beta=None):
        """Physical (u, v, u_x, u_y, v_x, v_y) for coefficients (a, b) plus an optional lift."""
        xi = self.xi[:, None]
        eta = self.basis.eta
        a, b = a * self.mask, b * self.mask
        vals = [
            self.basis.even_eval(a), self.basis.odd_eval(b),
            self.basis.even_eval(1j * xi * a), self.basis.odd_eval(-eta * a),
            self.basis.odd_eval(1j * xi * b), self.basis.even_eval(eta * b),
        ]
        if beta is not None:
            y = self.y
            lifts = [lift_values(beta, self.xi, y, 0), lift_values(beta, self.xi, y, 1),
                     lift_values(beta, self.xi, y, 0, dx=1), lift_values(beta, self.xi, y, 0, dy=1),
                     lift_values(beta, self.xi, y, 1, dx=1), lift_values(beta, self.xi, y, 1, dy=1)]
            vals = [v + l * self.xmask for v, l in zip(vals, lifts)]
        return [from_modes(v) for v in vals]

    def forcing(self, t: float, beta, a0, b0):
        """-P[u^E . grad u1 + u1 . grad u^E] as mirror coefficients."""
        aE, bE = coef_at(self.euler, t)
        U, V, Ux, Uy, Vx, Vy = self._fields(aE, bE)
        u, v, ux, uy, vx, vy = self._fields(a0, b0, beta)
        n1 = U * ux + V * uy + u * Ux + v * Uy
        n2 = U * vx + V * vy + u * Vx + v * Vy
        m1 = to_modes(n1) * self.xmask
        m2 = to_modes(n2) * self.xmask
        pa, pb = project_modes(m1, m2, self.domain, self.basis)
        return -pa * self.mask, -pb * self.mask


def solve_linearized(lin: LinearizedEuler, beta_fn, times, substeps: int = 4) -> OuterCorrection:
    """RK4 march of w0 from zero; beta_fn(t) gives the lift amplitude [Nx]."""
    times = np.asarray(times, dtype=float)
    shape = (lin.xi.size, lin.y.size)
    a = np.zeros(shape, dtype=complex)
    b = np.zeros(shape, dtype=complex)
    A, B, beta = [a.copy()], [b.copy()], [beta_fn(times[0])]
    for t0, t1 in zip(times[:-1], times[1:]):
        dt = (t1 - t0) / substeps
        t = t0
        for _ in range(substeps):
            k1 = lin.forcing(t, beta_fn(t), a, b)
            k2 = lin.forcing(t + dt / 2, beta_fn(t + dt / 2), a + dt / 2 * k1[0], b + dt / 2 * k1[1])
            k3 = lin.forcing(t + dt / 2, beta_fn(t + dt / 2), a + dt / 2 * k2[0], b + dt / 2 * k2[1])
            k4 = lin.forcing(t + dt, beta_fn(t + dt), a + dt * k3[0], b + dt * k3[1])
            a = a + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            b = b + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
            t += dt
        A.append(a.copy()); B.append(b.copy()); beta.append(beta_fn(t1))
    return OuterCorrection(times, np.array(beta), np.array(A), np.array(B), lin.basis, lin.xi)


def trace_interpolant(times, values):
    """Cubic spline in t through a wall trace [Nt+1, Nx]; constant 0 for a single sample."""
    values = np.asarray(values)
    if len(times) < 2:
        return lambda t: values[0]
    spline = CubicSpline(np.asarray(times), values, axis=0)
    return lambda t: spline(t)


def solve_wR(domain: Domain, euler: EulerSeries, gR, substeps: int = 4) -> OuterCorrection:
    """Regular part: normal wall velocity -gR.  gR: [Nt+1, Nx] at the Euler output times."""
    gR = np.asarray(gR)
    lin = LinearizedEuler(domain, euler)
    interp = trace_interpolant(euler.times, gR)
    return solve_linearized(lin, lambda t: -interp(t), euler.times, substeps)


def sqrt_weights(times) -> np.ndarray:
    """c[n, m] = int_0^{t_n} sqrt(s) hat_m(s) ds for piecewise-linear data on ``times``."""
    t = np.asarray(times, dtype=float)
    nt = t.size
    P1 = lambda s: (2 / 3) * s ** 1.5
    P2 = lambda s: (2 / 5) * s ** 2.5
    c = np.zeros((nt, nt))
    for m in range(nt - 1):
        lo, hi = t[m], t[m + 1]
        h = hi - lo
        # over [lo, hi]: hat_m = (hi - s)/h, hat_{m+1} = (s - lo)/h
        down = (hi * (P1(hi) - P1(lo)) - (P2(hi) - P2(lo))) / h
        up = ((P2(hi) - P2(lo)) - lo * (P1(hi) - P1(lo))) / h
        c[m + 1:, m] += down
        c[m + 1:, m + 1] += up
    return c


@dataclass
class SingularCorrection:
    wstar_a: np.ndarray
    wstar_b: np.ndarray
    I_a: np.ndarray
    I_b: np.ndarray
    residuals: list
    beta_unit: np.ndarray   # i xi u00 c1, the lift amplitude of wSb


def solve_wSstar(domain: Domain, euler: EulerSeries, u00, c1: float = C1,
                 tol: float = 1e-10, max_iter: int = 50) -> SingularCorrection:
    """Picard iteration for w* = -P[u^E . grad(wSb + I[w*]/sqrt t) + (wSb + I[w*]/sqrt t) . grad u^E]."""
    lin = LinearizedEuler(domain, euler)
    times = euler.times
    nt = times.size
    beta_unit = c1 * 1j * domain.xi * np.asarray(u00)
    weights = sqrt_weights(times)
    shape = (nt, domain.xi.size, lin.y.size)
    wa = np.zeros(shape, dtype=complex)
    wb = np.zeros(shape, dtype=complex)
    Ia = np.zeros(shape, dtype=complex)
    Ib = np.zeros(shape, dtype=complex)
    residuals, worse = [], 0
    if not np.any(beta_unit):
        return SingularCorrection(wa, wb, Ia, Ib, [0.0], beta_unit)
    for it in range(max_iter):
        na = np.empty_like(wa)
        nb = np.empty_like(wb)
        for n, t in enumerate(times):
            scale = 1.0 / np.sqrt(t) if t > 0 else 0.0
            na[n], nb[n] = lin.forcing(t, beta_unit, Ia[n] * scale, Ib[n] * scale)
        top = max(np.abs(na).max(), np.abs(nb).max(), 1e-300)
        res = max(np.abs(na - wa).max(), np.abs(nb - wb).max()) / top
        wa, wb = na, nb
        Ia = np.einsum("nm,mky->nky", weights, wa)
        Ib = np.einsum("nm,mky->nky", weights, wb)
        if residuals and res >= residuals[-1]:
            worse += 1
            if worse >= 5:
                raise NoContraction(f"Picard residual stalled at {res:.3e}")
        else:
            worse = 0
        residuals.append(float(res))
        if res <= tol:
            break
    return SingularCorrection(wa, wb, Ia, Ib, residuals, beta_unit)


def assemble_uE1(wR: OuterCorrection, sing: SingularCorrection, g=None, tol: float = 1e-8) -> OuterCorrection:
    """u1 = wR + sqrt(t) wSb + I[w*]; with ``g`` [Nt+1, Nx] the wall condition gamma_n u1 = -g is asserted."""
    root = np.sqrt(wR.times)[:, None]
    beta = wR.beta + root * sing.beta_unit[None, :]
    out = OuterCorrection(wR.times, beta, wR.a + sing.I_a, wR.b + sing.I_b, wR.basis, wR.xi,
                          meta={"picard": sing.residuals})
    if g is not None:
        err = max(np.abs(out.wall_normal(n) + g[n]).max() for n in range(wR.times.size))
        scale = max(np.abs(g).max(), 1.0)
        if err > tol * scale:
            raise AssertionError(f"gamma_n u1 + g = {err:.2e}")
    return out
