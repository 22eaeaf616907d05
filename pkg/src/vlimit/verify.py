"""Oracle suites for the closed forms, the half-space operators and the singular scalings.

Every check returns a ``Check`` with the measured value and its tolerance; the
``verify-ops`` command prints them as a table.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy import integrate, sparse
from scipy.interpolate import CubicSpline
from scipy.sparse.linalg import splu

from .domain import SpectralField, make_domain, to_modes
from .error_term import h_build, i2erfc
from .euler1 import C1
from .euler import leray_project
from .halfspace import (OperatorContext, e1_apply, e2_apply, nstar_apply, nstar_divergence,
                        pinf_project, stretched_grid)
from .prandtl0 import erfc_profile, singular_u
from .prandtl1 import F_half, F_half_closed, F_half_dY


@dataclass
class Check:
    name: str
    value: float
    tol: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.name:<44s} {self.value:11.3e}  (tol {self.tol:.1e}) {self.detail}"


def _le(name, value, tol, detail=""):
    value = float(value)
    return Check(name, value, tol, bool(value <= tol), detail)


def _within(name, value, target, tol, detail=""):
    value = float(value)
    return Check(name, value, tol, bool(abs(value - target) <= tol), detail or f"target {target}")


def fit_exponent(t, values) -> float:
    """Slope of log values against log t."""
    return float(np.polyfit(np.log(t), np.log(values), 1)[0])


# ------------------------------------------------------------ closed forms

def erfc_quadrature(z: float) -> float:
    """2/sqrt(pi) int_z^inf e^{-s^2} ds by adaptive quadrature."""
    head, _ = integrate.quad(lambda s: np.exp(-s * s), z, z + 8.0, epsabs=0.0, epsrel=1e-13, limit=200)
    tail, _ = integrate.quad(lambda s: np.exp(-s * s), z + 8.0, np.inf, epsabs=0.0, epsrel=1e-12, limit=200)
    return 2 * (head + tail) / np.sqrt(np.pi)


def closed_form_suite() -> list[Check]:
    out = []
    # u^S against quadrature of the erfc integral, for a single-mode u00
    u00 = np.zeros(16, dtype=complex)
    u00[7], u00[9] = 0.5j, -0.5j
    Y = np.linspace(0, 10, 41)
    worst = 0.0
    for t in (0.01, 0.05, 0.25):
        uS = singular_u(u00, t, Y).modes[:, :, 0]
        ref = np.array([-erfc_quadrature(y / (2 * np.sqrt(t))) for y in Y])
        worst = max(worst, np.abs(uS - u00[:, None] * ref[None, :]).max())
    out.append(_le("u^S vs erfc quadrature", worst, 1e-12))
    # F_1/2 two representations on a 20 x 20 grid
    ts = np.linspace(0.0125, 0.25, 20)
    Ys = np.linspace(0.0, 3.0, 20)
    diff = max(abs(F_half(t, y, "sigma") - F_half(t, y, "kernel")) for t in ts for y in Ys)
    out.append(_le("F_1/2 sigma vs kernel representation", diff, 1e-9))
    wall = max(abs(F_half(t, 0.0) - np.sqrt(t) / 2) for t in ts)
    out.append(_le("F_1/2(t, 0) = sqrt(t)/2", wall, 1e-10))
    # E1 with a step datum
    Yg = np.linspace(0, 12, 121)
    tg = np.linspace(0, 0.25, 51)
    ctx = OperatorContext(0.05, np.array([0.0, 1.0]), Yg, tg)
    step = np.ones((tg.size, 2), dtype=complex)
    res = e1_apply(step, ctx, x_diffusion=False)
    ref = np.array([erfc_profile(t, Yg) for t in tg[1:]])
    out.append(_le("E1 step datum = erfc profile", np.abs(res[1:, 0] - ref).max(), 1e-6))
    return out


# ---------------------------------------------------------- operator suite

def _smooth_layer_data(xi, Y, t, seed: int = 0):
    """Smooth, decaying, real-in-x test fields [Nt+1, Nx, NY] supported on a few modes."""
    rng = np.random.default_rng(seed)
    nx = xi.size
    w1 = np.zeros((t.size, nx, Y.size), dtype=complex)
    w2 = np.zeros_like(w1)
    for k in (1, 2, 3):
        c1, c2 = rng.normal(size=2) + 1j * rng.normal(size=2)
        i = nx // 2 + k
        j = nx // 2 - k
        w1[:, i] = c1 * t[:, None] * (Y ** 2 * np.exp(-Y))[None, :]
        w2[:, i] = c2 * t[:, None] * (Y * np.exp(-0.5 * Y * Y / 4))[None, :]
        w1[:, j] = np.conj(w1[:, i])
        w2[:, j] = np.conj(w2[:, i])
    return w1, w2


def stokes_streamfunction_oracle(w1, w2, eps, xi, t, Y_top: float, M: int):
    """Forced Stokes flow with no-slip wall, solved through a streamfunction.

    N1 = psi_Y, N2 = -i xi eps psi, (d_t - L) L psi = d_Y w1 - i xi eps w2 with
    L = d_YY - (eps xi)^2, psi = psi_Y = 0 at Y = 0 and Y = Y_top.  Uniform
    second-order differences in Y, Crank-Nicolson in t.  The mean mode has no
    pressure coupling (a streamfunction would force zero net flux), so there
    N1 solves the Dirichlet heat problem with source w1 and N2 = 0.  Inputs are
    given on a uniform grid of M + 1 points; returns (N1, N2) on the same grid.
    """
    h = Y_top / M
    n = M - 1                                  # interior unknowns
    e = np.ones(n)
    D2 = sparse.diags([e[:-1], -2 * e, e[:-1]], [-1, 0, 1], format="lil") / h ** 2
    D4 = sparse.diags([e[:-2], -4 * e[:-1], 6 * e, -4 * e[:-1], e[:-2]], [-2, -1, 0, 1, 2], format="lil")
    D4[0, 0] += 1.0                           # clamped ends: ghost psi_{-1} = psi_1
    D4[n - 1, n - 1] += 1.0
    D4 = D4.tocsc() / h ** 4
    D2 = D2.tocsc()
    I = sparse.identity(n, format="csc")
    nt = t.size
    N1 = np.zeros((nt, xi.size, M + 1), dtype=complex)
    N2 = np.zeros_like(N1)
    for k, x in enumerate(xi):
        if not (np.abs(w1[:, k]).max() > 0 or np.abs(w2[:, k]).max() > 0):
            continue
        if x == 0:
            N1[:, k] = _heat_dirichlet(w1[:, k], t, D2, I)
            continue
        a2 = (eps * x) ** 2
        L = D2 - a2 * I
        L4 = D4 - 2 * a2 * D2 + a2 * a2 * I
        rhs_src = np.gradient(w1[:, k], h, axis=-1) - 1j * x * eps * w2[:, k]
        psi = np.zeros(n, dtype=complex)
        cache = {}
        for m in range(1, nt):
            dt = round(t[m] - t[m - 1], 14)
            if dt not in cache:
                cache[dt] = (splu((L - 0.5 * dt * L4).tocsc()), (L + 0.5 * dt * L4).tocsc())
            lu, Bm = cache[dt]
            r = Bm @ psi + 0.5 * dt * (rhs_src[m, 1:-1] + rhs_src[m - 1, 1:-1])
            psi = lu.solve(r.real) + 1j * lu.solve(r.imag)
            full = np.concatenate([[0.0], psi, [0.0]])
            N1[m, k] = np.gradient(full, h, edge_order=2)
            N1[m, k, 0] = 0.0
            N2[m, k] = -1j * x * eps * full
    return N1, N2


def _heat_dirichlet(src, t, D2, I):
    """Crank-Nicolson for u_t = u_YY + src with u = 0 at both ends; src [Nt+1, M+1]."""
    out = np.zeros(src.shape, dtype=complex)
    u = np.zeros(src.shape[1] - 2, dtype=complex)
    cache = {}
    for m in range(1, t.size):
        dt = round(t[m] - t[m - 1], 14)
        if dt not in cache:
            cache[dt] = (splu((I - 0.5 * dt * D2).tocsc()), (I + 0.5 * dt * D2).tocsc())
        lu, Bm = cache[dt]
        r = Bm @ u + 0.5 * dt * (src[m, 1:-1] + src[m - 1, 1:-1])
        u = lu.solve(r.real) + 1j * lu.solve(r.imag)
        out[m, 1:-1] = u
    return out


def nstar_bruteforce_error(eps: float = 0.1, nx: int = 16, nt: int = 32, T: float = 0.25,
                           Y_top: float = 80.0, M: int = 4000, NY: int = 300) -> float:
    """max |N* w - oracle| / max |oracle| on a 16 x-point, 32 time-step grid."""
    xi = np.pi * np.arange(-nx // 2, nx // 2) / np.pi
    t = np.linspace(0, T, nt + 1)
    Y = stretched_grid(Y_top, NY, 0.05)
    Yu = np.linspace(0, Y_top, M + 1)
    w1u, w2u = _smooth_layer_data(xi, Yu, t)
    ctx = OperatorContext(eps, xi, Y, t)
    w1, w2 = _smooth_layer_data(xi, Y, t)
    n1, n2 = nstar_apply(w1, w2, ctx)
    o1, o2 = stokes_streamfunction_oracle(w1u, w2u, eps, xi, t, Y_top, M)
    o1 = CubicSpline(Yu, o1, axis=-1)(Y)
    o2 = CubicSpline(Yu, o2, axis=-1)(Y)
    scale = max(np.abs(o1).max(), np.abs(o2).max())
    return float(max(np.abs(n1 - o1).max(), np.abs(n2 - o2).max()) / scale)


def e2_time_order(scheme: str = "euler", nt: int = 16) -> float:
    """Observed order of E2 in dt from a manufactured solution under step halving."""
    Y = np.linspace(0, 12, 1201)
    xi = np.array([0.0, 2.0])
    eps = 0.1
    prof = Y * np.exp(-Y)
    dprof = (Y - 2) * np.exp(-Y)               # d_YY prof

    def err(n):
        t = np.linspace(0, 0.5, n + 1)
        ctx = OperatorContext(eps, xi, Y, t, e2_scheme=scheme)
        spatial = (eps * xi[:, None]) ** 2 * prof[None, :] - dprof[None, :]      # [Nx, NY]
        um = np.sin(3 * t)[:, None, None] * prof[None, None, :] * np.ones((1, 2, 1))
        src = (3 * np.cos(3 * t))[:, None, None] * prof[None, None, :] + np.sin(3 * t)[:, None, None] * spatial[None]
        return np.abs(e2_apply(src, ctx)[-1] - um[-1]).max()

    e1, e2 = err(nt), err(2 * nt)
    return float(np.log2(e1 / e2))


def operator_suite(eps: float = 0.1) -> list[Check]:
    out = []
    dom = make_domain(Nx=32, Ny=129, y_max=16.0)
    x, y = dom.x[:, None], dom.y[None, :]
    g = np.exp(-y * y / 2)
    u = (np.sin(x) + 0.3 * np.cos(2 * x)) * g * (1 + y)
    v = np.cos(x) * y * g + 0.2 * np.sin(3 * x) * y * y * g
    f = SpectralField(to_modes(np.stack([u, v], axis=2)), dom.xi, dom.y)
    p1 = leray_project(f, dom)
    p2 = leray_project(p1, dom)
    out.append(_le("Leray idempotency", np.abs(p2.modes - p1.modes).max() / np.abs(p1.modes).max(), 1e-8))
    # P-bar-infinity idempotency on smooth layer data
    xi = np.arange(-8, 8, dtype=float)
    Y = stretched_grid(80.0, 300, 0.05)
    t1 = np.array([0.0, 1.0])
    ctx = OperatorContext(eps, xi, Y, t1)
    w1, w2 = _smooth_layer_data(xi, Y, t1)
    a1, a2 = pinf_project(w1[1], w2[1], ctx)
    b1, b2 = pinf_project(a1, a2, ctx)
    rel = max(np.abs(b1 - a1).max(), np.abs(b2 - a2).max()) / max(np.abs(a1).max(), np.abs(a2).max())
    out.append(_le("P-bar-inf idempotency", rel, 1e-8, "(odd extension does not preserve range)"))
    # N* contract
    t = np.linspace(0, 0.25, 33)
    ctx = OperatorContext(eps, xi, Y, t)
    w1, w2 = _smooth_layer_data(xi, Y, t)
    n1, n2 = nstar_apply(w1, w2, ctx)
    out.append(_le("N* wall trace", max(np.abs(n1[..., 0]).max(), np.abs(n2[..., 0]).max()), 1e-6))
    out.append(_le("N* divergence", np.abs(nstar_divergence(w1, w2, ctx)).max(), 1e-7))
    out.append(_le("N* vs 16x32 brute-force Stokes", nstar_bruteforce_error(eps), 5e-4))
    out.append(_within("E2 backward-Euler order in dt", e2_time_order("euler"), 1.0, 0.2))
    return out


# ------------------------------------------------------------ scaling fits

def scaling_suite() -> list[Check]:
    out = []
    ts = np.geomspace(0.01, 0.25, 12)
    Y = np.linspace(0, 30, 3001)
    xi = np.array([-1.0, 0.0, 1.0])
    u00 = np.array([0.5j, 0.0, -0.5j])
    tt = np.concatenate([[0.0], ts])
    heat = h_build(u00, 0.1, tt, Y, xi)
    hp = np.abs(heat.h_prime[1:]).max(axis=(1, 2))
    hn = np.abs(heat.h_n[1:]).max(axis=(1, 2))
    out.append(_within("t-exponent of sup|h'|", fit_exponent(ts, hp), 1.0, 0.2))
    out.append(_within("t-exponent of sup|h_n|", fit_exponent(ts, hn), 1.5, 0.2))
    vS1 = np.array([abs(1j * 1.0 * (-2 * C1 * 1.0 * 0.5) * np.sqrt(np.pi) * t * float(i2erfc(0.0))) for t in ts])
    out.append(_within("t-exponent of gamma|vbar^S_1|", fit_exponent(ts, vS1), 1.0, 0.2))
    c0 = c1 = 0.0
    for t in ts:
        live = Y ** 2 / (4 * t) < 600.0            # keep the envelopes above underflow
        Yl = Y[live]
        c0 = max(c0, np.max(F_half_closed(t, Yl) / (np.exp(-Yl ** 2 / (8 * t)) * np.sqrt(t))))
        c1 = max(c1, np.max(np.abs(F_half_dY(t, Yl)) / np.exp(-Yl ** 2 / (4 * t))))
    out.append(_le("F_1/2 <= C e^{-Y^2/8t} sqrt t, C", c0, 1.5))
    out.append(_le("|d_Y F_1/2| <= C e^{-Y^2/4t}, C", c1, 1.5))
    return out


def run_all(groups=("closed", "operators", "scaling")) -> list[Check]:
    table = {"closed": closed_form_suite, "operators": operator_suite, "scaling": scaling_suite}
    out = []
    for g in groups:
        tic = time.perf_counter()
        checks = table[g]()
        elapsed = time.perf_counter() - tic
        for c in checks:
            c.detail = (c.detail + f" [{g} {elapsed:.1f}s]").strip()
        out.extend(checks)
    return out
