"""Half-plane incompressible Euler solver with slip wall, and the half-plane Leray projector.

Tangential velocity is expanded in cos(eta_m y), normal velocity in sin(eta_m y),
eta_m = m pi / y_max.  This is exactly the even/odd mirror extension of the
half-plane field followed by whole-plane Fourier analysis, so the projector
below is the whole-plane Leray projector restricted back to y >= 0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from .domain import Domain, SpectralField, BoundaryTrace, from_modes, to_modes
from .errors import CFLViolation, InvalidConfig, SizeMismatch


class MirrorBasis:
    """Cosine/sine series on the uniform half grid y_j = j y_max / N, j = 0..N."""

    def __init__(self, y_max: float, Ny: int):
        self.y_max = float(y_max)
        self.N = Ny - 1
        self.y = np.linspace(0.0, y_max, Ny)
        self.eta = np.pi * np.arange(Ny) / y_max
        self.band = np.arange(Ny) < 2 * self.N / 3.0

    # samples along axis 1 <-> coefficients along axis 1
    def even_coef(self, f):
        c = sfft.dct(f, type=1, axis=1) / self.N
        c[:, 0] *= 0.5
        c[:, -1] *= 0.5
        return c

    def even_eval(self, c):
        a = c.copy()
        a[:, 1:-1] *= 0.5
        return sfft.dct(a, type=1, axis=1)

    def odd_coef(self, f):
        s = np.zeros_like(f, dtype=np.result_type(f, float))
        s[:, 1:-1] = sfft.dst(f[:, 1:-1], type=1, axis=1) / self.N
        return s

    def odd_eval(self, s):
        f = np.zeros_like(s)
        f[:, 1:-1] = 0.5 * sfft.dst(s[:, 1:-1], type=1, axis=1)
        return f

    def eval_at(self, coef, y, parity: str, deriv: int = 0):
        """Evaluate a series (axis 1) at arbitrary points y; returns [..., len(y)]."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        phase = np.outer(self.eta, y) + deriv * np.pi / 2
        basis = (np.cos(phase) if parity == "even" else np.sin(phase)) * (self.eta ** deriv)[:, None]
        return np.tensordot(coef, basis, axes=([1], [0]))

    def dy(self, coef, parity: str):
        """y-derivative in coefficient space; parity flips."""
        if parity == "even":
            return -self.eta * coef, "odd"
        return self.eta * coef, "even"


def _basis_for(domain: Domain) -> MirrorBasis:
    return MirrorBasis(domain.config.y_max, domain.config.Ny)


def project_coefficients(a, b, xi, eta):
    """Whole-plane Leray projection of (a cos, b sin) coefficient pairs; returns (a', b', phi)."""
    XI = xi[:, None]
    ETA = eta[None, :]
    k2 = XI ** 2 + ETA ** 2
    k2 = np.where(k2 == 0, 1.0, k2)
    phi = -(1j * XI * a + ETA * b) / k2
    a2, b2 = a - 1j * XI * phi, b + ETA * phi
    # the last cosine mode has no sine partner on the grid; drop it so the map is a projection
    a2[:, -1] = 0.0
    b2[:, -1] = 0.0
    phi[:, -1] = 0.0
    return a2, b2, phi


def potential_lift(beta, xi, y):
    """Irrotational, divergence-free field with normal trace beta per mode.

    Mode xi != 0: grad of -(beta/|xi|) e^{-|xi| y}; mode 0 is left at zero.
    Returns (u, v) mode arrays [Nx, len(y)].
    """
    ax = np.abs(xi)
    safe = np.where(ax == 0, 1.0, ax)
    decay = np.exp(-np.outer(ax, y))
    v = beta[:, None] * decay
    u = (-1j * xi / safe)[:, None] * beta[:, None] * decay
    v[ax == 0] = 0.0
    u[ax == 0] = 0.0
    return u, v


def project_modes(n1, n2, domain: Domain, basis: MirrorBasis | None = None):
    """Half-space Leray projection of outer mode arrays [Nx, Ny]; returns mirror coefficients (a, b)."""
    basis = basis or _basis_for(domain)
    lu, lv = potential_lift(n2[:, 0], domain.xi, basis.y)
    a = basis.even_coef(n1 - lu)
    b = basis.odd_coef(n2 - lv)
    a, b, _ = project_coefficients(a, b, domain.xi, basis.eta)
    return a, b


def leray_project(v: SpectralField, domain: Domain) -> SpectralField:
    """Half-plane Leray projection of a two-component outer field.

    The normal trace is first removed with a potential lift (a gradient, so it
    lies in the kernel of the projector); what remains has a continuous odd
    extension and is projected by mirror extension.
    """
    basis = _basis_for(domain)
    if v.modes.shape[:2] != (domain.Nx, basis.y.size) or v.ncomp != 2:
        raise SizeMismatch("leray_project expects modes [Nx, Ny, 2] on the outer grid")
    u_m = v.modes[:, :, 0].astype(complex)
    v_m = v.modes[:, :, 1].astype(complex)
    lu, lv = potential_lift(v_m[:, 0], domain.xi, basis.y)
    u_m = u_m - lu
    v_m = v_m - lv
    a = basis.even_coef(u_m)
    b = basis.odd_coef(v_m)
    a, b, _ = project_coefficients(a, b, domain.xi, basis.eta)
    out = np.stack([basis.even_eval(a), basis.odd_eval(b)], axis=2)
    return SpectralField(out, domain.xi, basis.y, v.decay_tag)


def divergence(field: SpectralField, domain: Domain) -> np.ndarray:
    """Spectral divergence of a field in the mirror basis (normal trace must vanish)."""
    basis = _basis_for(domain)
    a = basis.even_coef(field.modes[:, :, 0])
    b = basis.odd_coef(field.modes[:, :, 1])
    return basis.even_eval(1j * domain.xi[:, None] * a + basis.eta[None, :] * b)


# ------------------------------------------------------------------ dynamics

@dataclass
class EulerState:
    """Snapshot in coefficient form: a (cos, tangential) and b (sin, normal)."""

    a: np.ndarray
    b: np.ndarray
    t: float


class EulerModel:
    """Right-hand side -P[u . grad u] in coefficient space, dealiased with the 2/3 rule."""

    def __init__(self, domain: Domain):
        self.domain = domain
        self.basis = _basis_for(domain)
        self.xi = domain.xi
        self.mask = domain.dealias_mask()[:, None] & self.basis.band[None, :]

    def coefficients(self, samples: np.ndarray):
        """Outer samples [Nx physical, Ny, 2] to (a, b)."""
        m = to_modes(samples)
        return self.basis.even_coef(m[:, :, 0]), self.basis.odd_coef(m[:, :, 1])

    def samples(self, a, b) -> np.ndarray:
        return np.stack([from_modes(self.basis.even_eval(a)), from_modes(self.basis.odd_eval(b))], axis=2)

    def field(self, a, b) -> SpectralField:
        modes = np.stack([self.basis.even_eval(a), self.basis.odd_eval(b)], axis=2)
        return SpectralField(modes, self.xi, self.basis.y)

    def physical(self, coef, parity):
        vals = self.basis.even_eval(coef) if parity == "even" else self.basis.odd_eval(coef)
        return from_modes(vals)

    def advection(self, a, b, a2=None, b2=None):
        """(u . grad) applied to the field (a2, b2), default self-advection; coefficients out."""
        if a2 is None:
            a2, b2 = a, b
        m = self.mask
        a, b, a2, b2 = a * m, b * m, a2 * m, b2 * m
        xi = self.xi[:, None]
        u = self.physical(a, "even")
        v = self.physical(b, "odd")
        w_x = self.physical(1j * xi * a2, "even")
        w_y = self.physical(-self.basis.eta * a2, "odd")
        z_x = self.physical(1j * xi * b2, "odd")
        z_y = self.physical(self.basis.eta * b2, "even")
        n1 = u * w_x + v * w_y
        n2 = u * z_x + v * z_y
        c1 = self.basis.even_coef(to_modes(n1)) * m
        c2 = self.basis.odd_coef(to_modes(n2)) * m
        return c1, c2

    def rhs(self, a, b):
        n1, n2 = self.advection(a, b)
        p1, p2, _ = project_coefficients(n1, n2, self.xi, self.basis.eta)
        return -p1, -p2

    def pressure(self, a, b):
        """Pressure coefficients (cos series) from the gradient part of -u . grad u."""
        n1, n2 = self.advection(a, b)
        _, _, phi = project_coefficients(n1, n2, self.xi, self.basis.eta)
        return phi

    def max_speed(self, a, b):
        return np.abs(self.physical(a, "even")).max(), np.abs(self.physical(b, "odd")).max()

    def energy(self, a, b) -> float:
        """||u||^2 over [-Lx, Lx) x [0, y_max] from coefficients (exact quadrature)."""
        w = np.full(self.basis.y.size, 0.5)
        w[0] = 1.0
        Lx, ym = self.domain.config.Lx, self.domain.config.y_max
        e_u = np.sum(np.abs(a) ** 2 * w) * 2 * Lx * ym
        e_v = np.sum(np.abs(b[:, 1:-1]) ** 2) * 0.5 * 2 * Lx * ym
        return float(e_u + e_v)


def euler_rhs(state: EulerState, domain: Domain, dt: float | None = None) -> tuple:
    """-P[u . grad u] for a state; with ``dt`` the CFL number is checked."""
    model = EulerModel(domain)
    if dt is not None:
        check_cfl(model, state.a, state.b, dt)
    return model.rhs(state.a, state.b)


def check_cfl(model: EulerModel, a, b, dt):
    umax, vmax = model.max_speed(a, b)
    dy = model.basis.y[1] - model.basis.y[0]
    cfl = umax * dt / model.domain.dx + vmax * dt / dy
    if cfl > 1.0:
        raise CFLViolation(f"CFL number {cfl:.3f} > 1 (dt={dt})")
    return cfl


@dataclass
class EulerSeries:
    """Trajectory stored in coefficient form at the output times."""

    times: np.ndarray
    a: np.ndarray
    b: np.ndarray
    da: np.ndarray
    db: np.ndarray
    basis: MirrorBasis
    xi: np.ndarray
    energy: np.ndarray

    def _coef(self, comp, n, dt_order=0):
        if dt_order == 0:
            return self.a[n] if comp == 0 else self.b[n]
        return self.da[n] if comp == 0 else self.db[n]

    def eval(self, n: int, y, comp: int, dx: int = 0, dy: int = 0, dt: int = 0):
        """Mode values [Nx, len(y)] of d_x^dx d_y^dy (d_t^dt) of component comp at time index n."""
        parity = "even" if comp == 0 else "odd"
        c = self._coef(comp, n, dt) * (1j * self.xi[:, None]) ** dx
        return self.basis.eval_at(c, y, parity, deriv=dy)

    def state(self, n: int) -> EulerState:
        return EulerState(self.a[n], self.b[n], float(self.times[n]))

    def wall_trace(self, dx: int = 0) -> BoundaryTrace:
        vals = np.array([self.eval(n, [0.0], 0, dx=dx)[:, 0] for n in range(self.times.size)]).T
        return BoundaryTrace(vals, self.times.copy(), self.xi)

    def wall_dt_trace(self) -> BoundaryTrace:
        vals = np.array([self.eval(n, [0.0], 0, dt=1)[:, 0] for n in range(self.times.size)]).T
        return BoundaryTrace(vals, self.times.copy(), self.xi)

    def field(self, n: int) -> SpectralField:
        modes = np.stack([self.basis.even_eval(self.a[n]), self.basis.odd_eval(self.b[n])], axis=2)
        return SpectralField(modes, self.xi, self.basis.y)

    def wall_value_at(self, t: float, dx: int = 0, dt: int = 0) -> np.ndarray:
        """gamma d_x^dx u^E (or its t-derivative) at arbitrary t by cubic Hermite interpolation."""
        times = self.times
        n = int(np.clip(np.searchsorted(times, t) - 1, 0, times.size - 2))
        h = times[n + 1] - times[n]
        s = (t - times[n]) / h
        f0 = self.eval(n, [0.0], 0, dx=dx)[:, 0]
        f1 = self.eval(n + 1, [0.0], 0, dx=dx)[:, 0]
        d0 = self.eval(n, [0.0], 0, dx=dx, dt=1)[:, 0] * h
        d1 = self.eval(n + 1, [0.0], 0, dx=dx, dt=1)[:, 0] * h
        if dt == 0:
            w = (2 * s ** 3 - 3 * s ** 2 + 1, s ** 3 - 2 * s ** 2 + s, -2 * s ** 3 + 3 * s ** 2, s ** 3 - s ** 2)
            return w[0] * f0 + w[1] * d0 + w[2] * f1 + w[3] * d1
        w = (6 * s ** 2 - 6 * s, 3 * s ** 2 - 4 * s + 1, -6 * s ** 2 + 6 * s, 3 * s ** 2 - 2 * s)
        return (w[0] * f0 + w[1] * d0 + w[2] * f1 + w[3] * d1) / h


def coef_at(series: "EulerSeries", t: float):
    """Coefficients (a, b) at arbitrary t by cubic Hermite interpolation."""
    times = series.times
    if times.size == 1:
        return series.a[0], series.b[0]
    n = int(np.clip(np.searchsorted(times, t) - 1, 0, times.size - 2))
    h = times[n + 1] - times[n]
    s = (t - times[n]) / h
    w = (2 * s ** 3 - 3 * s ** 2 + 1, (s ** 3 - 2 * s ** 2 + s) * h, -2 * s ** 3 + 3 * s ** 2, (s ** 3 - s ** 2) * h)
    a = w[0] * series.a[n] + w[1] * series.da[n] + w[2] * series.a[n + 1] + w[3] * series.da[n + 1]
    b = w[0] * series.b[n] + w[1] * series.db[n] + w[2] * series.b[n + 1] + w[3] * series.db[n + 1]
    return a, b


def check_admissible(model: EulerModel, a, b, samples: np.ndarray, tol: float = 1e-8):
    """Reject data that is not divergence-free or has a normal wall velocity."""
    scale = max(np.abs(samples).max(), 1e-300)
    vn = np.abs(samples[:, 0, 1]).max()
    if vn > tol * scale:
        raise InvalidConfig(f"initial normal wall velocity {vn:.2e} is not zero")
    div = model.physical(1j * model.xi[:, None] * a + model.basis.eta * b, "even")
    if np.abs(div).max() > 1e-6 * scale * max(1.0, np.abs(model.xi).max()):
        raise InvalidConfig(f"initial data is not divergence-free (max |div| = {np.abs(div).max():.2e})")


def solve_euler(u0_samples: np.ndarray, domain: Domain, T: float | None = None,
                Nt: int | None = None, substeps: int = 1) -> EulerSeries:
    """RK4 trajectory from physical samples u0 [Nx, Ny, 2]; output at Nt+1 equispaced times."""
    cfg = domain.config
    T = cfg.T if T is None else T
    Nt = cfg.Nt if Nt is None else Nt
    model = EulerModel(domain)
    u0_samples = np.asarray(u0_samples, dtype=float)
    if u0_samples.shape != (domain.Nx, cfg.Ny, 2):
        raise SizeMismatch(f"u0 must have shape ({domain.Nx}, {cfg.Ny}, 2)")
    a, b = model.coefficients(u0_samples)
    check_admissible(model, a, b, u0_samples)
    times = np.linspace(0.0, T, Nt + 1)
    dt = (T / Nt) / substeps if Nt > 0 else 0.0
    A, B, dA, dB, E = [], [], [], [], []
    for n in range(Nt + 1):
        k1 = model.rhs(a, b)
        A.append(a.copy()); B.append(b.copy()); dA.append(k1[0]); dB.append(k1[1])
        E.append(model.energy(a, b))
        if n == Nt:
            break
        for sub in range(substeps):
            check_cfl(model, a, b, dt)
            if sub > 0:
                k1 = model.rhs(a, b)
            k2 = model.rhs(a + 0.5 * dt * k1[0], b + 0.5 * dt * k1[1])
            k3 = model.rhs(a + 0.5 * dt * k2[0], b + 0.5 * dt * k2[1])
            k4 = model.rhs(a + dt * k3[0], b + dt * k3[1])
            a = a + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            b = b + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return EulerSeries(times, np.array(A), np.array(B), np.array(dA), np.array(dB),
                       model.basis, domain.xi, np.array(E))


def first_order_residual_term(series: EulerSeries) -> BoundaryTrace:
    """-(d_t + gamma u^E d_x) gamma u^E at the output times (modes per time)."""
    out = []
    for n in range(series.times.size):
        U = from_modes(series.eval(n, [0.0], 0)[:, 0])
        Ux = from_modes(series.eval(n, [0.0], 0, dx=1)[:, 0])
        Ut = series.eval(n, [0.0], 0, dt=1)[:, 0]
        out.append(-(Ut + to_modes(U * Ux)))
    return BoundaryTrace(np.array(out).T, series.times.copy(), series.xi)
