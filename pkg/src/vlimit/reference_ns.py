"""Direct no-slip Navier-Stokes solver and the viscosity sweep harness.

x is Fourier, y uses a staggered (MAC) grid stretched towards the wall:
u and p live at cell centres, v on cell faces.  Each x-mode solves a coupled
(u, v, p) saddle-point system per step, so the discrete velocity is exactly
divergence free.  No-slip holds at y = 0 (v on the wall face, u through a
mirrored ghost value); the top y = L is a free-slip lid.  Time stepping is
BDF2 for viscosity and pressure with second-order extrapolation (AB2) of
advection; the first step is backward Euler.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .domain import from_modes, to_modes
from .errors import CFLViolation, NeedMorePoints, UnderResolvedLayer
from .halfspace import stretched_grid


@dataclass(frozen=True)
class NSConfig:
    Lx: float = float(np.pi)
    Nx: int = 64
    Ly: float = 10.0
    Ny: int = 256
    wall_spacing: float | None = None   # default eps / 4
    dt: float = 2.5e-3
    nonlinear: bool = True
    cfl_max: float = 0.9


@dataclass
class NSGrid:
    x: np.ndarray
    xi: np.ndarray
    yf: np.ndarray     # faces, yf[0] = 0, yf[-1] = Ly
    yc: np.ndarray     # centres
    Lx: float

    @property
    def hc(self) -> np.ndarray:
        return np.diff(self.yf)

    @property
    def dc(self) -> np.ndarray:
        """Centre-to-centre distances across interior faces 1..M-1."""
        return np.diff(self.yc)


def make_ns_grid(cfg: NSConfig, nu: float) -> NSGrid:
    eps = np.sqrt(nu)
    h0 = cfg.wall_spacing if cfg.wall_spacing is not None else eps / 4
    yf = stretched_grid(cfg.Ly, cfg.Ny + 1, h0)
    if yf[1] > eps / 4 * (1 + 1e-9):
        raise UnderResolvedLayer(f"wall spacing {yf[1]:.3e} exceeds eps/4 = {eps / 4:.3e}")
    yc = 0.5 * (yf[1:] + yf[:-1])
    n = cfg.Nx
    x = -cfg.Lx + 2 * cfg.Lx * np.arange(n) / n
    xi = np.pi * np.arange(-n // 2, n // 2) / cfg.Lx
    return NSGrid(x, xi, yf, yc, cfg.Lx)


@dataclass
class NSState:
    u: np.ndarray   # modes [Nx, M] at centres
    v: np.ndarray   # modes [Nx, M+1] at faces
    t: float
    nu: float


@dataclass
class NSSeries:
    grid: NSGrid
    nu: float
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    energy: list = field(default_factory=list)

    def at(self, t: float) -> NSState:
        i = int(np.argmin(np.abs(np.asarray(self.times) - t)))
        return self.states[i]


# -------------------------------------------------------------- operators

def _lap_centres(grid: NSGrid):
    """Sparse d_yy at centres with ghost u_{-1} = -u_0 (no-slip) and u_M = u_{M-1} (free slip)."""
    hc, dc = grid.hc, grid.dc
    M = hc.size
    main = np.zeros(M)
    lo = np.zeros(M - 1)
    up = np.zeros(M - 1)
    for j in range(M):
        if j > 0:
            w = 1 / (dc[j - 1] * hc[j])
            lo[j - 1] += w
            main[j] -= w
        else:
            w = 1 / (2 * grid.yc[0] * hc[0])
            main[j] -= 2 * w          # ghost mirrored through the wall
        if j < M - 1:
            w = 1 / (dc[j] * hc[j])
            up[j] += w
            main[j] -= w
    return sp.diags([lo, main, up], [-1, 0, 1], format="csr")


def _lap_faces(grid: NSGrid):
    """d_yy at interior faces 1..M-1 (v = 0 on both end faces)."""
    hc, dc = grid.hc, grid.dc
    M = hc.size
    n = M - 1
    main = np.zeros(n)
    lo = np.zeros(n - 1)
    up = np.zeros(n - 1)
    for i in range(n):
        j = i + 1
        wl = 1 / (hc[j - 1] * dc[j - 1])
        wr = 1 / (hc[j] * dc[j - 1])
        main[i] = -(wl + wr)
        if i > 0:
            lo[i - 1] = wl
        if i < n - 1:
            up[i] = wr
    return sp.diags([lo, main, up], [-1, 0, 1], format="csr")


def _grad_faces(grid: NSGrid):
    """(p_j - p_{j-1}) / dc at interior faces: [M-1, M]."""
    dc = grid.dc
    M = grid.hc.size
    rows = np.repeat(np.arange(M - 1), 2)
    cols = np.stack([np.arange(M - 1), np.arange(1, M)], axis=1).ravel()
    vals = np.stack([-1 / dc, 1 / dc], axis=1).ravel()
    return sp.csr_matrix((vals, (rows, cols)), shape=(M - 1, M))


def _div_centres(grid: NSGrid):
    """(v_{j+1} - v_j)/hc acting on interior faces: [M, M-1]."""
    hc = grid.hc
    M = hc.size
    rows, cols, vals = [], [], []
    for j in range(M):
        if j + 1 <= M - 1:
            rows.append(j); cols.append(j); vals.append(1 / hc[j])
        if j >= 1:
            rows.append(j); cols.append(j - 1); vals.append(-1 / hc[j])
    return sp.csr_matrix((vals, (rows, cols)), shape=(M, M - 1))


class StokesStepper:
    """Factorised per-mode saddle-point systems for (alpha/dt - nu Lap) w + grad p = rhs, div w = 0."""

    def __init__(self, grid: NSGrid, nu: float, dt: float, alpha: float):
        self.grid = grid
        M = grid.hc.size
        Lc, Lf = _lap_centres(grid), _lap_faces(grid)
        G, D = _grad_faces(grid), _div_centres(grid)
        Ic, If = sp.identity(M), sp.identity(M - 1)
        self.M = M
        self.lu = {}
        for k, xi in enumerate(grid.xi):
            if k == 0:
                continue   # Nyquist row is kept at zero
            if xi == 0:
                self.lu[k] = splu(sp.csc_matrix(alpha / dt * Ic - nu * Lc))
                continue
            Au = alpha / dt * Ic - nu * (Lc - xi ** 2 * Ic)
            Av = alpha / dt * If - nu * (Lf - xi ** 2 * If)
            A = sp.bmat([[Au, None, 1j * xi * Ic],
                         [None, Av, G],
                         [1j * xi * Ic, D, None]], format="csc")
            self.lu[k] = splu(A)

    def solve(self, ru, rv):
        M = self.M
        u = np.zeros_like(ru)
        v = np.zeros((ru.shape[0], M + 1), dtype=complex)
        for k, lu in self.lu.items():
            if self.grid.xi[k] == 0:
                u[k] = lu.solve(ru[k].real.copy()) + 1j * lu.solve(ru[k].imag.copy())
                continue
            sol = lu.solve(np.concatenate([ru[k], rv[k, 1:-1], np.zeros(M, dtype=complex)]))
            u[k] = sol[:M]
            v[k, 1:-1] = sol[M:2 * M - 1]
        return u, v


def _dy_centres(f, grid: NSGrid):
    """d_y at centres (ghost rules as in the Laplacian), nonuniform three-point."""
    yc = grid.yc
    ext_y = np.concatenate([[-yc[0]], yc, [2 * grid.yf[-1] - yc[-1]]])
    ext = np.concatenate([-f[:, :1], f, f[:, -1:]], axis=1)
    hm = ext_y[1:-1] - ext_y[:-2]
    hp = ext_y[2:] - ext_y[1:-1]
    return (-hp / (hm * (hm + hp)) * ext[:, :-2] + (hp - hm) / (hm * hp) * ext[:, 1:-1]
            + hm / (hp * (hm + hp)) * ext[:, 2:])


def _dy_faces(v, grid: NSGrid):
    yf = grid.yf
    return np.gradient(v, yf, axis=1, edge_order=2)


def _centres_to_faces(f, grid: NSGrid):
    """Linear interpolation of centre values to faces; wall value 0, lid value extrapolated flat."""
    yc, yf = grid.yc, grid.yf
    out = np.empty((f.shape[0], yf.size), dtype=f.dtype)
    w = (yf[1:-1] - yc[:-1]) / (yc[1:] - yc[:-1])
    out[:, 1:-1] = (1 - w) * f[:, :-1] + w * f[:, 1:]
    out[:, 0] = 0.0
    out[:, -1] = f[:, -1]
    return out


def _faces_to_centres(v, grid: NSGrid):
    yc, yf = grid.yc, grid.yf
    w = (yc - yf[:-1]) / (yf[1:] - yf[:-1])
    return (1 - w) * v[:, :-1] + w * v[:, 1:]


def advection(u, v, grid: NSGrid, mask):
    """(u . grad u, u . grad v) at centres and faces, dealiased; inputs and outputs are modes."""
    xi = grid.xi[:, None]
    u, v = u * mask, v * mask
    up = from_modes(u)
    vp = from_modes(v)
    v_c = from_modes(_faces_to_centres(v, grid))
    u_f = from_modes(_centres_to_faces(u, grid))
    nu_ = up * from_modes(1j * xi * u) + v_c * from_modes(_dy_centres(u, grid))
    nv_ = u_f * from_modes(1j * xi * v) + vp * from_modes(_dy_faces(v, grid))
    return to_modes(nu_) * mask, to_modes(nv_) * mask


def energy(u, v, grid: NSGrid) -> float:
    eu = np.sum(np.abs(u) ** 2 * grid.hc)
    ev = np.sum(np.abs(v[:, 1:-1]) ** 2 * grid.dc)
    return float(2 * grid.Lx * (eu + ev))


def initial_state(u0_fn, grid: NSGrid):
    """Sample a velocity function u0_fn(x, y) -> [Nx, len(y), 2] on the staggered points."""
    uc = u0_fn(grid.x, grid.yc)[:, :, 0]
    vf = u0_fn(grid.x, grid.yf)[:, :, 1]
    vf[:, 0] = 0.0
    vf[:, -1] = 0.0
    return to_modes(uc), to_modes(vf)


def discrete_divergence(u, v, grid: NSGrid) -> np.ndarray:
    return 1j * grid.xi[:, None] * u + np.diff(v, axis=1) / grid.hc


def project_discrete(u, v, grid: NSGrid):
    """Discrete Leray projection (solve for p with the same saddle-point blocks, alpha/dt = 1, nu = 0)."""
    st = StokesStepper(grid, 0.0, 1.0, 1.0)
    return st.solve(u, v)


def solve_ns(u0_fn, nu: float, T: float, cfg: NSConfig = NSConfig(), out_times=None) -> NSSeries:
    """March NS from u0 (projected onto the discrete divergence-free space) to T."""
    grid = make_ns_grid(cfg, nu)
    u, v = initial_state(u0_fn, grid)
    u, v = project_discrete(u, v, grid)
    dt = cfg.dt
    nsteps = int(round(T / dt))
    if nsteps * dt < T - 1e-12 * max(T, 1):
        nsteps += 1
    dt = T / nsteps if nsteps else dt
    mask = (np.abs(np.arange(-cfg.Nx // 2, cfg.Nx // 2)) < cfg.Nx / 3.0)[:, None]
    out_times = [T] if out_times is None else list(out_times)
    series = NSSeries(grid, nu)
    series.times.append(0.0)
    series.states.append(NSState(u.copy(), v.copy(), 0.0, nu))
    series.energy.append(energy(u, v, grid))
    if nsteps == 0:
        return series
    be = StokesStepper(grid, nu, dt, 1.0)
    bdf = StokesStepper(grid, nu, dt, 1.5)
    zero = lambda: (np.zeros_like(u), np.zeros_like(v))
    N_prev = None
    u_prev = v_prev = None
    t = 0.0
    for n in range(nsteps):
        _check_cfl(u, v, grid, dt, cfg)
        N = advection(u, v, grid, mask) if cfg.nonlinear else zero()
        if n == 0:
            ru = u / dt - N[0]
            rv = v / dt - N[1]
            un, vn = be.solve(ru, rv)
        else:
            ru = (2 * u - 0.5 * u_prev) / dt - (2 * N[0] - N_prev[0])
            rv = (2 * v - 0.5 * v_prev) / dt - (2 * N[1] - N_prev[1])
            un, vn = bdf.solve(ru, rv)
        u_prev, v_prev, N_prev = u, v, N
        u, v = un, vn
        t = (n + 1) * dt
        if not np.all(np.isfinite(u)):
            raise CFLViolation(f"NS solve diverged at t={t:.4g}")
        if any(abs(t - s) < 0.5 * dt for s in out_times):
            series.times.append(t)
            series.states.append(NSState(u.copy(), v.copy(), t, nu))
            series.energy.append(energy(u, v, grid))
    return series


def _check_cfl(u, v, grid: NSGrid, dt: float, cfg: NSConfig):
    up = np.abs(from_modes(u)).max()
    vp = np.abs(from_modes(v))
    dx = 2 * grid.Lx / cfg.Nx
    cfl = up * dt / dx + (vp[:, 1:-1] / grid.dc).max() * dt
    if cfl > cfg.cfl_max:
        raise CFLViolation(f"CFL {cfl:.3f} > {cfg.cfl_max}")


# --------------------------------------------------------------- harness

@dataclass
class SweepRecord:
    nu: float
    eps: float
    t_eval: float
    err_L2_zeroth: float
    err_L2_first: float
    err_L2_full: float | None = None
    err_L2_zeroth_layer: float | None = None
    slope_partial: float | None = None
    extra: dict = field(default_factory=dict)


def l2_error(grid: NSGrid, du, dv) -> float:
    """Discrete L2 norm over the periodic box of mode arrays at centres (u) and faces (v)."""
    return float(np.sqrt(energy(du, dv, grid)))


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    ci95: float
    used: tuple
    flagged: tuple


def fit_rate(nus, errs) -> RateFit:
    """Least-squares slope of log err vs log nu with a 95% confidence half-width."""
    from scipy import stats
    nus = np.asarray(nus, dtype=float)
    errs = np.asarray(errs, dtype=float)
    ok = errs > 0
    flagged = tuple(np.flatnonzero(~ok))
    if ok.sum() < 2:
        raise NeedMorePoints("need at least two positive errors for a rate fit")
    x, y = np.log(nus[ok]), np.log(errs[ok])
    res = stats.linregress(x, y)
    dof = x.size - 2
    ci = float(stats.t.ppf(0.975, dof) * res.stderr) if dof > 0 else float("nan")
    return RateFit(float(res.slope), float(res.intercept), ci, tuple(np.flatnonzero(ok)), flagged)


def report(records, out_dir) -> RateFit:
    """Write sweep.csv and sweep.plotdat; print the fitted slope with its 95% interval."""
    if len(records) < 3:
        raise NeedMorePoints(f"report needs at least 3 sweep points, got {len(records)}")
    records = sorted(records, key=lambda r: r.nu)
    fit = fit_rate([r.nu for r in records], [r.err_L2_zeroth for r in records])
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["nu", "eps", "t_eval", "err0", "err1", "slope_partial"])
        for i, r in enumerate(records):
            part = ""
            if i >= 1 and r.err_L2_zeroth > 0 and records[i - 1].err_L2_zeroth > 0:
                part = np.log(r.err_L2_zeroth / records[i - 1].err_L2_zeroth) / np.log(r.nu / records[i - 1].nu)
                r.slope_partial = float(part)
            w.writerow([r.nu, r.eps, r.t_eval, r.err_L2_zeroth, r.err_L2_first, part])
    with open(out / "sweep.plotdat", "w") as fh:
        fh.write("# nu err0\n")
        for r in records:
            fh.write(f"{r.nu:.6e} {r.err_L2_zeroth:.6e}\n")
        fh.write("\n\n# nu err1\n")
        for r in records:
            fh.write(f"{r.nu:.6e} {r.err_L2_first:.6e}\n")
    for i in fit.flagged:
        print(f"flagged: nu={records[i].nu} has zero error, excluded from the fit")
    print(f"slope = {fit.slope:.3f} +/- {fit.ci95:.3f} (95% CI)")
    return fit
