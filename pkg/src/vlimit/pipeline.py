"""End-to-end construction of the expansion terms and their comparison with NS."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .data import ShearVortexData
from .domain import DomainConfig, make_domain, to_modes
from .euler import EulerSeries, solve_euler
from .euler1 import C1, OuterCorrection, SingularCorrection, assemble_uE1, solve_wR, solve_wSstar
from .halfspace import OperatorContext
from .prandtl0 import PrandtlConfig, PrandtlSeries, influx_g, solve_prandtl_regular
from .prandtl1 import PrandtlCorrection, build_prandtl1
from .reference_ns import NSConfig, SweepRecord, l2_error, solve_ns


@dataclass(frozen=True)
class ExperimentConfig:
    domain: DomainConfig = DomainConfig(Nx=64, Ny=257, y_max=16.0, Y_max=20.0, NY=401, T=0.25, Nt=50)
    data: ShearVortexData = ShearVortexData()
    ns: NSConfig = NSConfig()
    t_eval: float = 0.25
    prandtl: PrandtlConfig = PrandtlConfig(substeps=2, ramp_steps=16)
    euler1_substeps: int = 2
    with_error: bool = True


@dataclass
class Expansion:
    """The nu-independent terms (outer fields and layer fields in Y)."""

    config: ExperimentConfig
    euler: EulerSeries
    prandtl: PrandtlSeries
    g: dict
    u1: OuterCorrection
    sing: SingularCorrection
    q: PrandtlCorrection
    u00: np.ndarray
    timings: dict = field(default_factory=dict)

    def index(self, t: float) -> int:
        i = int(np.argmin(np.abs(self.euler.times - t)))
        if abs(self.euler.times[i] - t) > 1e-9:
            raise ValueError(f"t={t} is not an output time")
        return i


def build_expansion(cfg: ExperimentConfig = ExperimentConfig(), u0_samples=None, u00=None) -> Expansion:
    timings = {}
    dom = make_domain(cfg.domain)
    tic = time.perf_counter()
    u0 = cfg.data.samples(dom) if u0_samples is None else u0_samples
    euler = solve_euler(u0, dom)
    timings["euler"] = time.perf_counter() - tic
    if u00 is None:
        u00 = to_modes(np.asarray(u0)[:, 0, 0])
    tic = time.perf_counter()
    pr = solve_prandtl_regular(u00, euler, dom, config=cfg.prandtl)
    g = influx_g(pr)
    timings["prandtl"] = time.perf_counter() - tic
    tic = time.perf_counter()
    wR = solve_wR(dom, euler, g["gR"].modes.T, substeps=cfg.euler1_substeps)
    sing = solve_wSstar(dom, euler, u00)
    u1 = assemble_uE1(wR, sing, g["g"].modes.T)
    timings["euler1"] = time.perf_counter() - tic
    tic = time.perf_counter()
    ctx = OperatorContext(1.0, dom.xi, dom.Y, euler.times)
    q = build_prandtl1(u1, sing, ctx, u00, C1)
    timings["prandtl1"] = time.perf_counter() - tic
    return Expansion(cfg, euler, pr, g, u1, sing, q, np.asarray(u00), timings)


def _layer_at(values, Y, y, eps):
    """Layer mode array [Nx, NY] sampled at Y = y/eps (zero past the layer grid)."""
    Yq = np.asarray(y) / eps
    out = np.zeros((values.shape[0], Yq.size), dtype=complex)
    inside = Yq <= Y[-1]
    out[:, inside] = CubicSpline(Y, values, axis=1)(Yq[inside])
    return out


def composite(exp: Expansion, n: int, eps: float, y, comp: int, order: str = "zeroth", error=None):
    """Composite velocity modes [Nx, len(y)] of component ``comp`` at output index n.

    order: "zeroth" = u^E + ubar^P, "first" adds eps (u1 + ubar^P_1), "full" also eps e.
    """
    y = np.asarray(y, dtype=float)
    pr, Y = exp.prandtl, exp.prandtl.Y
    if comp == 0:
        out = exp.euler.eval(n, y, 0) + _layer_at(pr.u_tilde(n), Y, y, eps)
    else:
        out = exp.euler.eval(n, y, 1) + eps * _layer_at(pr.vbar(n), Y, y, eps)
    if order in ("first", "full"):
        if comp == 0:
            out = out + eps * (exp.u1.eval(n, y, 0) + _layer_at(exp.q.q[n], Y, y, eps))
        else:
            vb1 = exp.q.vbar1()[n]
            out = out + eps * (exp.u1.eval(n, y, 1) + eps * _layer_at(vb1, Y, y, eps))
    if order == "full" and error is not None:
        out = out + eps * error.eval(n, y, comp)
    return out


def compare_with_ns(exp: Expansion, nu: float, error=None, ns_series=None) -> SweepRecord:
    cfg = exp.config
    eps = float(np.sqrt(nu))
    t = cfg.t_eval
    n = exp.index(t)
    if ns_series is None:
        ns_series = solve_ns(cfg.data.velocity, nu, t, cfg.ns, out_times=[t])
    st = ns_series.at(t)
    grid = ns_series.grid
    errs = {}
    for order in ("zeroth", "first", "full"):
        cu = composite(exp, n, eps, grid.yc, 0, order, error)
        cv = composite(exp, n, eps, grid.yf, 1, order, error)
        errs[order] = l2_error(grid, st.u - cu, st.v - cv)
    # the same norm in layer variables: ||f||_{L2(x,y)} = sqrt(eps) ||f||_{L2(x,Y)}
    return SweepRecord(nu, eps, t, errs["zeroth"], errs["full"] if error is not None else errs["first"],
                       err_L2_full=errs["full"] if error is not None else None,
                       err_L2_zeroth_layer=errs["zeroth"] / np.sqrt(eps),
                       extra={"err_first_no_e": errs["first"]})


def sweep(nus, cfg: ExperimentConfig = ExperimentConfig(), exp: Expansion | None = None,
          log=print) -> tuple[list, Expansion]:
    """One record per viscosity; the nu-independent terms are built once and reused."""
    from .error_term import build_error
    exp = build_expansion(cfg) if exp is None else exp
    records = []
    for nu in sorted(nus, reverse=True):
        tic = time.perf_counter()
        eps = float(np.sqrt(nu))
        err = build_error(exp, eps) if cfg.with_error else None
        rec = compare_with_ns(exp, nu, error=err)
        if err is not None:
            rec.extra["picard_iterations"] = len(err.picard_log)
        rec.extra["seconds"] = time.perf_counter() - tic
        log(f"nu={nu:.2e}  err0={rec.err_L2_zeroth:.4e}  err1={rec.err_L2_first:.4e}  "
            f"({rec.extra['seconds']:.1f}s)")
        records.append(rec)
    return records, exp
