"""Command line entry point: ``vlimit <command> ...``.

Each pipeline stage writes its field snapshots plus a ``state.pkl`` that the
next stage reads back.  The exit code is 0 only when every guard passes.
"""
from __future__ import annotations

import argparse
import csv
import glob
import pickle
import re
import sys
from pathlib import Path

import numpy as np

from .data import ShearVortexData
from .domain import (DomainConfig, from_modes, load_config, make_domain, read_field, save_config, to_modes,
                     write_field)
from .errors import VlimitError

STATE = "state.pkl"


# ------------------------------------------------------------------ helpers

def _config(path) -> DomainConfig:
    return load_config(path) if path else DomainConfig()


def _out(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _save(out: Path, obj) -> None:
    with open(out / STATE, "wb") as fh:
        pickle.dump(obj, fh)


def _load(d) -> dict:
    with open(Path(d) / STATE, "rb") as fh:
        return pickle.load(fh)


def _stamp(t: float) -> str:
    return f"t{t:.6f}"


def _xi(nx: int, Lx: float) -> np.ndarray:
    return np.pi * np.arange(-nx // 2, nx // 2) / Lx


def _u0_samples(args, dom) -> np.ndarray:
    if getattr(args, "u0", None):
        return from_modes(read_field(args.u0))
    return ShearVortexData().samples(dom)


# ----------------------------------------------------------------- commands

def cmd_norms(args) -> int:
    from .norms import NormParams, strip_norm
    modes = read_field(args.field)
    val = strip_norm(modes, _xi(modes.shape[0], args.Lx), args.Lx, NormParams(args.l, args.rho))
    print(f"{val:.12e}")
    return 0


def cmd_radius(args) -> int:
    from .norms import estimate_radius
    files = sorted(glob.glob(args.series))
    if not files:
        print(f"no files match {args.series}", file=sys.stderr)
        return 1
    rows = []
    for i, f in enumerate(files):
        m = re.search(r"t([0-9.eE+-]+)\.field$", f)
        t = float(m.group(1)) if m else float(i)
        modes = read_field(f)
        rows.append((t, estimate_radius(modes, _xi(modes.shape[0], args.Lx))))
    print("t,rho_hat")
    for t, r in sorted(rows):
        print(f"{t:.6f},{r:.6f}")
    return 0


def cmd_euler(args) -> int:
    from .euler import solve_euler
    cfg = _config(args.config)
    dom = make_domain(cfg)
    out = _out(args.out)
    u0 = _u0_samples(args, dom)
    series = solve_euler(u0, dom)
    for n, t in enumerate(series.times):
        f = series.field(n)
        write_field(out / f"uE_{_stamp(t)}.field", f.modes)
    with open(out / "trace.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "mode", "re", "im"])
        tr = series.wall_trace()
        for n, t in enumerate(series.times):
            for k, xi in enumerate(series.xi):
                w.writerow([t, xi, tr.modes[k, n].real, tr.modes[k, n].imag])
    save_config(cfg, out / "config.txt")
    _save(out, {"config": cfg, "euler": series, "u00": to_modes(np.asarray(u0)[:, 0, 0])})
    drift = abs(series.energy[-1] - series.energy[0]) / max(series.energy[0], 1e-300)
    print(f"euler: {series.times.size} snapshots, relative energy drift {drift:.2e}")
    return 0


def cmd_prandtl(args) -> int:
    from .prandtl0 import PrandtlConfig, influx_g, solve_prandtl_regular
    cfg = _config(args.config)
    dom = make_domain(cfg)
    st = _load(args.euler)
    out = _out(args.out)
    pr = solve_prandtl_regular(st["u00"], st["euler"], dom, config=PrandtlConfig(substeps=2))
    g = influx_g(pr)
    for n, t in enumerate(pr.times):
        write_field(out / f"uS_{_stamp(t)}.field", pr.uS(n))
        write_field(out / f"uR_{_stamp(t)}.field", pr.uR(n))
        write_field(out / f"vbar_{_stamp(t)}.field", pr.vbar(n))
    with open(out / "influx.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "mode", "gR_re", "gR_im", "gS_re", "gS_im"])
        for n, t in enumerate(pr.times):
            for k, xi in enumerate(pr.xi):
                gr, gs = g["gR"].modes[k, n], g["gS"].modes[k, n]
                w.writerow([t, xi, gr.real, gr.imag, gs.real, gs.imag])
    _save(out, {**st, "prandtl": pr, "g": g})
    print(f"prandtl: {pr.times.size} snapshots on Y in [0, {pr.Y[-1]:g}]")
    return 0


def cmd_euler1(args) -> int:
    from .euler1 import assemble_uE1, solve_wR, solve_wSstar
    cfg = _config(args.config)
    dom = make_domain(cfg)
    st = {**_load(args.euler), **_load(args.prandtl)}
    out = _out(args.out)
    g = st["g"]
    wR = solve_wR(dom, st["euler"], g["gR"].modes.T, substeps=2)
    sing = solve_wSstar(dom, st["euler"], st["u00"])
    u1 = assemble_uE1(wR, sing, g["g"].modes.T)
    for n, t in enumerate(u1.times):
        write_field(out / f"uE1_{_stamp(t)}.field", u1.field(n).modes)
    with open(out / "picard.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "residual"])
        for i, r in enumerate(sing.residuals):
            w.writerow([i + 1, r])
    _save(out, {**st, "u1": u1, "sing": sing})
    print(f"euler1: Picard converged in {len(sing.residuals)} iterations")
    return 0


def cmd_prandtl1(args) -> int:
    from .euler1 import C1
    from .halfspace import OperatorContext
    from .prandtl1 import build_prandtl1
    cfg = _config(args.config)
    dom = make_domain(cfg)
    st = {**_load(args.prandtl), **_load(args.euler1)}
    out = _out(args.out)
    ctx = OperatorContext(1.0, dom.xi, st["prandtl"].Y, st["u1"].times)
    q = build_prandtl1(st["u1"], st["sing"], ctx, st["u00"], C1)
    vb1 = q.vbar1()
    for n, t in enumerate(q.times):
        write_field(out / f"uP1_{_stamp(t)}.field", np.stack([q.q[n], vb1[n]], axis=2))
    _save(out, {**st, "q": q})
    print(f"prandtl1: wall mismatch {np.abs(q.q[:, :, 0] + np.array([st['u1'].wall_tangential(n) for n in range(q.times.size)])).max():.2e}")
    return 0


def _expansion_from(st: dict, cfg: DomainConfig):
    from .pipeline import ExperimentConfig, Expansion
    return Expansion(ExperimentConfig(domain=cfg), st["euler"], st["prandtl"], st["g"], st["u1"], st["sing"],
                     st["q"], st["u00"])


def cmd_error(args) -> int:
    from .error_term import build_error
    cfg = _config(args.config)
    st = {}
    for d in args.inputs:
        st.update(_load(d))
    missing = {"euler", "prandtl", "u1", "q"} - set(st)
    if missing:
        print(f"error: inputs lack {sorted(missing)}", file=sys.stderr)
        return 1
    out = _out(args.out)
    exp = _expansion_from(st, cfg)
    err = build_error(exp, cfg.eps)
    for n, t in enumerate(exp.euler.times):
        write_field(out / f"e_{_stamp(t)}.field", np.stack([err.e1[n], err.e2[n]], axis=2))
    with open(out / "k_norm.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "k_norm", "e_norm"])
        for t, k, e in zip(exp.euler.times, err.k_norm(cfg.Lx), err.e_norm(cfg.Lx)):
            w.writerow([t, k, e])
    with open(out / "picard.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "residual"])
        for i, r in enumerate(err.picard_log):
            w.writerow([i + 1, r])
    print(f"error: eps={cfg.eps:.4f}, {len(err.picard_log)} Picard iterations, "
          f"max ||k|| = {err.k_norm(cfg.Lx).max():.3e}, max ||e|| = {err.e_norm(cfg.Lx).max():.3e}")
    return 0


def cmd_verify_ops(args) -> int:
    from .verify import run_all
    checks = run_all()
    for c in checks:
        print(c.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 0 if failed == 0 else 1


def cmd_sweep(args) -> int:
    from .pipeline import ExperimentConfig, sweep
    from .reference_ns import report
    cfg = _config(args.config) if args.config else ExperimentConfig().domain
    nus = [float(v) for v in args.nus.split(",")]
    ecfg = ExperimentConfig(domain=cfg, t_eval=args.t_eval, with_error=not args.no_error)
    records, _ = sweep(nus, ecfg)
    fit = report(records, _out(args.out))
    ok = all(r.err_L2_first <= r.err_L2_zeroth for r in records) and abs(fit.slope - 0.5) <= 0.1
    return 0 if ok else 1


def cmd_reference(args) -> int:
    from .reference_ns import NSConfig, energy, solve_ns
    cfg = _config(args.config)
    out = _out(args.out)
    data = ShearVortexData()
    times = np.linspace(0, cfg.T, min(cfg.Nt, 10) + 1)[1:]
    series = solve_ns(data.velocity, args.nu, cfg.T, NSConfig(Nx=cfg.Nx), out_times=list(times))
    with open(out / "energy.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "energy"])
        for t in times:
            s = series.at(t)
            w.writerow([t, energy(s.u, s.v, series.grid)])
            write_field(out / f"u_{_stamp(t)}.field", to_modes(s.u))
            write_field(out / f"v_{_stamp(t)}.field", to_modes(s.v))
    print(f"reference: nu={args.nu:g}, {len(times)} snapshots")
    return 0


# ------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vlimit", description="Boundary-layer expansion of the vanishing-viscosity limit.")
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("norms", help="strip norm of a field file")
    s.add_argument("--field", required=True)
    s.add_argument("--l", type=int, default=0)
    s.add_argument("--rho", type=float, default=0.0)
    s.add_argument("--Lx", type=float, default=np.pi)
    s.set_defaults(fn=cmd_norms)

    s = sub.add_parser("radius", help="analyticity radius of a series of field files")
    s.add_argument("--series", required=True, help="glob of field files")
    s.add_argument("--Lx", type=float, default=np.pi)
    s.set_defaults(fn=cmd_radius)

    s = sub.add_parser("euler", help="outer Euler flow")
    s.add_argument("--config")
    s.add_argument("--u0")
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_euler)

    s = sub.add_parser("prandtl", help="leading boundary layer")
    s.add_argument("--config")
    s.add_argument("--euler", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_prandtl)

    s = sub.add_parser("euler1", help="first-order outer correction")
    s.add_argument("--config")
    s.add_argument("--euler", required=True)
    s.add_argument("--prandtl", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_euler1)

    s = sub.add_parser("prandtl1", help="first-order boundary layer")
    s.add_argument("--config")
    s.add_argument("--euler1", required=True)
    s.add_argument("--prandtl", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_prandtl1)

    s = sub.add_parser("verify-ops", help="operator oracle suite")
    s.add_argument("--config")
    s.set_defaults(fn=cmd_verify_ops)

    s = sub.add_parser("error", help="remainder term e")
    s.add_argument("--config")
    s.add_argument("--in", dest="inputs", nargs="+", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_error)

    s = sub.add_parser("sweep", help="convergence sweep against Navier-Stokes")
    s.add_argument("--config")
    s.add_argument("--nus", default="4e-3,2e-3,1e-3,5e-4")
    s.add_argument("--t-eval", type=float, default=0.25)
    s.add_argument("--no-error", action="store_true", help="skip the remainder term")
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_sweep)

    s = sub.add_parser("reference", help="Navier-Stokes reference run")
    s.add_argument("--config")
    s.add_argument("--nu", type=float, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_reference)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return int(args.fn(args))
    except VlimitError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
