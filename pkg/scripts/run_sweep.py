"""Viscosity sweep: expansion vs. Navier-Stokes at a fixed time, with the rate fit.

    python3 scripts/run_sweep.py --out runs/sweep
    python3 scripts/run_sweep.py --config scripts/sweep_config.txt --nus 4e-3,1e-3,5e-4 --no-error
"""
import argparse
import json
import time
from pathlib import Path

import numpy as np

from vlimit.domain import load_config
from vlimit.pipeline import ExperimentConfig, sweep
from vlimit.reference_ns import report


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="domain config file (key = value lines)")
    ap.add_argument("--nus", default="4e-3,2e-3,1e-3,5e-4")
    ap.add_argument("--t-eval", type=float, default=0.25)
    ap.add_argument("--no-error", action="store_true")
    ap.add_argument("--out", default="runs/sweep")
    args = ap.parse_args()

    base = ExperimentConfig()
    dom = load_config(args.config) if args.config else base.domain
    cfg = ExperimentConfig(domain=dom, t_eval=args.t_eval, with_error=not args.no_error)
    nus = [float(v) for v in args.nus.split(",")]
    tic = time.perf_counter()
    records, exp = sweep(nus, cfg)
    out = Path(args.out)
    fit = report(records, out)
    factors = [r.err_L2_zeroth / r.err_L2_first for r in records]
    summary = {
        "slope": fit.slope, "ci95": fit.ci95,
        "median_improvement": float(np.median(factors)),
        "seconds": time.perf_counter() - tic,
        "build_seconds": exp.timings,
        "points": [{"nu": r.nu, "err0": r.err_L2_zeroth, "err1": r.err_L2_first, **r.extra} for r in records],
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2))
    print(f"median err0/err1 = {summary['median_improvement']:.2f}, total {summary['seconds']:.0f}s")


if __name__ == "__main__":
    main()
