"""End-to-end acceptance checks; each prints one PASS/FAIL line with the measured values."""
import time

import numpy as np
import pytest

from vlimit.data import ShearVortexData
from vlimit.domain import make_domain
from vlimit.error_term import build_error
from vlimit.euler1 import solve_wR
from vlimit.halfspace import OperatorContext
from vlimit.pipeline import ExperimentConfig, build_expansion, composite, sweep
from vlimit.prandtl1 import solve_uR1
from vlimit.reference_ns import fit_rate, solve_ns
from vlimit.verify import closed_form_suite, operator_suite, scaling_suite

from conftest import small_config

NUS = (4e-3, 2e-3, 1e-3, 5e-4)


def _line(capsys, number, passed, text):
    with capsys.disabled():
        print(f"\n{'PASS' if passed else 'FAIL'}  criterion {number}: {text}")


def _checks(capsys, number, checks, seconds, budget):
    ok = all(c.passed for c in checks) and seconds <= budget
    with capsys.disabled():
        for c in checks:
            print("\n    " + c.line(), end="")
    bad = [c.name for c in checks if not c.passed]
    _line(capsys, number, ok, f"{len(checks) - len(bad)}/{len(checks)} checks, {seconds:.1f}s (budget {budget}s)"
          + (f"; failing: {', '.join(bad)}" if bad else ""))
    return ok


@pytest.fixture(scope="module")
def full_sweep():
    tic = time.perf_counter()
    records, exp = sweep(NUS, ExperimentConfig(), log=lambda *_: None)
    return records, exp, time.perf_counter() - tic


def test_sqrt_nu_rate(full_sweep, capsys):
    records, _, seconds = full_sweep
    fit = fit_rate([r.nu for r in records], [r.err_L2_zeroth for r in records])
    ok = abs(fit.slope - 0.5) <= 0.1 and seconds <= 600
    errs = ", ".join(f"{r.nu:g}:{r.err_L2_zeroth:.3e}" for r in records)
    _line(capsys, 1, ok, f"slope {fit.slope:.3f} +/- {fit.ci95:.3f} (target 0.5 +/- 0.1), "
          f"sweep {seconds:.0f}s (budget 600s); err0 {errs}")
    assert ok


def test_first_order_improvement(full_sweep, capsys):
    records, _, _ = full_sweep
    factors = np.array([r.err_L2_zeroth / r.err_L2_first for r in records])
    every = all(r.err_L2_first <= r.err_L2_zeroth for r in records)
    ok = every and np.median(factors) >= 2
    _line(capsys, 2, ok, f"err1 <= err0 at every point: {every}; median factor {np.median(factors):.2f} "
          f"(target >= 2); factors {np.round(factors, 2).tolist()}")
    assert ok


def test_closed_form_suite(capsys):
    tic = time.perf_counter()
    checks = closed_form_suite()
    assert _checks(capsys, 3, checks, time.perf_counter() - tic, 60)


def test_operator_suite(capsys):
    tic = time.perf_counter()
    checks = operator_suite()
    assert _checks(capsys, 4, checks, time.perf_counter() - tic, 300)


def test_singular_scalings(capsys):
    tic = time.perf_counter()
    checks = scaling_suite()
    assert _checks(capsys, 5, checks, time.perf_counter() - tic, 600)


def test_eps_uniformity(full_sweep, capsys):
    _, exp, _ = full_sweep
    ks, es = [], []
    for eps in (0.1, 0.05, 0.025):
        err = build_error(exp, eps)
        ks.append(err.k_norm().max())
        es.append(err.e_norm().max())
    rk, re = max(ks) / min(ks), max(es) / min(es)
    ok = rk <= 2 and re <= 2
    _line(capsys, 6, ok, f"sup_t ||k|| = {np.round(ks, 4).tolist()} (ratio {rk:.2f}), "
          f"sup_t ||e|| = {np.round(es, 4).tolist()} (ratio {re:.2f}), target ratio <= 2")
    assert ok


def _max_abs(*arrays):
    return max(float(np.abs(a).max()) for a in arrays)


def test_degenerate_data(capsys):
    # compatible data: zero wall velocity
    exp = build_expansion(small_config(data=ShearVortexData(power=3)))
    pr, nt = exp.prandtl, exp.euler.times.size
    heat_err = build_error(exp, 0.05)
    heat = heat_err.parts["heat"]
    singular = _max_abs(exp.u00, np.array([pr.uS(n) for n in range(nt)]),
                        np.array([pr.vbar_S(n) for n in range(nt)]), exp.g["gS"].modes,
                        exp.sing.I_a, exp.sing.I_b, exp.sing.beta_unit, exp.q.uS1,
                        heat.h_prime, heat.h_n)
    dom = make_domain(exp.config.domain)
    wR = solve_wR(dom, exp.euler, exp.g["gR"].modes.T, substeps=exp.config.euler1_substeps)
    ctx = OperatorContext(1.0, dom.xi, dom.Y, exp.euler.times)
    qR = solve_uR1(-np.array([wR.eval(n, [0.0], 0)[:, 0] for n in range(nt)]), ctx)
    regular = _max_abs(exp.u1.a - wR.a, exp.u1.b - wR.b, exp.u1.beta - wR.beta, exp.q.q - qR)
    compat_ok = singular == 0.0 and regular <= 1e-10

    # zero data: zero solution end to end
    zero_cfg = small_config(data=ShearVortexData(amp=0.0, shear=0.0))
    z = build_expansion(zero_cfg)
    ze = build_error(z, 0.05)
    n = z.euler.times.size - 1
    y = np.linspace(0, 4, 50)
    ns = solve_ns(zero_cfg.data.velocity, 2.5e-3, 0.05, zero_cfg.ns)
    zero = _max_abs(z.euler.a, z.euler.b, z.prandtl.r, z.u1.a, z.u1.b, z.u1.beta, z.q.q, ze.e1, ze.e2,
                    composite(z, n, 0.05, y, 0, "full", ze), composite(z, n, 0.05, y, 1, "full", ze),
                    ns.at(0.05).u, ns.at(0.05).v)
    zero_ok = zero <= 1e-10
    ok = compat_ok and zero_ok
    _line(capsys, 7, ok, f"compatible data: max singular component {singular:.1e} (must be 0), "
          f"regular parts vs standalone solves {regular:.1e} (<= 1e-10); zero data: max field {zero:.1e} (<= 1e-10)")
    assert ok
