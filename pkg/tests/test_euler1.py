import numpy as np
import pytest

from vlimit.data import ShearVortexData
from vlimit.domain import make_domain, to_modes
from vlimit.euler import solve_euler
from vlimit.euler1 import (C1, LinearizedEuler, lift_values, solve_linearized, solve_wR, solve_wSstar, sqrt_weights,
                           wSb_profile)
from vlimit.prandtl0 import singular_influx

from conftest import small_config


@pytest.fixture(scope="module")
def outer():
    dom = make_domain(small_config().domain)
    u0 = ShearVortexData().samples(dom)
    return dom, solve_euler(u0, dom), to_modes(u0[:, 0, 0])


def test_singular_lift_is_divergence_free():
    xi = np.arange(-8, 8.0)
    u00 = np.exp(-np.abs(xi)) * (1 + 0.5j)
    y = np.linspace(0, 3, 7)
    beta = C1 * 1j * xi * u00
    div = 1j * xi[:, None] * lift_values(beta, xi, y, 0) + lift_values(beta, xi, y, 1, dy=1)
    assert np.abs(div).max() < 1e-14
    f = wSb_profile(u00, xi, y)
    assert np.abs(f.modes[8]).max() == 0.0


def test_singular_constant_matches_influx():
    assert C1 == pytest.approx(1.1283791670955126, rel=1e-15)
    xi = np.arange(-4, 4.0)
    u00 = np.zeros(8, complex)
    u00[5] = 0.3 - 0.1j
    t = 0.17
    trace = np.sqrt(t) * wSb_profile(u00, xi, [0.0]).modes[:, 0, 1]
    np.testing.assert_allclose(trace, -singular_influx(u00, t, xi), atol=1e-15)


def test_sqrt_weights_integrate_linear_data_exactly():
    t = np.linspace(0, 0.3, 7) ** 1.3
    w = sqrt_weights(t)
    f = 2 + 5 * t
    exact = 2 * (2 / 3) * t ** 1.5 + 5 * (2 / 5) * t ** 2.5
    np.testing.assert_allclose(w @ f, exact, rtol=1e-13, atol=1e-15)


def test_picard_contracts(outer):
    dom, es, u00 = outer
    sing = solve_wSstar(dom, es, u00)
    r = np.array(sing.residuals[1:])
    assert r[-1] <= 1e-10
    assert np.all(r[1:] < r[:-1])


def test_picard_matches_direct_march(outer):
    dom, es, u00 = outer
    sing = solve_wSstar(dom, es, u00)
    lin = LinearizedEuler(dom, es)
    direct = solve_linearized(lin, lambda t: np.sqrt(t) * sing.beta_unit, es.times, substeps=32)
    scale = np.abs(sing.I_a).max()
    assert np.abs(direct.a - sing.I_a).max() < 1e-5 * scale
    assert np.abs(direct.b - sing.I_b).max() < 1e-5 * scale


def test_zero_wall_data_gives_zero_singular_part(outer):
    dom, es, _ = outer
    sing = solve_wSstar(dom, es, np.zeros(dom.Nx))
    assert np.abs(sing.I_a).max() == 0 and np.abs(sing.I_b).max() == 0


def test_regular_part_is_linear_in_influx(outer):
    dom, es, _ = outer
    rng = np.random.default_rng(3)
    nt = es.times.size
    g = np.zeros((nt, dom.Nx), complex)
    g[:, dom.Nx // 2 + 1] = es.times * (rng.normal() + 1j * rng.normal())
    g[:, dom.Nx // 2 - 1] = np.conj(g[:, dom.Nx // 2 + 1])
    one = solve_wR(dom, es, g, substeps=1)
    two = solve_wR(dom, es, 2 * g, substeps=1)
    assert np.abs(two.a - 2 * one.a).max() < 1e-12 * max(np.abs(one.a).max(), 1e-300)
    assert np.abs(two.b - 2 * one.b).max() < 1e-12 * max(np.abs(one.b).max(), 1e-300)


def test_wall_normal_velocity_cancels_influx(small_expansion):
    u1, g = small_expansion.u1, small_expansion.g["g"].modes
    for n in range(u1.times.size):
        assert np.abs(u1.wall_normal(n) + g[:, n]).max() < 1e-10


def test_correction_starts_at_zero(small_expansion):
    u1 = small_expansion.u1
    assert np.abs(u1.eval(0, u1.basis.y, 0)).max() < 1e-14
    assert np.abs(u1.eval(0, u1.basis.y, 1)).max() < 1e-14
