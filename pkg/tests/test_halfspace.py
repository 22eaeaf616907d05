import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from vlimit.halfspace import (OperatorContext, backward_sweep, e1_apply, e2_apply, forward_sweep, nstar_apply,
                              nstar_divergence, pinf_divergence, pinf_project, riesz_Np, stokes_divergence,
                              stokes_solve, stretched_grid, ukai_apply)
from vlimit.verify import _smooth_layer_data, e2_time_order, nstar_bruteforce_error

XI = np.arange(-8, 8, dtype=float)
YS = stretched_grid(80.0, 300, 0.05)


def test_riesz_symbol():
    out = riesz_Np(np.ones(3), np.array([-2.0, 0.0, 3.0]))
    np.testing.assert_array_equal(out, [-1j, 0, 1j])


@settings(max_examples=25, deadline=None)
@given(arrays(np.complex128, (5, 4), elements=st.complex_numbers(max_magnitude=10, allow_nan=False)))
def test_riesz_squares_to_minus_one_off_the_mean(m):
    xi = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    twice = riesz_Np(riesz_Np(m, xi, axis=0), xi, axis=0)
    np.testing.assert_allclose(twice[[0, 1, 3, 4]], -m[[0, 1, 3, 4]], atol=1e-12)
    assert np.all(twice[2] == 0)


def test_context_validation():
    with pytest.raises(ValueError):
        OperatorContext(0.0, XI, YS, np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        OperatorContext(0.1, XI, YS, np.array([0.1, 1.0]))
    with pytest.raises(ValueError):
        OperatorContext(0.1, XI, YS, np.array([0.0, 0.1, 0.3])).dt


def test_sweeps_are_exact_for_linear_data():
    a = np.array([0.0, 0.3, 2.0])
    Y = stretched_grid(10.0, 50, 0.05)
    f = np.ones((3, Y.size)) * (1 + 2 * Y)
    L = forward_sweep(f, a, Y)
    R = backward_sweep(f, a, Y)
    for k, ak in enumerate(a):
        if ak == 0:
            refL = Y + Y ** 2
            refR = (10 + 100) - refL
        else:
            refL = (1 + 2 * Y) / ak - 2 / ak ** 2 - np.exp(-ak * Y) * (1 / ak - 2 / ak ** 2)
            refR = (1 + 2 * Y) / ak + 2 / ak ** 2 - np.exp(-ak * (10 - Y)) * (21 / ak + 2 / ak ** 2)
        np.testing.assert_allclose(L[k], refL, atol=1e-11)
        np.testing.assert_allclose(R[k], refR, atol=1e-11)


def test_ukai_of_constant():
    ctx = OperatorContext(0.1, XI, YS, np.array([0.0, 1.0]))
    out = ukai_apply(np.ones((XI.size, YS.size)), ctx)
    ref = 1 - np.exp(-np.outer(ctx.rate, YS))
    assert np.abs(out - ref).max() < 1e-13


@settings(max_examples=20, deadline=None)
@given(arrays(np.float64, (16, 40), elements=st.floats(-5, 5)))
def test_ukai_is_sup_bounded(f):
    Y = np.linspace(0, 20, 40)
    ctx = OperatorContext(0.2, XI, Y, np.array([0.0, 1.0]))
    out = ukai_apply(f, ctx)
    assert np.abs(out).max() <= np.abs(f).max() * (1 + 1e-12) + 1e-14


def test_backward_euler_is_first_order():
    assert e2_time_order("euler") == pytest.approx(1.0, abs=0.2)


def test_e2_zero_boundary_values():
    t = np.linspace(0, 0.2, 11)
    ctx = OperatorContext(0.1, XI, YS, t)
    w1, _ = _smooth_layer_data(XI, YS, t)
    out = e2_apply(w1, ctx)
    assert np.abs(out[0]).max() == 0 and np.abs(out[..., 0]).max() == 0 and np.abs(out[..., -1]).max() == 0


def test_boundary_heat_with_constant_datum():
    from scipy.special import erfc
    Y = np.linspace(0, 10, 101)
    t = np.linspace(0, 0.5, 26)
    ctx = OperatorContext(0.1, np.array([0.0, 3.0]), Y, t)
    out = e1_apply(np.ones((t.size, 2)), ctx, x_diffusion=False)
    for n in range(1, t.size):
        np.testing.assert_allclose(out[n, 1], erfc(Y / (2 * np.sqrt(t[n]))), atol=1e-12)


def test_projection_mean_mode():
    Y = np.linspace(0, 10, 51)
    ctx = OperatorContext(0.1, np.array([0.0, 1.0]), Y, np.array([0.0, 1.0]))
    v1 = np.vstack([np.exp(-Y), np.zeros_like(Y)])
    v2 = np.vstack([Y * np.exp(-Y), np.zeros_like(Y)])
    pt, pn = pinf_project(v1, v2, ctx)
    np.testing.assert_allclose(pt[0], v1[0], atol=1e-15)
    assert np.abs(pn[0]).max() < 1e-15


def test_projection_output_is_solenoidal():
    ctx = OperatorContext(0.1, XI, YS, np.array([0.0, 1.0]))
    w1, w2 = _smooth_layer_data(XI, YS, ctx.t)
    div = pinf_divergence(w1[1], w2[1], ctx)
    assert np.abs(div).max() < 1e-10 * max(np.abs(w1).max(), np.abs(w2).max())


@pytest.fixture(scope="module")
def stokes_case():
    t = np.linspace(0, 0.25, 33)
    ctx = OperatorContext(0.1, XI, YS, t)
    rng = np.random.default_rng(7)
    g_t = np.zeros((t.size, XI.size), complex)
    g_n = np.zeros_like(g_t)
    for k in (1, 2):
        c = rng.normal(size=2) + 1j * rng.normal(size=2)
        g_t[:, 8 + k] = c[0] * np.sin(4 * t)
        g_n[:, 8 + k] = c[1] * t ** 2
        g_t[:, 8 - k] = np.conj(g_t[:, 8 + k])
        g_n[:, 8 - k] = np.conj(g_n[:, 8 + k])
    g_t[:, 8] = t
    return ctx, g_t, g_n


def test_stokes_attains_wall_data(stokes_case):
    ctx, g_t, g_n = stokes_case
    s1, s2 = stokes_solve(g_t, g_n, ctx)
    assert np.abs(s1[1:, :, 0] - g_t[1:]).max() < 1e-6
    assert np.abs(s2[1:, :, 0] - g_n[1:]).max() < 1e-6


def test_stokes_is_solenoidal(stokes_case):
    ctx, g_t, g_n = stokes_case
    assert np.abs(stokes_divergence(g_t, g_n, ctx)).max() < 1e-8


def test_stokes_zero_in_zero_out(stokes_case):
    ctx, g_t, _ = stokes_case
    s1, s2 = stokes_solve(np.zeros_like(g_t), np.zeros_like(g_t), ctx)
    assert np.abs(s1).max() == 0 and np.abs(s2).max() == 0


@pytest.fixture(scope="module")
def nstar_case():
    t = np.linspace(0, 0.25, 33)
    ctx = OperatorContext(0.1, XI, YS, t)
    w1, w2 = _smooth_layer_data(XI, YS, t)
    return ctx, w1, w2, nstar_apply(w1, w2, ctx)


def test_nstar_no_slip(nstar_case):
    _, _, _, (n1, n2) = nstar_case
    assert max(np.abs(n1[..., 0]).max(), np.abs(n2[..., 0]).max()) < 1e-6


def test_nstar_is_solenoidal(nstar_case):
    ctx, w1, w2, _ = nstar_case
    assert np.abs(nstar_divergence(w1, w2, ctx)).max() < 1e-7


def test_nstar_is_linear(nstar_case):
    ctx, w1, w2, (n1, n2) = nstar_case
    m1, m2 = nstar_apply(-2.5 * w1, -2.5 * w2, ctx)
    scale = np.abs(n1).max()
    assert np.abs(m1 + 2.5 * n1).max() < 1e-12 * scale
    assert np.abs(m2 + 2.5 * n2).max() < 1e-12 * scale


def test_nstar_matches_streamfunction_solve():
    assert nstar_bruteforce_error(0.1) < 5e-4


@pytest.mark.parametrize("h0", [0.01, 0.05])
def test_stretched_grid(h0):
    Y = stretched_grid(80.0, 300, h0)
    assert Y[0] == 0 and Y[-1] == pytest.approx(80.0)
    assert Y[1] == pytest.approx(h0, rel=1e-6)
    assert np.all(np.diff(Y) > 0)
