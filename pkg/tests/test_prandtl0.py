import numpy as np
import pytest
from scipy.integrate import quad, solve_ivp
from scipy.special import erfc

from vlimit.domain import from_modes, make_domain, to_modes
from vlimit.prandtl0 import (PrandtlConfig, d_Y, erfc_profile, erfc_tail_integral, influx_g, singular_influx,
                             singular_u, singular_v, solve_prandtl_regular)


class WallFlow:
    """Stand-in outer flow: gamma u^E given by a callable U(t, x) with derivatives."""

    def __init__(self, dom, times, U, Ux, Ut):
        self.times = np.asarray(times)
        self.dom = dom
        self._f = (U, Ux, Ut)

    def wall_value_at(self, t, dx=0, dt=0):
        f = self._f[1] if dx else (self._f[2] if dt else self._f[0])
        return to_modes(f(t, self.dom.x))


def test_erfc_at_one_by_quadrature():
    val = 2 / np.sqrt(np.pi) * quad(lambda s: np.exp(-s * s), 1, np.inf, epsabs=0, epsrel=1e-13)[0]
    assert val == pytest.approx(0.157299, abs=1e-6)
    assert erfc_profile(0.25, 1.0) == pytest.approx(val, rel=1e-12)


def test_singular_profile_limits():
    assert erfc_profile(0.0, 0.0) == 1.0 and erfc_profile(0.0, 0.3) == 0.0
    u00 = np.array([0, 0, 0.5j, 0], complex)
    uS = singular_u(u00, 0.3, np.array([0.0, 1e3]), xi=np.arange(-2, 2.0))
    np.testing.assert_allclose(uS.modes[:, 0, 0], -u00)
    assert np.abs(uS.modes[:, 1, 0]).max() == 0.0


def test_singular_normal_velocity_trace():
    xi = np.arange(-4, 4.0)
    u00 = np.zeros(8, complex)
    u00[5] = 1.0
    t = 0.25
    vS = singular_v(u00, t, np.array([0.0]), xi)
    expected = -1j * xi * u00 * 2 * np.sqrt(t) / np.sqrt(np.pi)
    np.testing.assert_allclose(vS.modes[:, 0, 0], expected, atol=1e-15)


def test_singular_influx_magnitude():
    xi = np.arange(-4, 4.0)
    u00 = np.zeros(8, complex)
    u00[5] = 1.0
    gS = singular_influx(u00, 0.25, xi)
    assert abs(gS[5]) == pytest.approx(0.564189, abs=1e-6)


def test_tail_integral_matches_quadrature():
    t, Y = 0.3, 0.7
    ref = quad(lambda s: erfc(s / (2 * np.sqrt(t))), Y, np.inf, epsabs=0, epsrel=1e-12)[0]
    assert erfc_tail_integral(t, Y) == pytest.approx(ref, rel=1e-11)


def test_singular_rejects_negative_time():
    with pytest.raises(ValueError):
        singular_u(np.zeros(4), -0.1, np.zeros(3), xi=np.zeros(4))


def _mol_oracle(dom, times, Ufun, Uxfun, Utfun):
    """Method of lines: pseudo-spectral in x, second differences in Y, stiff ODE integrator in t."""
    Y = dom.Y
    h = Y[1] - Y[0]
    k = np.fft.fftfreq(dom.Nx, d=1.0 / dom.Nx) * np.pi / dom.config.Lx
    nx, ny = dom.Nx, Y.size

    def ddx(f):
        return np.real(np.fft.ifft(1j * k[:, None] * np.fft.fft(f, axis=0), axis=0))

    def rhs(t, z):
        r = np.empty((nx, ny))
        r[:, 1:-1] = z.reshape(nx, ny - 2)
        r[:, 0] = 0.0
        r[:, -1] = Ufun(t, dom.x)
        rx = ddx(r)
        v = -np.concatenate([np.zeros((nx, 1)), np.cumsum(0.5 * (rx[:, 1:] + rx[:, :-1]) * h, axis=1)], axis=1)
        rY = np.gradient(r, Y, axis=1, edge_order=2)
        U, Ux, Ut = Ufun(t, dom.x), Uxfun(t, dom.x), Utfun(t, dom.x)
        lap = (r[:, 2:] - 2 * r[:, 1:-1] + r[:, :-2]) / h ** 2
        src = (Ut + U * Ux)[:, None] - (r * rx + v * rY)[:, 1:-1]
        return (lap + src).ravel()

    z0 = np.zeros(nx * (ny - 2))
    sol = solve_ivp(rhs, (times[0], times[-1]), z0, method="BDF", t_eval=times, rtol=1e-10, atol=1e-12)
    out = np.zeros((times.size, nx, ny))
    out[:, :, 1:-1] = sol.y.T.reshape(times.size, nx, ny - 2)
    out[:, :, -1] = np.array([Ufun(t, dom.x) for t in times])
    return out


def test_x_independent_case_is_forced_heat():
    dom = make_domain(Nx=8, Y_max=20.0, NY=201, T=0.2, Nt=8)
    times = np.linspace(0, 0.2, 9)
    U = lambda t, x: np.full_like(x, t)
    Ux = lambda t, x: np.zeros_like(x)
    Ut = lambda t, x: np.ones_like(x)
    ser = solve_prandtl_regular(np.zeros(8), WallFlow(dom, times, U, Ux, Ut), dom,
                                config=PrandtlConfig(substeps=32, ramp_steps=64))
    ref = _mol_oracle(dom, times, U, Ux, Ut)
    got = np.array([from_modes(ser.r[n]) for n in range(times.size)])
    assert np.abs(got - ref).max() < 1e-6


def test_compatible_case_matches_method_of_lines():
    dom = make_domain(Nx=16, Y_max=20.0, NY=201, T=0.1, Nt=5)
    times = np.linspace(0, 0.1, 6)
    U = lambda t, x: 2 * np.sin(x) * t
    Ux = lambda t, x: 2 * np.cos(x) * t
    Ut = lambda t, x: 2 * np.sin(x)
    ser = solve_prandtl_regular(np.zeros(16), WallFlow(dom, times, U, Ux, Ut), dom,
                                config=PrandtlConfig(substeps=32, ramp_steps=64))
    ref = _mol_oracle(dom, times, U, Ux, Ut)
    got = np.array([from_modes(ser.r[n]) for n in range(times.size)])
    assert np.abs(got - ref).max() < 1e-6


def test_layer_is_incompressible(small_expansion):
    pr = small_expansion.prandtl
    n = pr.times.size - 1
    resid = 1j * pr.xi[:, None] * pr.u_tilde(n) + d_Y(pr.vbar(n), pr.Y)
    assert np.abs(resid[:, 2:-2]).max() < 5e-3 * np.abs(pr.xi[:, None] * pr.u_tilde(n)).max()


def test_influx_split_is_consistent(small_expansion):
    g = influx_g(small_expansion.prandtl)
    np.testing.assert_allclose(g["g"].modes, g["gR"].modes + g["gS"].modes)


def test_wall_and_far_field_conditions(small_expansion):
    pr = small_expansion.prandtl
    for n in range(pr.times.size):
        assert np.abs(pr.u_tilde(n)[:, 0] + pr.U[n]).max() < 1e-12
        assert np.abs(pr.u_tilde(n)[:, -1]).max() < 1e-8
