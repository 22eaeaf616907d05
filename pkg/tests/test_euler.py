import numpy as np
import pytest

from vlimit.data import ShearVortexData, zero_data
from vlimit.domain import SpectralField, from_modes, make_domain, to_modes
from vlimit.errors import CFLViolation, InvalidConfig
from vlimit.euler import (EulerModel, EulerState, divergence, euler_rhs, first_order_residual_term, leray_project,
                          solve_euler)


@pytest.fixture(scope="module")
def dom():
    return make_domain(Nx=32, Ny=129, y_max=16.0, T=0.1, Nt=10)


def _field(dom, u, v):
    return SpectralField(np.stack([to_modes(u), to_modes(v)], axis=2), dom.xi, dom.y)


def test_gradient_is_annihilated(dom):
    X, Y = np.meshgrid(dom.x, dom.y, indexing="ij")
    g = np.exp(-Y ** 2 / 2)
    phi_x = np.cos(X) * (1 + Y ** 2) * g
    phi_y = np.sin(X) * (2 * Y - Y * (1 + Y ** 2)) * g
    out = leray_project(_field(dom, phi_x, phi_y), dom)
    assert np.abs(out.modes).max() < 1e-8


def test_solenoidal_field_is_fixed(dom):
    u0 = ShearVortexData().samples(dom)
    f = _field(dom, u0[:, :, 0], u0[:, :, 1])
    out = leray_project(f, dom)
    assert np.abs(out.modes - f.modes).max() < 1e-8


def test_projection_is_idempotent_and_solenoidal(dom, rng):
    X, Y = np.meshgrid(dom.x, dom.y, indexing="ij")
    g = np.exp(-Y ** 2 / 4)
    u = (np.cos(X) + 0.3 * np.sin(2 * X)) * g * (1 + Y)
    v = np.sin(X) * Y * g + 0.2 * np.cos(X) * g
    p1 = leray_project(_field(dom, u, v), dom)
    p2 = leray_project(p1, dom)
    assert np.abs(p2.modes - p1.modes).max() < 1e-12 * np.abs(p1.modes).max()
    assert np.abs(p1.modes[:, 0, 1]).max() < 1e-12
    assert np.abs(divergence(p1, dom)).max() < 1e-8


def test_shear_flow_is_steady(dom):
    u0 = zero_data(dom)
    u0[:, :, 0] = np.exp(-dom.y ** 2)[None, :]
    model = EulerModel(dom)
    a, b = model.coefficients(u0)
    ra, rb = euler_rhs(EulerState(a, b, 0.0), dom)
    assert max(np.abs(ra).max(), np.abs(rb).max()) < 1e-13


def test_rhs_is_energy_neutral(dom):
    model = EulerModel(dom)
    a, b = model.coefficients(ShearVortexData().samples(dom))
    a, b = a * model.mask, b * model.mask
    ra, rb = model.rhs(a, b)
    w = np.full(model.basis.y.size, 0.5)
    w[0] = 1.0
    inner = np.sum(np.real(np.conj(a) * ra) * w) + 0.5 * np.sum(np.real(np.conj(b[:, 1:-1]) * rb[:, 1:-1]))
    scale = np.sqrt(np.sum(np.abs(a) ** 2) * np.sum(np.abs(ra) ** 2))
    assert abs(inner) < 1e-10 * scale


def test_energy_is_conserved(dom):
    es = solve_euler(ShearVortexData().samples(dom), dom, substeps=2)
    drift = np.abs(es.energy - es.energy[0]).max() / es.energy[0]
    assert drift < 1e-6


def test_zero_data_stays_zero(dom):
    es = solve_euler(zero_data(dom), dom)
    assert np.abs(es.a).max() == 0 and np.abs(es.b).max() == 0


def test_normal_wall_velocity_rejected(dom):
    u0 = zero_data(dom)
    u0[:, :, 1] = np.cos(dom.x)[:, None] * np.exp(-dom.y ** 2)[None, :]
    with pytest.raises(InvalidConfig):
        solve_euler(u0, dom)


def test_large_step_violates_cfl(dom):
    with pytest.raises(CFLViolation):
        solve_euler(50 * ShearVortexData().samples(dom), dom, T=1.0, Nt=1)


def test_wall_residual_matches_finite_differences(dom):
    es = solve_euler(ShearVortexData().samples(dom), dom, T=0.1, Nt=40)
    res = first_order_residual_term(es)
    trace = np.array([es.eval(n, [0.0], 0)[:, 0] for n in range(es.times.size)])
    dt = es.times[1] - es.times[0]
    n = 20
    ut = (trace[n + 1] - trace[n - 1]) / (2 * dt)
    k = dom.xi
    U = from_modes(trace[n])
    Ux = from_modes(1j * k * trace[n])
    expected = -(ut + to_modes(U * Ux))
    assert np.abs(res.modes[:, n] - expected).max() < 1e-4 * np.abs(expected).max()
