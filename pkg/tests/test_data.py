import numpy as np
import pytest

from vlimit.data import ShearVortexData, zero_data
from vlimit.domain import make_domain


def _div(data, x, y, h=1e-5):
    ux = (data.velocity(x + h, y)[..., 0] - data.velocity(x - h, y)[..., 0]) / (2 * h)
    vy = (data.velocity(x, y + h)[..., 1] - data.velocity(x, y - h)[..., 1]) / (2 * h)
    return ux + vy


@pytest.mark.parametrize("power", [1, 3, 5])
def test_data_is_divergence_free(power):
    x = np.linspace(-3, 3, 7)
    y = np.linspace(0.1, 4, 9)
    assert np.abs(_div(ShearVortexData(power=power), x, y)).max() < 1e-8


@pytest.mark.parametrize("power", [1, 3])
def test_no_normal_wall_velocity(power):
    u = ShearVortexData(power=power).velocity(np.linspace(-3, 3, 11), np.array([0.0]))
    assert np.abs(u[:, 0, 1]).max() == 0.0


def test_wall_traces():
    x = np.linspace(-3, 3, 11)
    d1, d3 = ShearVortexData(), ShearVortexData(power=3)
    np.testing.assert_allclose(d1.velocity(x, np.array([0.0]))[:, 0, 0], d1.wall_trace(x), atol=1e-15)
    assert np.abs(d3.velocity(x, np.array([0.0]))[:, 0]).max() == 0.0
    assert np.abs(d3.wall_trace(x)).max() == 0.0


@pytest.mark.parametrize("power", [0, 2, -1])
def test_power_must_be_odd(power):
    with pytest.raises(ValueError):
        ShearVortexData(power=power)


def test_zero_data_shape():
    dom = make_domain(Nx=8, Ny=33)
    assert zero_data(dom).shape == (8, 33, 2)
