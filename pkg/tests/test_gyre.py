import numpy as np
import pytest

from khalasi.errors import DomainError
from khalasi.flows import Rect, double_gyre, gyre_velocity, quad_gyre, stream_function
from khalasi.flows.gyre import GyreParams


def fd_velocity(params, pts, t, h=1e-5):
    """Independent check: v = (-dpsi/dy, dpsi/dx) by central differences."""
    dx = (stream_function(params, pts + [h, 0], t) - stream_function(params, pts - [h, 0], t)) / (2 * h)
    dy = (stream_function(params, pts + [0, h], t) - stream_function(params, pts - [0, h], t)) / (2 * h)
    return np.stack([-dy, dx], axis=-1)


def interior_points(params, n, seed=0, pad=1e-4):
    rng = np.random.default_rng(seed)
    d = params.domain
    return np.stack([rng.uniform(d.x0 + pad, d.x1 - pad, n),
                     rng.uniform(d.y0 + pad, d.y1 - pad, n)], axis=-1)


def test_hand_evaluated_point():
    # at t=0 the distortion is the identity, so only the vy term survives
    params = double_gyre(0.1)
    v = gyre_velocity(params, (0.5, 0.5), 0.0)
    np.testing.assert_allclose(v, [0.0, -0.2 * np.pi], atol=1e-12)


@pytest.mark.parametrize("params", [double_gyre(0.1), quad_gyre(0.1)])
@pytest.mark.parametrize("t", [0.0, 123.4, 777.0])
def test_matches_finite_differences(params, t):
    pts = interior_points(params, 500)
    v = gyre_velocity(params, pts, t)
    np.testing.assert_allclose(v, fd_velocity(params, pts, t), atol=1e-6)


@pytest.mark.parametrize("params", [double_gyre(0.1), quad_gyre(0.25)])
@pytest.mark.parametrize("t", [0.0, 42.0, 311.5])
def test_boundary_normal_velocity_vanishes(params, t):
    d = params.domain
    s = np.linspace(0.0, 1.0, 64)
    left = np.stack([np.full_like(s, d.x0), d.y0 + s * d.height], -1)
    right = np.stack([np.full_like(s, d.x1), d.y0 + s * d.height], -1)
    bottom = np.stack([d.x0 + s * d.width, np.full_like(s, d.y0)], -1)
    top = np.stack([d.x0 + s * d.width, np.full_like(s, d.y1)], -1)
    assert np.abs(gyre_velocity(params, left, t)[:, 0]).max() < 1e-12
    assert np.abs(gyre_velocity(params, right, t)[:, 0]).max() < 1e-12
    assert np.abs(gyre_velocity(params, bottom, t)[:, 1]).max() < 1e-12
    assert np.abs(gyre_velocity(params, top, t)[:, 1]).max() < 1e-12


@pytest.mark.parametrize("params", [double_gyre(0.1), quad_gyre(0.1)])
def test_divergence_free(params):
    pts = interior_points(params, 400, seed=3)
    h = 1e-4
    for t in (0.0, 99.9):
        dvx = (gyre_velocity(params, pts + [h, 0], t)[:, 0]
               - gyre_velocity(params, pts - [h, 0], t)[:, 0]) / (2 * h)
        dvy = (gyre_velocity(params, pts + [0, h], t)[:, 1]
               - gyre_velocity(params, pts - [0, h], t)[:, 1]) / (2 * h)
        assert np.abs(dvx + dvy).max() < 1e-4


def test_out_of_domain_rejected():
    params = double_gyre(0.1)
    with pytest.raises(DomainError):
        gyre_velocity(params, (2.5, 0.5), 0.0)


def test_determinism():
    params = quad_gyre(0.2)
    pts = interior_points(params, 50, seed=9)
    a = gyre_velocity(params, pts, 13.0)
    b = gyre_velocity(params, pts, 13.0)
    assert np.array_equal(a, b)


def test_invalid_params_rejected():
    with pytest.raises(ValueError):
        GyreParams(amplitude=-1.0)
    with pytest.raises(ValueError):
        GyreParams(amplitude=1.0, eps=0.5)
    with pytest.raises(ValueError):
        GyreParams(amplitude=1.0, nx=0)
