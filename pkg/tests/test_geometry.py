import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from uecoverage.geometry import (
    FOUR_PI, Direction, GridError, integrate, make_grid, sample, unit_vector,
    unit_vectors, wrap_phi,
)

DIVISORS = [0.5, 1.0, 2.0, 3.0, 5.0, 10.0]


@pytest.mark.parametrize("dt", DIVISORS)
@pytest.mark.parametrize("dp", DIVISORS)
def test_weights_sum_to_four_pi(dt, dp):
    g = make_grid(dt, dp)
    assert abs(g.weights.sum() - FOUR_PI) < 1e-9
    assert np.all(g.weights > 0)


def test_one_degree_grid_shape(grid1):
    assert grid1.shape == (180, 360)
    assert grid1.size == 64800
    assert grid1.theta[0] == 0.5 and grid1.phi[0] == 0.5
    assert grid1.theta[-1] == 179.5 and grid1.phi[-1] == 359.5


def test_weight_near_equator(grid1):
    # cell at theta=90.5 is close to sin(theta) dtheta dphi
    k = 90 * 360
    approx = math.sin(math.radians(90.5)) * math.radians(1) ** 2
    assert_allclose(grid1.weights[k], approx, rtol=1e-4)
    assert_allclose(grid1.weights[k], 3.046e-4, rtol=1e-3)


def test_weights_match_sin_theta_shape(grid1):
    w = grid1.weights
    ref = np.sin(np.radians(grid1.theta))
    ratio = w / ref
    assert_allclose(ratio, ratio[0], rtol=1e-12)


@pytest.mark.parametrize("step", [0.0, -1.0, 7.0, float("nan")])
def test_bad_steps(step):
    with pytest.raises(GridError):
        make_grid(step, 1.0)
    with pytest.raises(GridError):
        make_grid(1.0, step)


def test_grid_arrays_read_only(grid1):
    with pytest.raises(ValueError):
        grid1.weights[0] = 1.0


def test_grid_equality():
    assert make_grid(2, 2) == make_grid(2.0, 2.0)
    assert make_grid(2, 2) != make_grid(1, 2)
    assert hash(make_grid(2, 2)) == hash(make_grid(2, 2))


def test_points_order():
    g = make_grid(30, 90)
    pts = g.points
    assert len(pts) == g.size
    assert (pts[1].theta, pts[1].phi) == (15.0, 135.0)
    assert (pts[4].theta, pts[4].phi) == (45.0, 45.0)


@given(st.floats(0, 180, allow_nan=False), st.floats(-720, 720, allow_nan=False))
def test_index_of_contains_direction(theta, phi):
    g = make_grid(2, 5)
    k = int(g.index_of(theta, phi))
    assert abs(g.theta[k] - theta) <= 1 + 1e-9
    dp = abs(g.phi[k] - wrap_phi(phi))
    assert min(dp, 360 - dp) <= 2.5 + 1e-9


@given(st.floats(-1e4, 1e4, allow_nan=False))
def test_wrap_phi_range(phi):
    w = wrap_phi(phi)
    assert 0 <= w < 360
    assert math.isclose(math.cos(math.radians(w)), math.cos(math.radians(phi)), abs_tol=1e-9)


def test_wrap_phi_tiny_negative():
    assert wrap_phi(-1e-17) == 0.0


@pytest.mark.parametrize("theta", [-0.1, 180.1, float("nan")])
def test_direction_rejects_bad_theta(theta):
    with pytest.raises(ValueError):
        Direction(theta, 0)


def test_direction_wraps_phi():
    assert Direction(10, -90).phi == 270.0
    assert Direction(10, 360).phi == 0.0


@given(st.floats(0, 180), st.floats(0, 359.99))
def test_vector_round_trip(theta, phi):
    d = Direction(theta, phi)
    v = unit_vector(d)
    assert_allclose(np.linalg.norm(v), 1.0, rtol=1e-12)
    back = Direction.from_vector(v)
    assert_allclose(unit_vector(back), v, atol=1e-9)


def test_unit_vectors_axes():
    assert_allclose(unit_vectors(90, 0), [1, 0, 0], atol=1e-15)
    assert_allclose(unit_vectors(90, 90), [0, 1, 0], atol=1e-15)
    assert_allclose(unit_vectors(0, 123), [0, 0, 1], atol=1e-15)


def test_zero_vector_has_no_direction():
    with pytest.raises(ValueError):
        Direction.from_vector([0, 0, 0])


def test_integrate_constant_and_callable(grid1):
    assert_allclose(integrate(grid1, 1.0), FOUR_PI, rtol=1e-12)
    assert_allclose(integrate(grid1, lambda t, p: np.ones_like(t)), FOUR_PI, rtol=1e-12)


@pytest.mark.parametrize("step", [1.0, 2.0, 5.0])
def test_integrate_cos_squared(step):
    # oracle: integral of cos^2(theta) over the sphere is 4 pi / 3
    g = make_grid(step, step)
    val = integrate(g, lambda t, p: np.cos(np.radians(t)) ** 2)
    # midpoint-rule error shrinks as step**2
    assert_allclose(val, FOUR_PI / 3, rtol=3e-5 * step**2)


def test_integrate_polar_cap_exact():
    # a cap aligned with cell edges is integrated exactly
    g = make_grid(1.0, 1.0)
    cap = integrate(g, lambda t, p: (t < 30).astype(float))
    assert_allclose(cap, 2 * np.pi * (1 - math.cos(math.radians(30))), rtol=1e-12)


def test_sample_shapes(grid1):
    assert sample(grid1, 2.0).shape == (grid1.size,)
    with pytest.raises(ValueError):
        sample(grid1, np.ones(5))
