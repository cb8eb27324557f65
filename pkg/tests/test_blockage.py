import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from uecoverage.beamforming import evaluate_design
from uecoverage.blockage import (
    LANDSCAPE, PORTRAIT, BlockageModel, BlockageRegion, apply_blockage, blocked_mask,
    cdf_loss_fraction, is_blocked, loss_draws, physical_angle_fraction, region_indicator,
)
from uecoverage.coverage import spherical_cdf
from uecoverage.geometry import Direction, integrate


def test_preset_bounds():
    assert PORTRAIT.phi_bounds == (200, 320) and PORTRAIT.theta_bounds == (60, 140)
    assert LANDSCAPE.phi_bounds == (-40, 120) and LANDSCAPE.theta_bounds == (72.5, 147.5)


def test_closed_boundaries():
    assert is_blocked(Direction(60, 200), PORTRAIT)
    assert is_blocked(Direction(140, 320), PORTRAIT)
    assert not is_blocked(Direction(59.99, 250), PORTRAIT)
    assert not is_blocked(Direction(100, 320.01), PORTRAIT)


def test_azimuth_wrap():
    assert is_blocked(Direction(100, 330), LANDSCAPE)
    assert is_blocked(Direction(100, 320), LANDSCAPE)
    assert is_blocked(Direction(100, 0), LANDSCAPE)
    assert not is_blocked(Direction(100, 319), LANDSCAPE)
    assert not is_blocked(Direction(100, 121), LANDSCAPE)


def test_full_azimuth_region():
    r = BlockageRegion(0, 360, 90, 20)
    assert is_blocked(Direction(90, 123), r)
    assert_allclose(cdf_loss_fraction(r), 100 * math.sin(math.radians(10)) / 1, rtol=1e-12)


@given(st.floats(0, 180), st.floats(0, 359.999))
def test_mask_matches_scalar(theta, phi):
    assert bool(blocked_mask(LANDSCAPE, theta, phi)) == is_blocked(Direction(theta, phi), LANDSCAPE)


def test_fractions():
    assert round(physical_angle_fraction(PORTRAIT), 2) == 14.81
    assert round(physical_angle_fraction(LANDSCAPE), 2) == 18.52
    assert round(cdf_loss_fraction(PORTRAIT), 2) == 21.10
    assert round(cdf_loss_fraction(LANDSCAPE), 2) == 25.42


def test_fraction_oracle_numeric():
    # independent oracle: fine midpoint integration of sin(theta) over the rectangle
    lo, hi = LANDSCAPE.theta_bounds
    t = np.linspace(lo, hi, 200001)
    tm = 0.5 * (t[1:] + t[:-1])
    area = np.sum(np.sin(np.radians(tm)) * np.radians(np.diff(t))) * math.radians(LANDSCAPE.x1)
    assert_allclose(cdf_loss_fraction(LANDSCAPE), 100 * area / (4 * math.pi), rtol=1e-9)


def test_clamped_region_warns():
    r = BlockageRegion(0, 90, 170, 40)
    with pytest.warns(UserWarning, match="clamped"):
        f = cdf_loss_fraction(r)
    assert_allclose(f, 100 * (math.pi / 2) * (math.cos(math.radians(150)) + 1) / (4 * math.pi))


@pytest.mark.parametrize("region", [PORTRAIT, LANDSCAPE])
def test_indicator_integrates_to_closed_form(grid1, region):
    ind = region_indicator(region, grid1.theta, grid1.phi)
    val = 100 * integrate(grid1, ind) / (4 * math.pi)
    assert abs(val - cdf_loss_fraction(region)) < 0.05


def test_invalid_region():
    with pytest.raises(ValueError):
        BlockageRegion(0, 400, 90, 10)
    with pytest.raises(ValueError):
        BlockageRegion(0, 10, 90, -1)


def test_model_parse():
    assert BlockageModel.parse("1").variant == "model1"
    assert BlockageModel.parse("2-mean").variant == "model2-mean"
    assert BlockageModel.parse(BlockageModel("model2")).variant == "model2"
    with pytest.raises(ValueError):
        BlockageModel.parse("3")


def test_model2_needs_seed(grid1):
    with pytest.raises(ValueError, match="seed"):
        loss_draws(grid1, BlockageModel("model2"), None)


def test_model2_draws_deterministic(grid1):
    m = BlockageModel("model2")
    a = loss_draws(grid1, m, 3)
    assert np.array_equal(a, loss_draws(grid1, m, 3))
    assert not np.array_equal(a, loss_draws(grid1, m, 4))


def test_model2_statistics(grid1):
    d = loss_draws(grid1, BlockageModel("model2"), 0)
    assert abs(d.mean() - 15.3) < 0.3
    assert abs(d.std() - 3.8) < 0.2


@pytest.fixture(scope="module")
def edge_map(designs):
    return evaluate_design(designs["edge"], "mrc")


def test_model1_flat_loss(edge_map):
    b = apply_blockage(edge_map, PORTRAIT, "1")
    mask = blocked_mask(PORTRAIT, edge_map.grid.theta, edge_map.grid.phi)
    assert_allclose(b.total_db[mask] - edge_map.total_db[mask], -30.0, atol=1e-9)
    assert np.array_equal(b.total[~mask], edge_map.total[~mask])
    assert_allclose(b.gain_theta + b.gain_phi, b.total)
    assert b.meta["blockage"] == "portrait"


@pytest.mark.parametrize("model", ["1", "2-mean"])
def test_blockage_never_increases_gain(edge_map, model):
    b = apply_blockage(edge_map, LANDSCAPE, model)
    assert np.all(b.total <= edge_map.total)


def test_blocked_cdf_dominates(edge_map, grid1):
    seed = next(s for s in range(100) if loss_draws(grid1, BlockageModel("model2"), s).min() >= 0)
    for model, s in (("1", None), ("2-mean", None), ("2", seed)):
        c0 = spherical_cdf(edge_map)
        c1 = spherical_cdf(apply_blockage(edge_map, PORTRAIT, model, s))
        levels = np.union1d(c0.gain_db, c1.gain_db)
        assert np.all(c1(levels) >= c0(levels) - 1e-12)


def test_model2_blocked_cell_loss(edge_map):
    b = apply_blockage(edge_map, PORTRAIT, "2", seed=9)
    mask = blocked_mask(PORTRAIT, edge_map.grid.theta, edge_map.grid.phi)
    loss = edge_map.total_db[mask] - b.total_db[mask]
    draws = loss_draws(edge_map.grid, BlockageModel("model2"), 9)[mask]
    assert_allclose(loss, draws, atol=1e-9)
