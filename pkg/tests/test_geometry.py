import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roma_hsr.geometry import (
    ArrayConfig,
    PanelPose,
    Scenario,
    antenna_offsets,
    antenna_positions,
    center_distance,
    element_indices,
    panel_basis,
)

alphas = st.floats(-math.pi / 2, math.pi / 2)
betas = st.floats(0.0, math.pi / 2)


def _scenario(center, rx=None):
    tx = ArrayConfig(2, 1, 0.5, 0.5)
    return Scenario(tx, rx or tx, rx_center=center)


@pytest.mark.parametrize("center, expected", [
    ((3, 4, 0), 5.0),
    ((0, 0, 10), 10.0),
    ((30, 4, 10), 31.874754901018456),
])
def test_center_distance(center, expected):
    assert center_distance(_scenario(center)) == pytest.approx(expected, rel=1e-15)


def test_zero_center_rejected():
    with pytest.raises(ValueError):
        _scenario((0, 0, 0))


@pytest.mark.parametrize("kwargs", [
    dict(count_h=0, count_v=1, spacing_h=1, spacing_v=1),
    dict(count_h=1, count_v=1, spacing_h=0, spacing_v=1),
    dict(count_h=1, count_v=1, spacing_h=1, spacing_v=-1),
])
def test_array_config_invariants(kwargs):
    with pytest.raises(ValueError):
        ArrayConfig(**kwargs)


@pytest.mark.parametrize("alpha, beta", [(2.0, 0.0), (0.0, -0.1), (0.0, 1.6)])
def test_pose_bounds(alpha, beta):
    with pytest.raises(ValueError):
        PanelPose(alpha, beta)


def test_unrotated_pair():
    off = antenna_offsets(ArrayConfig(2, 1, 0.5, 0.5), PanelPose())
    np.testing.assert_allclose(off, [[-0.25, 0, 0], [0.25, 0, 0]], atol=1e-15)


def test_singleton_is_centered():
    off = antenna_offsets(ArrayConfig(1, 1, 0.3, 0.3), PanelPose(0.7, 1.1))
    np.testing.assert_array_equal(off, np.zeros((1, 3)))


def test_quarter_turn_maps_horizontal_axis_to_y():
    off = antenna_offsets(ArrayConfig(2, 2, 0.5, 0.5), PanelPose(math.pi / 2, 0.0))
    # elements 0 and 1 differ only along the horizontal axis
    step = off[1] - off[0]
    np.testing.assert_allclose(step, [0.0, 0.5, 0.0], atol=1e-15)
    np.testing.assert_allclose(off[2] - off[0], [0.0, 0.0, 0.5], atol=1e-15)


def test_element_order_matches_index_formulas():
    m1, m2 = element_indices(ArrayConfig(3, 2, 1.0, 1.0))
    # one-based index m = 1..6 -> (mod(m-1, 3), floor((m-1)/3))
    assert list(m1) == [0, 1, 2, 0, 1, 2]
    assert list(m2) == [0, 0, 0, 1, 1, 1]


def test_offsets_match_expanded_trig_form():
    cfg = ArrayConfig(3, 2, 0.11, 0.07)
    a, b = 0.4, 1.1
    off = antenna_offsets(cfg, PanelPose(a, b))
    for m in range(cfg.size):
        p, q = m % 3 - 1.0, m // 3 - 0.5
        expected = [
            p * 0.11 * math.cos(a) - q * 0.07 * math.sin(b) * math.sin(a),
            p * 0.11 * math.sin(a) + q * 0.07 * math.sin(b) * math.cos(a),
            q * 0.07 * math.cos(b),
        ]
        np.testing.assert_allclose(off[m], expected, atol=1e-15)


def test_positions():
    rx = ArrayConfig(1, 1, 0.1, 0.1)
    s = Scenario(ArrayConfig(2, 1, 0.5, 0.5), rx, rx_center=(30, 4, 10))
    np.testing.assert_array_equal(antenna_positions(s, "rx"), [[30, 4, 10]])
    np.testing.assert_allclose(antenna_positions(s, "tx"), [[-0.25, 0, 0], [0.25, 0, 0]])
    with pytest.raises(ValueError):
        antenna_positions(s, "both")


@settings(max_examples=100, deadline=None)
@given(alphas, betas, st.integers(1, 7), st.integers(1, 7))
def test_rotation_is_isometry(alpha, beta, nh, nv):
    cfg = ArrayConfig(nh, nv, 0.013, 0.029)
    pose = PanelPose(alpha, beta)
    u1, u2 = panel_basis(pose)
    np.testing.assert_allclose([u1 @ u1, u2 @ u2, u1 @ u2], [1, 1, 0], atol=1e-15)
    off = antenna_offsets(cfg, pose)
    grid = off.reshape(nv, nh, 3)
    if nh > 1:
        np.testing.assert_allclose(np.linalg.norm(np.diff(grid, axis=1), axis=2), 0.013, rtol=1e-12)
    if nv > 1:
        np.testing.assert_allclose(np.linalg.norm(np.diff(grid, axis=0), axis=2), 0.029, rtol=1e-12)
    np.testing.assert_allclose(off.sum(axis=0), 0.0, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(alphas, betas, st.integers(1, 6), st.integers(1, 6))
def test_rx_positions_average_to_center(alpha, beta, nh, nv):
    rx = ArrayConfig(nh, nv, 0.05, 0.02)
    s = Scenario(rx, rx, rx_pose=PanelPose(alpha, beta), rx_center=(12.0, -3.0, 7.5))
    np.testing.assert_allclose(antenna_positions(s, "rx").mean(axis=0), s.rx_center, atol=1e-12)
