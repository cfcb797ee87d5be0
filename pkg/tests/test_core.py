import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conefield.core import (ContractError, Dimension, DimensionError, DomainError, LightSegment,
                            PoleConfig, min_pole_gap, sphere_area)


@pytest.mark.parametrize("N, expected", [(2, 2 * math.pi), (3, 4 * math.pi), (4, 2 * math.pi**2)])
def test_sphere_area_values(N, expected):
    assert sphere_area(N) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("N", range(2, 9))
def test_sphere_area_times_cN_is_one(N):
    assert abs(sphere_area(N) * Dimension(N).c_N - 1.0) < 1e-14


def test_dimension_rejects_one():
    with pytest.raises(DimensionError):
        Dimension(1)


def test_min_gap_examples():
    assert min_pole_gap(PoleConfig(2, [((0, 0), 1), ((1, 0), 1)], 4)).gap == 1.0
    assert min_pole_gap(PoleConfig(2, [((0, 0), 1), ((3, 4), 1)], 11)).gap == 5.0
    g = min_pole_gap(PoleConfig(2, [((0, 0), 1), ((1, 0), 1), ((0, 2), -1)], 5))
    assert g.gap == 1.0 and g.cross_sign == 2.0


def test_min_gap_needs_two_poles():
    with pytest.raises(ContractError):
        min_pole_gap(PoleConfig(2, [((0, 0), 1)], 1))


@pytest.mark.parametrize("poles, R0", [
    ([((0, 0), 0.0)], 1.0),            # zero weight
    ([((0, 0), math.nan)], 1.0),       # non-finite weight
    ([((0.6, 0), 1.0)], 1.0),          # outside B_(R0/2)
    ([((0, 0), 1.0), ((0, 0), 2.0)], 1.0),  # duplicate
    ([((0, 0), 1.0)], 0.0),            # R0 <= 0
])
def test_pole_config_rejects(poles, R0):
    with pytest.raises(DomainError):
        PoleConfig(2, poles, R0)


def test_pole_config_dimension_checked():
    with pytest.raises(DimensionError):
        PoleConfig(3, [((0, 0), 1.0)], 1.0)


def test_sign_split():
    cfg = PoleConfig(2, [((0, 0), 2.0), ((0.1, 0), -0.5), ((0.2, 0), 1.0)], 1.0)
    assert cfg.total_positive == 3.0 and cfg.total_negative == 0.5
    assert cfg.total_mass == 2.5 and cfg.mixed
    assert len(cfg.truncated(2).poles) == 2
    assert cfg.scaled(2.0).total_mass == 5.0


def test_light_segment_validation():
    LightSegment((0, 0), (1, 0), 1.0)
    with pytest.raises(ContractError):
        LightSegment((0, 0), (0, 0), 1.0)
    with pytest.raises(ContractError):
        LightSegment((0, 0), (1, 0), 1.5)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(-0.45, 0.45), st.floats(-0.45, 0.45)),
                min_size=2, max_size=6, unique=True), st.randoms(use_true_random=False))
def test_min_gap_permutation_invariant(points, rnd):
    pts = np.array(points)
    d = np.linalg.norm(pts[:, None] - pts[None], axis=-1) + np.eye(len(pts))
    if d.min() < 1e-6:
        return
    signs = [1.0 if i % 2 == 0 else -1.0 for i in range(len(points))]
    poles = list(zip(points, signs))
    base = min_pole_gap(PoleConfig(2, poles, 2.0))
    rnd.shuffle(poles)
    perm = min_pole_gap(PoleConfig(2, poles, 2.0))
    assert base.gap == perm.gap and base.cross_sign == perm.cross_sign
