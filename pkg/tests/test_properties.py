"""Randomized properties: comparison, odd symmetry, spacelikeness, flux."""

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conefield.mesh import ScalarField, boundary_ring_flux, build_mesh
from conefield.mollifier import SourceField
from conefield.radial import RadialSource, phi_2d, radial_dirichlet
from conefield.solver import solve_dirichlet

MESH = build_mesh(2.0, 2.0 / 16)
FLUX_MESH = build_mesh(4.0, 4.0 / 128, refine_at=[(0.0, 0.0)], refine_factor=8)

centers = st.tuples(st.floats(-0.3, 0.3), st.floats(-0.3, 0.3))
bump = st.tuples(centers, st.floats(0.1, 2.0), st.floats(4.0, 8.0))
slow = settings(max_examples=10, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def source(bumps):
    c, w, n = zip(*bumps)
    return SourceField(2, np.array(c), np.array(w), np.array(n))


@slow
@given(st.lists(bump, min_size=1, max_size=3), bump, st.floats(1.0, 2.0))
def test_comparison_principle(bumps, extra, scale):
    small = source(bumps)
    big = source([(c, w * scale, n) for c, w, n in bumps] + [extra])
    u_small = solve_dirichlet(MESH, small).field.values
    u_big = solve_dirichlet(MESH, big).field.values
    assert np.all(u_big >= u_small - 0.02 * np.abs(u_small).max())


@slow
@given(st.lists(bump, min_size=1, max_size=3))
def test_odd_symmetry(bumps):
    src = source(bumps)
    u = solve_dirichlet(MESH, src).field.values
    v = solve_dirichlet(MESH, -src).field.values
    assert np.abs(u + v).max() <= 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 5), st.floats(0.05, 20.0), st.integers(1, 64), st.floats(1.5, 20.0))
def test_radial_profiles_weakly_spacelike(N, alpha, n, R):
    if 2.0 / n >= R:
        return
    prof = radial_dirichlet(N, RadialSource.mollified(N, alpha, n), R)
    assert prof.weakly_spacelike()
    assert np.all(np.diff(prof.values) <= 1e-15)
    assert abs(prof.values[-1]) <= 1e-14


@settings(max_examples=15, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(1.0, 3.0))
def test_flux_of_interpolated_fundamental(alpha, r):
    f = ScalarField.from_function(FLUX_MESH, lambda p: phi_2d(alpha, np.linalg.norm(p, axis=1)))
    flux, skipped = boundary_ring_flux(f, r)
    assert skipped == 0
    assert flux == pytest.approx(-alpha, rel=0.03)
