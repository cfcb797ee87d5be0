import json
import math

import numpy as np
import pytest
from scipy.optimize import brentq

from conefield.core import ContractError, Dimension, DomainError, PoleConfig
from conefield.mesh import ScalarField
from conefield.mollifier import SourceField
from conefield.radial import fundamental_profile, phi_nd
from conefield.solver import SolverConfig, solve_dirac_ladder
from conefield.verify import (Check, VerifyReport, cone_heights, farfield_fit,
                              geometric_weights, infinite_cone_truncation, lightcone_indicator,
                              lightlike_segment_scan, mixed_mass_gate, rearrangement_check,
                              residue, sandwich_check, spiral_poles, verify_radial,
                              verify_solution)


def test_residue_single_pole(single_pole_runs):
    _, _, runs = single_pole_runs
    res = residue(runs[128].field, [1.0, 2.0, 3.0])
    assert res.mean == pytest.approx(-1.0, rel=0.03)
    assert res.spread <= 0.03


def test_residue_mixed(mixed_run):
    _, _, run = mixed_run
    assert abs(residue(run.field, [3.0, 4.0, 5.0]).mean) <= 0.05


def test_farfield_exact_profiles():
    prof = fundamental_profile(3, 2.0, 120.0)
    assert farfield_fit(prof, 3, (10, 100)).coefficient == pytest.approx(Dimension(3).c_N * 2.0, rel=5e-3)
    prof2 = fundamental_profile(2, 2.0, 120.0)
    ff = farfield_fit(prof2, 2, (10, 100))
    assert ff.coefficient == pytest.approx(2.0 / (2 * math.pi), rel=5e-3)
    # -c ln(2r/c) expansion fixes the offset
    c = 2.0 / (2 * math.pi)
    assert ff.offset - float(prof2.values[-1]) == pytest.approx(-c * math.log(2 / c) + c * math.log(2 * 120 / c), rel=1e-3)
    with pytest.raises(ContractError):
        farfield_fit(prof, 3, (10.0, 10.001))


def test_farfield_residual_shrinks_outward():
    prof = fundamental_profile(3, 5.0, 400.0)
    near = farfield_fit(prof, 3, (2, 10)).residual
    far = farfield_fit(prof, 3, (20, 100)).residual
    assert far < near


def test_farfield_two_poles(two_pole_run):
    _, _, run = two_pole_run
    assert farfield_fit(run.field, 2, (5, 7)).coefficient == pytest.approx(3 / (2 * math.pi), rel=0.05)


def test_cone_heights_symmetric_equal_poles():
    cfg = PoleConfig(2, [((0.5, 0.0), 1.0), ((-0.5, 0.0), 1.0)], 2.0)
    run = solve_dirac_ladder(cfg, 5.0, h=5.0 / 24, cfg=SolverConfig(ladder=(4, 8, 16)))
    ch = cone_heights(run.field, cfg)
    assert abs(ch.heights[0] - ch.heights[1]) <= 1e-10
    assert ch.min_margin == pytest.approx(1.0, abs=1e-10)


def test_cone_heights_asymmetric(asymmetric_run):
    cfg, _, run = asymmetric_run
    ch = cone_heights(run.field, cfg)
    assert ch.separated and ch.heights[0] > ch.heights[1]


def test_cone_heights_single_pole_vacuous(single_pole_runs):
    cfg, _, runs = single_pole_runs
    ch = cone_heights(runs[64].field, cfg)
    assert ch.separated and ch.margins == {}


def test_cone_heights_needs_pole_nodes(two_pole_run):
    _, _, run = two_pole_run
    other = PoleConfig(2, [((0.123, 0.0), 1.0)], 2.0)
    with pytest.raises(ContractError):
        cone_heights(run.field, other)


def test_lightcone_indicator(two_pole_run):
    cfg, _, run = two_pole_run
    for p in cfg.points:
        ind = lightcone_indicator(run, p)
        assert ind.values[-1] >= 0.9
        assert ind.values[0] < ind.values[-1]
        # cells away from the poles stay uniformly below the light cone
        assert max(ind.far_values) < 0.95


def test_segment_scan(two_pole_run):
    cfg, _, run = two_pole_run
    assert lightlike_segment_scan(run.field, cfg) == []
    mesh = run.field.mesh
    ramp = ScalarField.from_function(mesh, lambda p: 0.99 * p[:, 0])
    found = lightlike_segment_scan(ramp, cfg)
    assert found and all(s.slope >= 0.98 for s in found)


def test_sandwich_single_pole_tight(single_pole_runs):
    cfg, R, runs = single_pole_runs
    lo, hi = sandwich_check(runs[128].field, cfg, R)
    assert lo.passed and hi.passed
    assert abs(lo.margin) <= lo.tol and abs(hi.margin) <= hi.tol


def test_sandwich_two_unit_poles():
    cfg = PoleConfig(2, [((-0.5, 0.0), 1.0), ((0.5, 0.0), 1.0)], 2.0)
    run = solve_dirac_ladder(cfg, 8.0, h=8.0 / 48)
    lo, hi = sandwich_check(run.field, cfg, 8.0)
    assert lo.passed and hi.passed and hi.margin > 0


def test_sandwich_radial_upper():
    from conefield.radial import RadialSource, radial_dirichlet

    cfg = PoleConfig(3, [((0, 0, 0), 1.0)], 1.0)
    prof = radial_dirichlet(3, RadialSource.mollified(3, 1.0, 64), 10.0)
    _, hi = sandwich_check(prof, cfg, 10.0)
    assert hi.passed and prof.values.max() <= phi_nd(3, 1.0, 0.0)


def test_sandwich_skips_negative(mixed_run):
    cfg, R, run = mixed_run
    assert all(c.passed is None for c in sandwich_check(run.field, cfg, R))


def test_rearrangement_examples():
    radial = rearrangement_check(SourceField(2, [[0.0, 0.0]], [1.0], 4), 4.0, 4.0 / 32)
    assert radial.check.passed and abs(radial.excess) <= 0.02
    two = rearrangement_check(SourceField(2, [[-0.6, 0.0], [0.6, 0.0]], [1.0, 1.0], 4), 4.0, 4.0 / 32)
    assert two.check.passed and two.u_fstar[0] > two.u_star[0]
    zero = rearrangement_check(SourceField(2, [[0.0, 0.0]], [0.0], 4), 4.0, 4.0 / 32)
    assert zero.check.passed and zero.check.margin == 0.0
    with pytest.raises(DomainError):
        rearrangement_check(SourceField(2, [[0.0, 0.0]], [-1.0], 4), 4.0, 4.0 / 32)


def _alpha_for_phi0(target):
    return brentq(lambda a: phi_nd(3, a, 0.0) - target, 1e-3, 1e3, xtol=1e-14)


def test_mixed_gate_examples():
    small = PoleConfig(3, [((-1, 0, 0), 1e-3), ((1, 0, 0), -1e-3)], 3.0)
    g = mixed_mass_gate(small)
    assert g.applicable and g.admissible and g.l0 == 2.0
    a = _alpha_for_phi0(1.5)
    big = PoleConfig(3, [((-1, 0, 0), a), ((1, 0, 0), -a)], 3.0)
    g = mixed_mass_gate(big)
    assert g.applicable and not g.admissible
    assert g.margin == pytest.approx(-1.0, abs=1e-9)
    planar = PoleConfig(2, [((-1, 0), 1.0), ((1, 0), -1.0)], 3.0)
    assert not mixed_mass_gate(planar).applicable
    assert not mixed_mass_gate(PoleConfig(3, [((0, 0, 0), 1.0)], 1.0)).applicable
    # planar layout tested with N = 3 radial profiles
    assert mixed_mass_gate(planar, dim=3).admissible


def test_mixed_gate_sharper_condition():
    cfg = PoleConfig(3, [((-1, 0, 0), 0.5), ((1, 0, 0), -0.5)], 3.0)
    up = phi_nd(3, 0.5, 0.0)
    g = mixed_mass_gate(cfg, fields=([up], [up]))
    assert g.sharper_margin == pytest.approx(2.0 - 2 * up)
    assert "interpretation" in g.sharper_note


def test_truncation_rejects_divergent():
    with pytest.raises(DomainError):
        infinite_cone_truncation(np.ones(8), spiral_poles(8), [2, 4, 8], 5.0, 2.0)


def test_truncation_one_vs_two():
    w = geometric_weights(0.5, 0.5, 2)
    rep = infinite_cone_truncation(w, spiral_poles(2), [1, 2], 5.0, 2.0, h=5.0 / 32)
    c = w[1] / (2 * math.pi)
    bound = c * math.asinh(10.0 / c)  # Phi_{2,a2}(0) - Phi_{2,a2}(2R)
    assert rep.deltas[0] <= bound


def test_report_json_stable(two_pole_run):
    cfg, R, run = two_pole_run
    a = verify_solution(run, cfg, R).to_json()
    b = verify_solution(run, cfg, R).to_json()
    assert a == b
    d = json.loads(a)
    assert set(d) == {"checks", "meta"}
    for c in d["checks"]:
        assert set(c) == {"name", "theorem", "pass", "margin", "tol"}


def test_report_rejects_duplicates():
    rep = VerifyReport()
    rep.add(Check("a", "t", True, 1.0, 0.0))
    with pytest.raises(ContractError):
        rep.add(Check("a", "t", True, 1.0, 0.0))


def test_battery_single_pole_all_pass(single_pole_runs):
    cfg, R, runs = single_pole_runs
    rep = verify_solution(runs[128], cfg, R)
    assert rep.all_passed, [c for c in rep.checks if c.passed is False]
    assert rep["mixed_mass_gate"].passed is None


def test_radial_battery_fails_inadmissible_gate():
    a = _alpha_for_phi0(1.5)
    rep = verify_radial(PoleConfig(3, [((-1, 0, 0), a), ((1, 0, 0), -a)], 3.0), 8.0)
    assert rep["mixed_mass_gate"].passed is False and not rep.all_passed
