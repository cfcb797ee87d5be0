"""Numerical checks of the qualitative results on solved fields."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .core import (ContractError, DomainError, LightSegment, PoleConfig,
                   as_dim, min_pole_gap)
from .mesh import DiscMesh, ScalarField, boundary_ring_flux, build_mesh
from .mollifier import SourceField
from .radial import (RadialProfile, RadialSource, fundamental_profile, phi, phi_nd,
                     radial_dirichlet, radial_grid)
from .solver import SolveResult, SolverConfig, _subdiv, solve_dirac_ladder, solve_dirichlet


@dataclass
class Check:
    name: str
    theorem: str
    passed: bool | None  # None: not applicable / skipped
    margin: float
    tol: float
    note: str = ""

    def to_dict(self):
        return {"name": self.name, "theorem": self.theorem, "pass": self.passed,
                "margin": _finite(self.margin), "tol": _finite(self.tol)}


def _finite(x):
    x = float(x)
    return x if math.isfinite(x) else None


@dataclass
class VerifyReport:
    checks: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, *checks: Check):
        for c in checks:
            if any(c.name == o.name for o in self.checks):
                raise ContractError(f"duplicate check {c.name}")
            self.checks.append(c)

    def __getitem__(self, name) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks if c.passed is not None)

    def to_dict(self):
        notes = {c.name: c.note for c in self.checks if c.note}
        meta = dict(self.meta)
        if notes:
            meta["notes"] = notes
        return {"checks": [c.to_dict() for c in self.checks], "meta": meta}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


# ---------------------------------------------------------------- residue

@dataclass
class Residue:
    mean: float
    spread: float
    values: list
    skipped: list

    @property
    def rel_spread(self) -> float:
        return self.spread / abs(self.mean) if self.mean else math.inf


def residue(f: ScalarField, radii, samples: int = 512) -> Residue:
    """Relativistic flux through several circles; for total mass a the mean is close to -a."""
    vals, skipped = [], []
    for r in radii:
        v, s = boundary_ring_flux(f, r, samples)
        vals.append(v)
        skipped.append(s)
    vals_arr = np.array(vals)
    return Residue(float(vals_arr.mean()), float(vals_arr.max() - vals_arr.min()), vals, skipped)


# ---------------------------------------------------------------- far field

@dataclass
class FarField:
    coefficient: float
    offset: float
    residual: float


def farfield_fit(obj, dim, annulus, rings: int | None = None, samples: int = 256) -> FarField:
    """Least-squares fit u ~ A r^(2-N) + c (N >= 3) or u ~ -A ln r + c (N = 2) on an annulus."""
    dim = as_dim(dim)
    r_in, r_out = map(float, annulus)
    if not 0 < r_in < r_out:
        raise ContractError("annulus must satisfy 0 < r_in < r_out")
    if isinstance(obj, RadialProfile):
        sel = (obj.grid >= r_in) & (obj.grid <= r_out)
        if sel.sum() < 4:
            raise ContractError("annulus too thin: fewer than 4 grid radii")
        r, u = obj.grid[sel], obj.values[sel]
    elif isinstance(obj, ScalarField):
        mesh = obj.mesh
        if r_out > mesh.R - mesh.h:
            raise ContractError("annulus leaves the mesh")
        if rings is None:
            rings = min(16, int((r_out - r_in) / mesh.h) + 1)
        if rings < 4:
            raise ContractError("annulus too thin: fewer than 4 sample rings")
        rr = np.linspace(r_in, r_out, rings)
        th = 2 * math.pi * np.arange(samples) / samples
        r = np.repeat(rr, samples)
        pts = np.column_stack([r * np.cos(np.tile(th, rings)), r * np.sin(np.tile(th, rings))])
        u = obj(pts)
    else:
        raise ContractError("farfield_fit needs a ScalarField or RadialProfile")
    basis = -np.log(r) if dim.N == 2 else r ** (2.0 - dim.N)
    A = np.column_stack([basis, np.ones_like(r)])
    coef, *_ = np.linalg.lstsq(A, u, rcond=None)
    res = float(np.sqrt(np.mean((A @ coef - u) ** 2)))
    return FarField(float(coef[0]), float(coef[1]), res)


def farfield_coefficient_expected(dim, mass: float) -> float:
    """Leading far-field coefficient of a total mass: c_N m/(N-2) for N >= 3, m/(2 pi) for N = 2."""
    dim = as_dim(dim)
    if dim.N == 2:
        return mass / (2 * math.pi)
    return dim.c_N * mass / (dim.N - 2)


# ---------------------------------------------------------------- cone heights

@dataclass
class ConeHeights:
    heights: np.ndarray
    grad_max: np.ndarray
    margins: dict  # (i, j) -> |p_i - p_j| - |lambda_i - lambda_j|

    @property
    def min_margin(self) -> float:
        return min(self.margins.values()) if self.margins else 0.0

    @property
    def separated(self) -> bool:
        return all(m > 0 for m in self.margins.values())


def _pole_node(mesh: DiscMesh, p) -> int:
    hit = np.nonzero((mesh.nodes[:, 0] == p[0]) & (mesh.nodes[:, 1] == p[1]))[0]
    if len(hit) != 1:
        raise ContractError(f"pole {tuple(p)} is not a mesh node")
    return int(hit[0])


def cone_heights(f: ScalarField, cfg: PoleConfig) -> ConeHeights:
    mesh = f.mesh
    nodes = [_pole_node(mesh, p) for p in cfg.points]
    lam = f.values[nodes]
    gmax = np.array([f.grad_norm[mesh.cells_touching(k)].max() for k in nodes])
    pts = cfg.points
    margins = {(i, j): float(np.linalg.norm(pts[i] - pts[j]) - abs(lam[i] - lam[j]))
               for i, j in combinations(range(len(nodes)), 2)}
    return ConeHeights(lam, gmax, margins)


# ---------------------------------------------------------------- light-cone indicator

@dataclass
class ConeIndicator:
    ns: list
    values: list
    far_values: list

    @property
    def increasing(self) -> bool:
        return all(b > a for a, b in zip(self.values, self.values[1:]))


def lightcone_indicator(result: SolveResult, pole, far_radius: float | None = None) -> ConeIndicator:
    """Per ladder level: max |grad u| over cells touching the pole node, and over cells far from all poles."""
    if not result.ladder:
        raise ContractError("ladder history is required")
    mesh = result.field.mesh
    node = _pole_node(mesh, pole)
    touching = mesh.cells_touching(node)
    poles = mesh.refine_points
    if far_radius is None:
        gap = min_gap_points(poles)
        far_radius = 0.25 * min(gap, mesh.R / 4)
    d = np.linalg.norm(mesh.centroids[:, None, :] - poles[None, :, :], axis=-1).min(axis=1)
    far = d > far_radius
    ns, vals, fars = [], [], []
    for lv in result.ladder:
        gn = lv.field.grad_norm
        ns.append(lv.n)
        vals.append(float(gn[touching].max()))
        fars.append(float(gn[far].max()))
    return ConeIndicator(ns, vals, fars)


def min_gap_points(pts) -> float:
    pts = np.asarray(pts)
    if len(pts) < 2:
        return math.inf
    d = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
    d[np.diag_indices(len(pts))] = np.inf
    return float(d.min())


# ---------------------------------------------------------------- lightlike segments

def lightlike_segment_scan(f: ScalarField, cfg: PoleConfig, threshold: float = 0.98,
                           boundary_samples: int = 64) -> list:
    """Pole-pole and pole-boundary chords whose difference quotient reaches ``threshold``."""
    mesh = f.mesh
    pts = cfg.points
    vals = f(pts)
    found = []

    def test(x, y, ux, uy):
        q = abs(ux - uy) / np.linalg.norm(x - y)
        if q >= threshold:
            found.append(LightSegment(tuple(x), tuple(y), float(min(q, 1.0))))

    for i, j in combinations(range(len(pts)), 2):
        test(pts[i], pts[j], vals[i], vals[j])
    bnd = mesh.boundary_nodes
    ang = np.arctan2(mesh.nodes[bnd, 1], mesh.nodes[bnd, 0])
    bnd = bnd[np.argsort(ang)]
    pick = bnd[np.linspace(0, len(bnd), boundary_samples, endpoint=False).astype(int)]
    for i, p in enumerate(pts):
        for k in pick:
            test(p, mesh.nodes[k], vals[i], f.values[k])
    return found


# ---------------------------------------------------------------- sandwich

def sandwich_check(obj, cfg: PoleConfig, R: float, slack: float = 0.02) -> list:
    """Lower bound by single-pole radial solutions and upper bound by the total-mass radial solution."""
    names = ("sandwich_lower", "sandwich_upper")
    theorem = "ball solution: single-pole lower bounds, total-mass upper bound"
    if np.any(cfg.weights < 0):
        return [Check(n, theorem, None, 0.0, 0.0, "skipped: negative weight present") for n in names]
    dim = cfg.dim
    a0 = cfg.total_positive
    if isinstance(obj, RadialProfile):
        if len(cfg.poles) != 1 or np.any(cfg.points[0] != 0):
            raise ContractError("radial profiles support a single pole at the origin")
        x = obj.grid
        u = obj.values
        dists = [x]
    else:
        x = obj.mesh.nodes
        u = obj.values
        dists = [np.linalg.norm(x - p, axis=1) for p in cfg.points]
    sup = float(np.abs(u).max())
    tol = slack * sup
    lower = math.inf
    for d, p, a in zip(dists, cfg.points, cfg.weights):
        Rj = R - float(np.linalg.norm(p))
        inside = d <= Rj
        bound = phi(dim, a, d[inside]) - phi(dim, a, Rj)
        lower = min(lower, float((u[inside] - bound).min()))
    upper_bound = float(phi(dim, a0, 0.0) - phi(dim, a0, R))
    upper = upper_bound - float(u.max())
    return [Check(names[0], theorem, lower >= -tol, lower, tol),
            Check(names[1], theorem, upper >= -tol, upper, tol,
                  f"v_R(0) = {upper_bound:.6g}")]


def max_at_pole_check(f: ScalarField, cfg: PoleConfig) -> Check:
    mesh = f.mesh
    k = int(np.argmax(f.values))
    d = np.linalg.norm(cfg.points[cfg.weights > 0] - mesh.nodes[k], axis=1)
    cells = mesh.cells_touching(k)
    diam = float(mesh.cell_diameters[cells].max())
    margin = diam - float(d.min())
    return Check("max_at_pole", "maximum attained at a positive pole", margin >= 0, margin, diam)


# ---------------------------------------------------------------- rearrangement

def rearrange_samples(values, weights, radii_out, total_area=None):
    """Decreasing radial rearrangement of weighted samples, evaluated at ``radii_out``."""
    order = np.argsort(-values, kind="stable")
    v = values[order]
    w = weights[order]
    # each sample sits at the mid-measure radius of its equal-measure shell
    r = np.sqrt((np.cumsum(w) - 0.5 * w) / math.pi)
    return np.interp(radii_out, r, v, left=v[0], right=0.0)


def cell_samples(f: ScalarField, level: int = 2):
    """Values and area weights of a P1 field at sub-cell quadrature points."""
    bary, qw = _subdiv(level)
    m = f.mesh
    vals = f.values[m.cells] @ bary.T  # (cells, q)
    wts = m.cell_areas[:, None] * qw[None, :]
    return vals.ravel(), wts.ravel()


def rearrange_source(src: SourceField, R: float, spacing: float | None = None):
    """Tabulated f* on a radial grid, from fine Cartesian sampling of the supports."""
    c, rad = src.centers, src.radii
    lo = (c - rad[:, None]).min(axis=0)
    hi = (c + rad[:, None]).max(axis=0)
    spacing = spacing or float(rad.min()) / 150
    xs = np.arange(lo[0] + spacing / 2, hi[0], spacing)
    ys = np.arange(lo[1] + spacing / 2, hi[1], spacing)
    X, Y = np.meshgrid(xs, ys)
    vals = src(np.stack([X.ravel(), Y.ravel()], axis=1))
    vals = vals[vals > 0]
    grid = np.linspace(0.0, R, 4001)
    fstar = rearrange_samples(vals, np.full(len(vals), spacing * spacing), grid)
    return grid, fstar


@dataclass
class RearrangementResult:
    check: Check
    radii: np.ndarray
    u_star: np.ndarray
    u_fstar: np.ndarray
    excess: float  # max (u*_f - u_f*) / sup u_f*, positive means a violation before slack


def rearrangement_check(source: SourceField, R: float, h: float | None = None,
                        cfg: SolverConfig | None = None, slack: float = 0.02,
                        refine_factor: float = 2.0, mesh: DiscMesh | None = None) -> RearrangementResult:
    """Compare the rearranged solution u*_f with the radial solution for the rearranged source."""
    if not source.nonnegative:
        raise DomainError("rearrangement comparison needs a nonnegative source")
    if mesh is None:
        mesh = build_mesh(R, h or R / 64, refine_at=source.centers, refine_factor=refine_factor)
    grid = radial_grid(R, 1024)
    if source.total_mass == 0:
        z = np.zeros_like(grid)
        return RearrangementResult(Check("rearrangement", _REARR, True, 0.0, 0.0), grid, z, z, 0.0)
    res = solve_dirichlet(mesh, source, cfg)
    u_star = rearrange_samples(*cell_samples(res.field), grid)
    rgrid, fstar = rearrange_source(source, R)
    rs = RadialSource.tabulated(2, rgrid, fstar)
    u_fstar = radial_dirichlet(2, rs, R, grid).values
    sup = float(np.abs(u_fstar).max())
    diff = u_fstar - u_star
    margin = float(diff.min())
    tol = slack * sup
    chk = Check("rearrangement", _REARR, margin >= -tol, margin, tol)
    return RearrangementResult(chk, grid, u_star, u_fstar, float(-margin / sup))


_REARR = "rearranged solution below solution of rearranged source"


# ---------------------------------------------------------------- mixed masses

@dataclass
class GateResult:
    applicable: bool
    admissible: bool | None
    margin: float
    l0: float
    lhs: float
    reason: str = ""
    sharper_margin: float | None = None
    sharper_note: str = ""


def mixed_mass_gate(cfg: PoleConfig, dim=None, fields=None) -> GateResult:
    """Admissibility Phi_{N,a0}(0) + Phi_{N,b0}(0) < l0 for mixed-sign configurations, N >= 3.

    ``dim`` overrides the dimension used for the radial solutions, so a planar
    pole layout can be tested with N = 3 radial profiles. ``fields`` may be a
    pair (u_plus, u_minus) of solved positive-mass fields; then the sharper
    pairwise condition u_plus(p) + u_minus(q) < |p - q| is also evaluated.
    """
    N = as_dim(dim if dim is not None else cfg.dim)
    if not cfg.mixed:
        return GateResult(False, None, 0.0, math.nan, math.nan, "needs both positive and negative masses")
    if N.N < 3:
        return GateResult(False, None, 0.0, math.nan, math.nan, "condition is stated for N >= 3")
    l0 = min_pole_gap(cfg).cross_sign
    lhs = phi_nd(N, cfg.total_positive, 0.0) + phi_nd(N, cfg.total_negative, 0.0)
    out = GateResult(True, lhs < l0, l0 - lhs, l0, lhs)
    if fields is not None:
        up, um = fields
        P, Q = cfg.points[cfg.positive], cfg.points[cfg.negative]
        vp = np.atleast_1d(up(P)) if callable(up) else np.asarray(up)
        vq = np.atleast_1d(um(Q)) if callable(um) else np.asarray(um)
        m = min(float(np.linalg.norm(p - q)) - (a + b) for p, a in zip(P, vp) for q, b in zip(Q, vq))
        out.sharper_margin = m
        out.sharper_note = "interpretation: pairwise condition read as u_plus(p) + u_minus(q) < |p - q|"
    return out


# ---------------------------------------------------------------- infinite cones

def geometric_weights(first: float, ratio: float, m: int) -> np.ndarray:
    return first * ratio ** np.arange(m)


def spiral_poles(m: int, r0: float = 0.6, shrink: float = 0.75, turn: float = 2.399963229728653,
                 center=(0.0, 0.0)) -> np.ndarray:
    """Distinct points marching to ``center`` along a golden-angle spiral."""
    j = np.arange(m)
    r = r0 * shrink**j
    return np.asarray(center) + np.column_stack([r * np.cos(turn * (j + 1)), r * np.sin(turn * (j + 1))])


@dataclass
class TruncationReport:
    levels: list
    deltas: list
    residues: list
    coefficients: list
    alpha_inf: float
    radial_coefficients: list

    @property
    def deltas_decreasing(self) -> bool:
        return all(b < a for a, b in zip(self.deltas, self.deltas[1:]))


def _series_total(weights) -> float:
    w = np.asarray(weights, dtype=float)
    if np.any(w <= 0):
        raise DomainError("infinite-cone weights must be positive")
    q = w[1:] / w[:-1]
    q = q[len(q) // 2:]
    if len(q) == 0 or q.max() >= 1.0:
        raise DomainError("weight series is not summable (ratio test fails)")
    qq = float(q.max())
    return float(w.sum() + w[-1] * qq / (1.0 - qq))


def infinite_cone_truncation(weights, points, levels, R: float, R0: float, h: float | None = None,
                             cfg: SolverConfig | None = None, alpha_inf: float | None = None,
                             radii=None, refine_factor: float = 4.0) -> TruncationReport:
    """Solve with the first m poles for each m in ``levels`` on a shared mesh."""
    weights = np.asarray(weights, dtype=float)
    levels = sorted(int(m) for m in levels)
    est = _series_total(weights)
    alpha_inf = est if alpha_inf is None else float(alpha_inf)
    pts = np.asarray(points, dtype=float)[: levels[-1]]
    full = PoleConfig(2, list(zip(pts, weights[: levels[-1]])), R0)
    mesh = build_mesh(R, h or R / 48, refine_at=pts, refine_factor=refine_factor)
    if radii is None:
        inner = float(np.linalg.norm(pts, axis=1).max()) + 2 * mesh.h
        radii = np.linspace(inner + 0.25 * (R - inner), R - 0.25 * (R - inner), 3)
    prev = None
    deltas, residues, coefs, radial = [], [], [], []
    for m in levels:
        sub = full.truncated(m)
        res = solve_dirac_ladder(sub, R, cfg, mesh=mesh)
        if prev is not None:
            deltas.append(float(np.abs(res.field.values - prev).max()))
        prev = res.field.values
        residues.append(residue(res.field, radii).mean)
        r_out = R - 2 * mesh.h
        coefs.append(farfield_fit(res.field, 2, (0.5 * (radii[-1] + r_out) - 0.5, r_out)).coefficient)
        mass = float(weights[:m].sum())
        prof = fundamental_profile(3, mass, 200.0)
        radial.append(farfield_fit(prof, 3, (20.0, 200.0)).coefficient)
    return TruncationReport(levels, deltas, residues, coefs, alpha_inf, radial)


# ---------------------------------------------------------------- batteries

def default_residue_radii(cfg: PoleConfig, mesh: DiscMesh, count: int = 3) -> np.ndarray:
    inner = float(np.linalg.norm(cfg.points, axis=1).max()) + 2 * mesh.h
    outer = mesh.R - 2 * mesh.h
    return inner + (outer - inner) * np.linspace(0.3, 0.7, count)


def verify_solution(result: SolveResult, cfg: PoleConfig, R: float,
                    flux_tol: float = 0.03, farfield_tol: float = 0.05,
                    indicator_min: float = 0.9, segment_threshold: float = 0.98) -> VerifyReport:
    """Full battery for a planar ladder solve."""
    rep = VerifyReport(meta={"dim": cfg.dim.N, "R": R, "poles": len(cfg.poles),
                             "total_mass": cfg.total_mass})
    f = result.field
    mesh = f.mesh
    last = float(result.ladder[-1].delta) if result.ladder else 0.0
    rep.add(Check("converged", "ladder convergence", bool(result.converged), -last, 0.0,
                  "margin is minus the final ladder delta"))
    scale = float(np.abs(cfg.weights).sum())
    radii = default_residue_radii(cfg, mesh)
    res = residue(f, radii)
    err = abs(res.mean + cfg.total_mass)
    rep.add(Check("residue", "flux through spheres equals minus the enclosed mass",
                  err <= flux_tol * scale, flux_tol * scale - err, flux_tol * scale,
                  f"mean {res.mean:.6g} over radii {np.round(radii, 4).tolist()}"))
    rep.add(Check("residue_spread", "flux independent of the sphere",
                  res.spread <= flux_tol * scale, flux_tol * scale - res.spread, flux_tol * scale))
    outer = R - 2 * mesh.h
    ff = farfield_fit(f, 2, (outer - 0.25 * R, outer))
    want = farfield_coefficient_expected(2, cfg.total_mass)
    ftol = farfield_tol * scale / (2 * math.pi)
    rep.add(Check("farfield", "logarithmic far field with coefficient total mass / 2 pi",
                  abs(ff.coefficient - want) <= ftol, ftol - abs(ff.coefficient - want), ftol,
                  f"coefficient {ff.coefficient:.6g}, expected {want:.6g}"))
    for c in sandwich_check(f, cfg, R):
        rep.add(c)
    if np.all(cfg.weights > 0):
        rep.add(max_at_pole_check(f, cfg))
    else:
        rep.add(Check("max_at_pole", "maximum attained at a positive pole", None, 0.0, 0.0,
                      "skipped: negative weight present"))
    ch = cone_heights(f, cfg)
    rep.meta["heights"] = ch.heights.tolist()
    rep.add(Check("height_separation", "cone heights strictly separated: |l_i - l_j| < |p_i - p_j|",
                  ch.separated, ch.min_margin, 0.0,
                  "vacuous: single pole" if len(cfg.poles) < 2 else ""))
    worst = math.inf
    for p in cfg.points:
        ind = lightcone_indicator(result, p)
        worst = min(worst, ind.values[-1])
    rep.add(Check("lightcone", "light-cone singularity at every pole", worst >= indicator_min,
                  worst - indicator_min, indicator_min))
    segs = lightlike_segment_scan(f, cfg, segment_threshold)
    rep.add(Check("no_lightlike_segments", "no lightlike segments between poles or to the boundary",
                  not segs, -float(len(segs)), 0.0, f"threshold {segment_threshold}"))
    gate = mixed_mass_gate(cfg)
    rep.add(Check("mixed_mass_gate", "admissibility of mixed masses", None, 0.0, 0.0, gate.reason))
    return rep


def radial_ladder(dim, alpha: float, R: float, ladder=(4, 8, 16, 32, 64, 128, 256)) -> list:
    """Radial mollified solutions v_{alpha,n,R}, one per ladder level."""
    return [radial_dirichlet(dim, RadialSource.mollified(dim, alpha, n), R) for n in ladder]


def mollified_center_bounds(dim, alpha: float, R: float, n: int) -> tuple:
    """(lower, value, upper) for v_{alpha,n,R}(0) against Phi(0) - 2/n - c_N alpha R^(2-N)/(N-2) and Phi(0)."""
    dim = as_dim(dim)
    v = radial_dirichlet(dim, RadialSource.mollified(dim, alpha, n), R)
    p0 = phi_nd(dim, alpha, 0.0)
    lower = p0 - 2.0 / n - dim.c_N * alpha * R ** (2 - dim.N) / (dim.N - 2)
    return lower, float(v.values[0]), p0


def verify_radial(cfg: PoleConfig, R: float, ladder=(4, 16, 64)) -> VerifyReport:
    """Battery for N >= 3: gate plus radial-oracle checks on the positive mass."""
    dim = cfg.dim
    rep = VerifyReport(meta={"dim": dim.N, "R": R, "poles": len(cfg.poles),
                             "total_mass": cfg.total_mass, "radial_only": True})
    gate = mixed_mass_gate(cfg)
    if gate.applicable:
        rep.add(Check("mixed_mass_gate", "admissibility of mixed masses", bool(gate.admissible),
                      gate.margin, 0.0, f"Phi(0) sum {gate.lhs:.6g} vs l0 {gate.l0:.6g}"))
    else:
        rep.add(Check("mixed_mass_gate", "admissibility of mixed masses", None, 0.0, 0.0, gate.reason))
    a0 = cfg.total_positive
    if a0 <= 0:
        return rep
    worst_lo, worst_hi = math.inf, math.inf
    for n in ladder:
        lo, v, hi = mollified_center_bounds(dim, a0, R, n)
        worst_lo, worst_hi = min(worst_lo, v - lo), min(worst_hi, hi - v)
    rep.add(Check("radial_lower", "mollified radial value at 0 above Phi(0) - 2/n - decay term",
                  worst_lo > 0, worst_lo, 0.0))
    rep.add(Check("radial_upper", "maximum bounded by Phi(0)", worst_hi > 0, worst_hi, 0.0))
    prof = fundamental_profile(dim, a0, 200.0)
    ff = farfield_fit(prof, dim, (20.0, 200.0))
    want = farfield_coefficient_expected(dim, a0)
    err = abs(ff.coefficient - want)
    rep.add(Check("farfield", "decay with coefficient c_N alpha / (N - 2)", err <= 0.05 * want,
                  0.05 * want - err, 0.05 * want))
    return rep
