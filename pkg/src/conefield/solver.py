"""Discrete minimization of the Born-Infeld type energy on a disc.

J(w) = sum_cells area * (1 - sqrt(1 - |grad w|^2)) - <b, w>

with w = 0 on the boundary, where b is the load vector of either a mollified
source g_n (b_i = int g_n phi_i) or of point masses (b_i = sum_j a_j phi_i(p_j)).
Minimization is a damped Newton iteration restricted to |grad w| <= 1 - eps_cap,
with eps_cap decreased along a continuation schedule.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, cg, splu

from .core import ContractError, DomainError, InfeasibleFieldError, PoleConfig
from .mesh import DiscMesh, ScalarField, build_mesh
from .mollifier import SourceField, assemble_source

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    eps_caps: tuple = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
    max_iter: int = 200
    tol_energy: float = 1e-11
    tol_residual: float = 1e-7
    armijo: float = 1e-4
    backtrack: float = 0.5
    stall_iters: int = 3
    ladder: tuple = (4, 8, 16, 32, 64, 128, 256)
    tol_ladder: float = 2e-3  # relative to max(1, sup|u|)

    def __post_init__(self):
        caps = tuple(float(e) for e in self.eps_caps)
        ladder = tuple(int(n) for n in self.ladder)
        if not caps or any(not 0 < e < 1 for e in caps) or any(b >= a for a, b in zip(caps, caps[1:])):
            raise DomainError("eps_caps must be strictly decreasing values in (0, 1)")
        if not ladder or ladder[0] < 1 or any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise DomainError("ladder must be strictly increasing integers >= 1")
        for name in ("tol_energy", "tol_residual", "tol_ladder"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        object.__setattr__(self, "eps_caps", caps)
        object.__setattr__(self, "ladder", ladder)


@dataclass
class LadderLevel:
    n: int
    delta: float
    field: ScalarField
    converged: bool
    iterations: int


@dataclass
class SolveResult:
    field: ScalarField
    energy: float
    max_grad: float
    iterations: int
    converged: bool
    residual: float
    eps_cap: float
    energy_history: list = field(default_factory=list)
    ladder: list = field(default_factory=list)

    @property
    def grad_norm(self) -> np.ndarray:
        return self.field.grad_norm

    @property
    def ladder_history(self):
        return [(lv.n, lv.delta) for lv in self.ladder]


# ---------------------------------------------------------------- load vectors

def _subdivision(level: int):
    """Barycentric quadrature points/weights for a triangle split into 4**level pieces."""
    # 6-point degree-4 rule
    a, b = 0.445948490915965, 0.091576213509771
    wa, wb = 0.223381589678011, 0.109951743655322
    base = np.array([[a, a, 1 - 2 * a], [a, 1 - 2 * a, a], [1 - 2 * a, a, a],
                     [b, b, 1 - 2 * b], [b, 1 - 2 * b, b], [1 - 2 * b, b, b]])
    bw = np.array([wa] * 3 + [wb] * 3)
    tris = [np.eye(3)]
    for _ in range(level):
        nxt = []
        for t in tris:
            m01, m12, m20 = (t[0] + t[1]) / 2, (t[1] + t[2]) / 2, (t[2] + t[0]) / 2
            nxt += [np.array([t[0], m01, m20]), np.array([m01, t[1], m12]),
                    np.array([m20, m12, t[2]]), np.array([m12, m20, m01])]
        tris = nxt
    T = np.array(tris)  # (k, 3 vertices, 3 bary)
    pts = np.einsum("qv,kvb->kqb", base, T).reshape(-1, 3)
    w = np.tile(bw, len(tris)) / len(tris)
    return pts, w


_SUBDIV = {}


def _subdiv(level):
    if level not in _SUBDIV:
        _SUBDIV[level] = _subdivision(level)
    return _SUBDIV[level]


def load_vector(mesh: DiscMesh, source) -> np.ndarray:
    """b_i = int g phi_i for a SourceField, or sum_j a_j phi_i(p_j) for a PoleConfig."""
    if source is None:
        return np.zeros(mesh.n_nodes)
    cache = mesh.__dict__.setdefault("_load_cache", {})
    key = _source_key(source)
    if key in cache:
        return cache[key]
    if isinstance(source, PoleConfig):
        b = _dirac_load(mesh, source)
    elif isinstance(source, SourceField):
        b = _mollified_load(mesh, source)
    else:
        raise ContractError(f"unsupported source type {type(source).__name__}")
    cache[key] = b
    return b


def _source_key(source):
    if isinstance(source, PoleConfig):
        return ("dirac", source.points.tobytes(), source.weights.tobytes())
    return ("moll", source.centers.tobytes(), source.weights.tobytes(), source.ns.tobytes())


def _dirac_load(mesh, cfg):
    b = np.zeros(mesh.n_nodes)
    cells = mesh.locate(cfg.points)
    if np.any(cells < 0):
        raise ContractError("pole outside the mesh")
    lam = mesh.barycentric(cfg.points, cells)
    np.add.at(b, mesh.cells[cells].ravel(), (lam * cfg.weights[:, None]).ravel())
    return b


def _mollified_load(mesh, src: SourceField, max_level: int = 7):
    if src.dim.N != 2:
        raise ContractError("mesh loads need a 2D source")
    b = np.zeros(mesh.n_nodes)
    diam = mesh.cell_diameters
    cent = mesh.centroids
    for c, w, moll in src.terms():
        rho = moll.support
        near = np.nonzero(np.linalg.norm(cent - c, axis=1) <= rho + diam)[0]
        if len(near) == 0:
            continue
        levels = np.clip(np.ceil(np.log2(np.maximum(diam[near] * 8.0 / rho, 1.0))), 0, max_level).astype(int)
        for L in np.unique(levels):
            sel = near[levels == L]
            bary, qw = _subdiv(int(L))
            X = mesh.nodes[mesh.cells[sel]]  # (k, 3, 2)
            xq = np.einsum("qv,kvd->kqd", bary, X)
            vals = w * moll(xq - c) * qw[None, :] * mesh.cell_areas[sel][:, None]  # (k, q)
            contrib = np.einsum("kq,qv->kv", vals, bary)
            np.add.at(b, mesh.cells[sel].ravel(), contrib.ravel())
    return b


# ---------------------------------------------------------------- energy

def _density(g2):
    """1 - sqrt(1 - t), cancellation-free."""
    return g2 / (1.0 + np.sqrt(1.0 - g2))


def _grad_sq(mesh, w):
    g = np.einsum("ck,ckd->cd", w[mesh.cells], mesh.hat_gradients)
    return g, (g * g).sum(axis=1)


def _values(field_or_values):
    return field_or_values.values if isinstance(field_or_values, ScalarField) else np.asarray(field_or_values, float)


def energy(field: ScalarField, source) -> float:
    """Discrete energy; raises InfeasibleFieldError if any cell has |grad w| >= 1."""
    mesh = field.mesh
    w = field.values
    _, g2 = _grad_sq(mesh, w)
    if np.any(g2 >= 1.0):
        raise InfeasibleFieldError(f"{int((g2 >= 1).sum())} cell(s) with |grad w| >= 1")
    b = load_vector(mesh, source)
    return float(np.dot(mesh.cell_areas, _density(g2)) - np.dot(b, w))


def _flux_terms(mesh, w):
    g, g2 = _grad_sq(mesh, w)
    if np.any(g2 >= 1.0):
        raise InfeasibleFieldError(f"{int((g2 >= 1).sum())} cell(s) with |grad w| >= 1")
    s = np.sqrt(1.0 - g2)
    return g, g2, s


def energy_gradient(field: ScalarField, source, interior_only: bool = True) -> np.ndarray:
    """Nodal residual of the discrete weak form: int grad w . grad phi_i / sqrt(1-|grad w|^2) - b_i.

    Boundary entries are zeroed unless ``interior_only`` is False.
    """
    mesh = field.mesh
    g, _, s = _flux_terms(mesh, field.values)
    r = _assemble_residual(mesh, g, s) - load_vector(mesh, source)
    if interior_only:
        r[mesh.boundary_nodes] = 0.0
    return r


def _assemble_residual(mesh, g, s):
    q = (g / s[:, None]) * mesh.cell_areas[:, None]
    loc = np.einsum("cd,ckd->ck", q, mesh.hat_gradients)
    out = np.zeros(mesh.n_nodes)
    np.add.at(out, mesh.cells.ravel(), loc.ravel())
    return out


class _HessianPattern:
    """Fixed CSR pattern of the P1 stiffness structure with Dirichlet rows removed."""

    def __init__(self, mesh: DiscMesh):
        n = mesh.n_nodes
        c = mesh.cells
        rows = np.repeat(c, 3, axis=1).ravel()
        cols = np.tile(c, (1, 3)).ravel()
        bnd = np.zeros(n, dtype=bool)
        bnd[mesh.boundary_nodes] = True
        self.keep = ~(bnd[rows] | bnd[cols])
        rows, cols = rows[self.keep], cols[self.keep]
        bidx = mesh.boundary_nodes
        rows = np.concatenate([rows, bidx])
        cols = np.concatenate([cols, bidx])
        key = rows.astype(np.int64) * n + cols
        uniq, self.inverse = np.unique(key, return_inverse=True)
        r, cc = np.divmod(uniq, n)
        self.indptr = np.searchsorted(r, np.arange(n + 1))
        self.indices = cc.astype(np.int32)
        self.nnz = len(uniq)
        self.n = n
        self.n_bnd = len(bidx)

    def matrix(self, local: np.ndarray) -> sp.csc_matrix:
        vals = np.concatenate([local.ravel()[self.keep], np.ones(self.n_bnd)])
        data = np.bincount(self.inverse, weights=vals, minlength=self.nnz)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n)).tocsc()


def _hessian_local(mesh, g, s):
    # area * B^T (I/s + g g^T / s^3) B, written out to avoid a slow generic contraction
    B = mesh.hat_gradients
    inv_s = 1.0 / s
    a = mesh.cell_areas * inv_s
    bg = B[..., 0] * g[:, None, 0] + B[..., 1] * g[:, None, 1]  # (c, 3)
    BB = B[:, :, None, 0] * B[:, None, :, 0] + B[:, :, None, 1] * B[:, None, :, 1]
    return a[:, None, None] * BB + (a * inv_s * inv_s)[:, None, None] * bg[:, :, None] * bg[:, None, :]


class _NewtonSolver:
    """Direct factorization, reused as a CG preconditioner while it stays effective."""

    def __init__(self, max_cg: int = 25):
        self.lu = None
        self.max_cg = max_cg

    def solve(self, H, rhs):
        if self.lu is not None:
            count = [0]
            M = LinearOperator(H.shape, self.lu.solve)
            x, info = cg(H, rhs, x0=self.lu.solve(rhs), rtol=1e-11, atol=0.0, maxiter=self.max_cg, M=M,
                         callback=lambda _: count.__setitem__(0, count[0] + 1))
            if info == 0 and count[0] < self.max_cg:
                return x
        self.lu = splu(H, permc_spec="MMD_AT_PLUS_A", options=dict(SymmetricMode=True))
        return self.lu.solve(rhs)


def _pattern(mesh):
    if "_hess_pattern" not in mesh.__dict__:
        mesh.__dict__["_hess_pattern"] = _HessianPattern(mesh)
    return mesh.__dict__["_hess_pattern"]


def _max_step(g, dg, rho):
    """Largest t with |g + t dg| <= rho on every cell."""
    a = (dg * dg).sum(axis=1)
    bb = (g * dg).sum(axis=1)
    c = (g * g).sum(axis=1) - rho * rho
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (-bb + np.sqrt(np.maximum(bb * bb - a * c, 0.0))) / a
    t = np.where(a > 0, t, np.inf)
    return float(np.maximum(t, 0.0).min())


def solve_dirichlet(mesh: DiscMesh, source, cfg: SolverConfig | None = None, initial=None) -> SolveResult:
    """Minimize the discrete energy with zero boundary values."""
    cfg = cfg or SolverConfig()
    if isinstance(source, SourceField):
        far = np.linalg.norm(source.centers, axis=1) + source.radii
        if np.any(far >= mesh.R / 2 + 1e-12):
            raise ContractError("source support must lie inside B_(R/2)")
    b = load_vector(mesh, source)
    pat = _pattern(mesh)
    B = mesh.hat_gradients
    areas = mesh.cell_areas

    w = np.zeros(mesh.n_nodes) if initial is None else np.array(_values(initial), dtype=float)
    w[mesh.boundary_nodes] = 0.0
    g, g2 = _grad_sq(mesh, w)
    gmax = float(np.sqrt(g2.max()))
    caps = [e for e in cfg.eps_caps if 1.0 - e > gmax] or [cfg.eps_caps[-1]]
    if gmax >= 1.0 - caps[0]:
        # pull an over-steep warm start back inside the final cap
        w *= (1.0 - caps[0]) / gmax * 0.999
    J = energy(ScalarField(mesh, w), source)
    newton = _NewtonSolver()
    history = [J]
    it = 0
    converged = False
    resid = np.inf
    eps_used = cfg.eps_caps[0]

    for eps in caps:
        rho = 1.0 - eps
        eps_used = eps
        stalled = 0
        stage_done = False
        while it < cfg.max_iter:
            g, g2 = _grad_sq(mesh, w)
            s = np.sqrt(1.0 - g2)
            grad = _assemble_residual(mesh, g, s) - b
            grad[mesh.boundary_nodes] = 0.0
            resid = float(np.abs(grad).max())
            H = pat.matrix(_hessian_local(mesh, g, s))
            d = newton.solve(H, -grad)
            d[mesh.boundary_nodes] = 0.0
            decrement = float(-np.dot(grad, d))
            cap_active = bool(np.sqrt(g2.max()) > rho * (1.0 - 1e-9))
            if decrement / 2 <= cfg.tol_energy or resid <= 1e-3 * cfg.tol_residual:
                if not cap_active:
                    converged = resid <= cfg.tol_residual or decrement / 2 <= cfg.tol_energy
                    stage_done = True
                break
            dg = np.einsum("ck,ckd->cd", d[mesh.cells], B)
            tmax = _max_step(g, dg, rho)
            t = min(1.0, 0.99 * tmax)
            capped = t < 1.0
            slope = float(np.dot(grad, d))
            accepted = False
            while t > 1e-14:
                wt = w + t * d
                _, g2t = _grad_sq(mesh, wt)
                if np.all(g2t < rho * rho):
                    Jt = float(np.dot(areas, _density(g2t)) - np.dot(b, wt))
                    if Jt <= J + cfg.armijo * t * slope:
                        accepted = True
                        break
                t *= cfg.backtrack
            it += 1
            if not accepted:
                break
            gain = J - Jt
            w, J = wt, Jt
            history.append(J)
            stalled = stalled + 1 if (capped and gain <= 1e-3 * max(decrement, 1e-300)) else 0
            if stalled >= cfg.stall_iters:
                break
        if stage_done or it >= cfg.max_iter:
            break

    f = ScalarField(mesh, w)
    logger.debug("solve: %d iterations, energy %.12g, residual %.3g, converged %s", it, J, resid, converged)
    return SolveResult(f, J, float(f.grad_norm.max()), it, converged, resid, eps_used, history)


def default_mesh(cfg: PoleConfig, R: float, h: float | None = None, refine_factor: float = 8.0) -> DiscMesh:
    return build_mesh(R, h or R / 64, refine_at=cfg.points, refine_factor=refine_factor)


def solve_dirac_ladder(poles: PoleConfig, R: float, cfg: SolverConfig | None = None,
                       mesh: DiscMesh | None = None, h: float | None = None,
                       refine_factor: float = 8.0) -> SolveResult:
    """Solve along the mollifier ladder n_1 < n_2 < ..., warm-starting each level."""
    cfg = cfg or SolverConfig()
    if poles.dim.N != 2:
        raise ContractError("grid solves are two-dimensional; use the radial oracle for N >= 3")
    if R <= poles.R0:
        raise DomainError(f"R={R} must exceed R0={poles.R0}")
    if R <= 2 * poles.R0:
        warnings.warn(f"R={R} <= 2*R0; the ball may be too small for the construction", stacklevel=2)
    if mesh is None:
        mesh = default_mesh(poles, R, h, refine_factor)
    elif abs(mesh.R - R) > 1e-12 * R:
        raise ContractError("mesh radius does not match R")
    levels = []
    prev = None
    res = None
    total_it = 0
    for n in cfg.ladder:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            src = assemble_source(poles, n)
        res = solve_dirichlet(mesh, src, cfg, initial=prev)
        total_it += res.iterations
        delta = np.inf if prev is None else float(np.abs(res.field.values - prev.values).max())
        levels.append(LadderLevel(n, delta, res.field, res.converged, res.iterations))
        logger.info("ladder n=%d: delta=%.3e, iterations=%d", n, delta, res.iterations)
        prev = res.field
        tol = cfg.tol_ladder * max(1.0, float(np.abs(res.field.values).max()))
        if delta <= tol:
            break
    res.ladder = levels
    res.iterations = total_it
    res.converged = all(lv.converged for lv in levels) and levels[-1].delta <= tol
    return res


def renormalize_max(result) -> ScalarField:
    f = result.field if isinstance(result, SolveResult) else result
    return ScalarField(f.mesh, f.values - f.values.max())
