"""Triangulated disc B_R with piecewise-linear fields."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import Delaunay, cKDTree

from .core import ContractError, DomainError, LocationError

_GOLDEN = 0.5 * (math.sqrt(5.0) - 1.0)
_SQRT2F = math.sqrt(2.0) - 1.0


def _ring(center, radius, count, phase, sign_pair=True):
    """``count`` (even) points on a circle; the set is closed under v -> -v about ``center``."""
    half = count // 2
    theta = 2.0 * math.pi * (np.arange(half) + phase) / count
    v = radius * np.column_stack([np.cos(theta), np.sin(theta)])
    return np.vstack([center + v, center - v])


def _even_count(radius, spacing):
    return 2 * max(3, int(round(math.pi * radius / spacing)))


def _zone_rings(h, refine_factor, growth=1.25):
    """Radii and spacings of the local rings around a refinement point."""
    hf = h / refine_factor
    radii, spacing = [], []
    rho = 0.0
    fine_radius = 4.0 * h
    s = hf
    while True:
        rho += s
        radii.append(rho)
        spacing.append(s)
        if rho >= fine_radius - 1e-12 * h:
            if s >= h:
                break
            s = min(h, growth * s)
    return np.array(radii), np.array(spacing)


@dataclass
class DiscMesh:
    R: float
    h: float
    nodes: np.ndarray
    cells: np.ndarray
    boundary_nodes: np.ndarray
    refine_points: np.ndarray
    refine_factor: float
    pole_nodes: np.ndarray
    _tri: Delaunay = field(repr=False, default=None)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    @cached_property
    def cell_areas(self) -> np.ndarray:
        p = self.nodes[self.cells]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    @cached_property
    def hat_gradients(self) -> np.ndarray:
        """(n_cells, 3, 2): gradient of each vertex hat function on each cell."""
        p = self.nodes[self.cells]
        x, y = p[..., 0], p[..., 1]
        two_a = 2.0 * self.cell_areas
        gx = np.column_stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]])
        gy = np.column_stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]])
        return np.stack([gx, gy], axis=-1) / two_a[:, None, None]

    @cached_property
    def interior_nodes(self) -> np.ndarray:
        mask = np.ones(self.n_nodes, dtype=bool)
        mask[self.boundary_nodes] = False
        return np.nonzero(mask)[0]

    @cached_property
    def lumped_areas(self) -> np.ndarray:
        out = np.zeros(self.n_nodes)
        np.add.at(out, self.cells.ravel(), np.repeat(self.cell_areas / 3.0, 3))
        return out

    @cached_property
    def centroids(self) -> np.ndarray:
        return self.nodes[self.cells].mean(axis=1)

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        p = self.nodes[self.cells]
        return np.linalg.norm(p - np.roll(p, -1, axis=1), axis=-1)

    @cached_property
    def cell_diameters(self) -> np.ndarray:
        return self.edge_lengths.max(axis=1)

    @property
    def area(self) -> float:
        return float(self.cell_areas.sum())

    def locate(self, points) -> np.ndarray:
        """Containing cell index per point, -1 outside."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return self._tri.find_simplex(pts)

    def barycentric(self, points, cells) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        p = self.nodes[self.cells[cells]]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        dp = pts - p[:, 0]
        det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        l1 = (dp[:, 0] * d2[:, 1] - dp[:, 1] * d2[:, 0]) / det
        l2 = (d1[:, 0] * dp[:, 1] - d1[:, 1] * dp[:, 0]) / det
        return np.column_stack([1.0 - l1 - l2, l1, l2])

    def cells_touching(self, node: int) -> np.ndarray:
        return np.nonzero((self.cells == node).any(axis=1))[0]


def build_mesh(R: float, h: float, refine_at=(), refine_factor: float = 4.0) -> DiscMesh:
    """Polar-ring point layout on B_R, locally refined around ``refine_at``, Delaunay-triangulated.

    Every refinement point becomes a mesh node. The layout is closed under
    x -> -x whenever the refinement set is, so point-symmetric pole
    configurations get point-symmetric meshes.
    """
    R, h = float(R), float(h)
    if not 0 < h < R:
        raise DomainError(f"need 0 < h < R, got h={h}, R={R}")
    if refine_factor < 1:
        raise DomainError("refine_factor must be >= 1")
    refine = np.asarray(refine_at, dtype=float).reshape(-1, 2)
    if len(refine) and np.any(np.linalg.norm(refine, axis=1) >= R / 2):
        raise DomainError("refinement points must lie inside B_(R/2)")
    if len(refine) > 1:
        d = np.linalg.norm(refine[:, None] - refine[None], axis=-1) + np.eye(len(refine)) * R
        if d.min() < h / refine_factor:
            raise DomainError(f"refinement points {d.min():.3g} apart; need at least h/refine_factor")

    K = max(2, math.ceil(R / h - 1e-9))
    pts, spacing = [np.zeros((1, 2))], [h]
    for k in range(1, K + 1):
        r = R * k / K
        ring = _ring(np.zeros(2), r, _even_count(r, h), (k * _GOLDEN) % 1.0)
        pts.append(ring)
        spacing.append(np.full(len(ring), h))
    n_boundary = len(pts[-1])
    bg = np.vstack(pts)
    bg_s = np.concatenate([np.atleast_1d(s) for s in spacing])
    is_boundary = np.zeros(len(bg), dtype=bool)
    is_boundary[-n_boundary:] = True
    # keep boundary nodes exactly on the circle
    bnd = bg[is_boundary]
    bg[is_boundary] = R * bnd / np.linalg.norm(bnd, axis=1)[:, None]

    radii, sp = _zone_rings(h, refine_factor)
    zone_outer = radii[-1]
    keep = np.ones(len(bg), dtype=bool)
    for p in refine:
        d = np.linalg.norm(bg - p, axis=1)
        keep &= (d >= zone_outer + 0.5 * h) | is_boundary
    all_pts = [bg[keep]]
    all_s = [bg_s[keep]]
    all_owner = [np.full(keep.sum(), -1)]
    all_rho = [np.full(keep.sum(), np.inf)]
    for i, p in enumerate(refine):
        z = [p[None, :]]
        zs = [np.array([sp[0]])]
        zr = [np.array([0.0])]
        for j, (rho, s) in enumerate(zip(radii, sp), start=1):
            ring = _ring(p, rho, _even_count(rho, s), (j * _SQRT2F) % 1.0)
            z.append(ring)
            zs.append(np.full(len(ring), s))
            zr.append(np.full(len(ring), rho))
        z, zs, zr = np.vstack(z), np.concatenate(zs), np.concatenate(zr)
        ok = np.linalg.norm(z, axis=1) <= R - 0.5 * zs
        if len(refine) > 1:
            dist_all = np.linalg.norm(z[:, None, :] - refine[None, :, :], axis=-1)
            # owned by the nearest refinement point
            ok &= dist_all.min(axis=1) >= zr - 1e-9 * h
            ok[0] = True
        all_pts.append(z[ok])
        all_s.append(zs[ok])
        all_owner.append(np.full(ok.sum(), i))
        all_rho.append(zr[ok])

    P = np.vstack(all_pts)
    S = np.concatenate(all_s)
    owner = np.concatenate(all_owner)
    rho = np.concatenate(all_rho)
    boundary_flag = np.zeros(len(P), dtype=bool)
    boundary_flag[: keep.sum()] = is_boundary[keep]
    P, S, boundary_flag = _thin(P, S, rho, owner, boundary_flag)

    tri = Delaunay(P)
    cells = tri.simplices.astype(np.int64)
    p = P[cells]
    det = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0])
    flip = det < 0
    cells[flip] = cells[flip][:, [0, 2, 1]]
    if np.any(np.abs(det) <= 1e-14 * h * h):
        raise ContractError("triangulation produced a degenerate cell")
    pole_nodes = np.array([_exact_node(P, q) for q in refine], dtype=np.int64)
    return DiscMesh(R, h, P, cells, np.nonzero(boundary_flag)[0], refine, float(refine_factor),
                    pole_nodes, tri)


def _exact_node(P, q):
    hit = np.nonzero((P[:, 0] == q[0]) & (P[:, 1] == q[1]))[0]
    if len(hit) != 1:
        raise ContractError(f"refinement point {q} is not a unique mesh node")
    return int(hit[0])


def _thin(P, S, rho, owner, boundary, frac=0.45):
    """Drop points closer than frac*spacing to a higher-priority point."""
    tree = cKDTree(P)
    pairs = tree.query_pairs(frac * S.max(), output_type="ndarray")
    if len(pairs) == 0:
        return P, S, boundary
    i, j = pairs[:, 0], pairs[:, 1]
    d = np.linalg.norm(P[i] - P[j], axis=1)
    close = d < frac * np.minimum(S[i], S[j])
    i, j = i[close], j[close]
    if len(i) == 0:
        return P, S, boundary
    # priority: boundary first, then finer spacing, then nearer to its refinement point;
    # remaining ties use keys that are even under x -> -x to keep symmetric layouts symmetric
    r2 = np.round((P * P).sum(axis=1), 12)
    xy = np.round(P[:, 0] * P[:, 1], 12)
    order = np.lexsort((xy, r2, np.round(rho, 12), S, ~boundary))
    rank = np.empty(len(P), dtype=np.int64)
    rank[order] = np.arange(len(P))
    lo = np.where(rank[i] < rank[j], i, j)
    hi = np.where(rank[i] < rank[j], j, i)
    conflicts = {}
    for a, b in zip(lo, hi):
        conflicts.setdefault(int(a), []).append(int(b))
    dropped = np.zeros(len(P), dtype=bool)
    for a in sorted(conflicts, key=lambda k: rank[k]):
        if dropped[a]:
            continue
        dropped[conflicts[a]] = True
    keep = ~dropped
    return P[keep], S[keep], boundary[keep]


@dataclass
class ScalarField:
    mesh: DiscMesh
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.mesh.n_nodes,):
            raise ContractError("field size does not match mesh")

    @cached_property
    def grad(self) -> np.ndarray:
        return cell_gradient(self)

    @cached_property
    def grad_norm(self) -> np.ndarray:
        return np.linalg.norm(self.grad, axis=1)

    def nodal_gradient(self) -> np.ndarray:
        """Area-weighted average of adjacent cell gradients at each node."""
        m = self.mesh
        w = np.repeat(m.cell_areas, 3)
        acc = np.zeros((m.n_nodes, 2))
        np.add.at(acc, m.cells.ravel(), np.repeat(self.grad, 3, axis=0) * w[:, None])
        return acc / (3.0 * m.lumped_areas)[:, None]

    def __call__(self, points):
        return interpolate(self, points)

    @classmethod
    def from_function(cls, mesh: DiscMesh, f):
        return cls(mesh, f(mesh.nodes))


def cell_gradient(f: ScalarField) -> np.ndarray:
    m = f.mesh
    return np.einsum("ck,ckd->cd", f.values[m.cells], m.hat_gradients)


def integrate(obj, mesh: DiscMesh | None = None) -> float:
    """Integral of a nodal ScalarField (exact for P1) or of cellwise constants."""
    if isinstance(obj, ScalarField):
        m = obj.mesh
        return float(np.dot(m.cell_areas, obj.values[m.cells].mean(axis=1)))
    vals = np.asarray(obj, dtype=float)
    if mesh is None or vals.shape != (mesh.n_cells,):
        raise ContractError("cellwise values must have one entry per cell")
    return float(np.dot(mesh.cell_areas, vals))


def interpolate(f: ScalarField, points):
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    m = f.mesh
    cells = m.locate(pts)
    if np.any(cells < 0):
        raise LocationError(f"{int((cells < 0).sum())} point(s) outside the mesh")
    lam = m.barycentric(pts, cells)
    out = (lam * f.values[m.cells[cells]]).sum(axis=1)
    return float(out[0]) if single else out


def boundary_ring_flux(f: ScalarField, r: float, samples: int = 512):
    """Outward relativistic flux through |x| = r from per-cell gradients.

    Returns (flux, skipped) where ``skipped`` counts samples that fell outside
    the mesh or on a cell with |grad u| >= 1.
    """
    m = f.mesh
    inner = float(np.linalg.norm(m.refine_points, axis=1).max()) if len(m.refine_points) else 0.0
    if not inner + 2 * m.h < r < m.R - 2 * m.h:
        raise ContractError(f"ring radius {r} must lie in ({inner + 2 * m.h:.4g}, {m.R - 2 * m.h:.4g})")
    if samples < 256:
        raise ContractError("use at least 256 samples")
    th = 2.0 * math.pi * np.arange(samples) / samples
    nrm = np.column_stack([np.cos(th), np.sin(th)])
    cells = m.locate(r * nrm)
    ok = cells >= 0
    g = f.grad[cells[ok]]
    g2 = (g * g).sum(axis=1)
    good = g2 < 1.0
    dens = (g[good] * nrm[ok][good]).sum(axis=1) / np.sqrt(1.0 - g2[good])
    skipped = int(samples - good.sum())
    used = samples - skipped
    flux = dens.sum() * 2.0 * math.pi * r / max(used, 1)
    return float(flux), skipped
