"""Radial solutions of the Lorentzian mean curvature equation.

Covers the fundamental solutions, their gradients, the shifted family and an
exact radial Dirichlet solver that serves as the reference everywhere else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .core import ContractError, DimensionError, DomainError, as_dim
from .mollifier import Mollifier

# Gauss-Legendre nodes on [0, 1] for the composite rules below.
_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


def _check_alpha(alpha):
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")


def _check_r(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(np.isnan(r)):
        raise DomainError("radius must be nonnegative")
    return r


def phi_2d(alpha: float, r):
    """-(a/2pi) [ln(r + sqrt((a/2pi)^2 + r^2)) - ln(a/2pi)], written as -c asinh(r/c)."""
    _check_alpha(alpha)
    c = alpha / (2.0 * math.pi)
    return -c * np.arcsinh(_check_r(r) / c)


def _tail(cNa: float, N: int, rs: float) -> float:
    # c int_rs^inf s^(1-N) (1 + c^2 s^(2-2N))^(-1/2) ds, binomial series to three terms
    t0 = rs ** (2 - N) / (N - 2)
    t1 = -0.5 * cNa**2 * rs ** (4 - 3 * N) / (3 * N - 4)
    t2 = 0.375 * cNa**4 * rs ** (6 - 5 * N) / (5 * N - 6)
    return cNa * (t0 + t1 + t2)


def _phi_nd_scalar(N: int, cNa: float, r: float, tol: float) -> float:
    rs = max(10.0, 10.0 * cNa ** (1.0 / (N - 1)))
    if r >= rs:
        return _tail(cNa, N, r)
    f = lambda s: cNa / math.sqrt(s ** (2 * (N - 1)) + cNa * cNa)
    knee = cNa ** (1.0 / (N - 1))
    pts = [knee] if r < knee < rs else None
    val, _ = quad(f, r, rs, epsabs=0.5 * tol, epsrel=1e-13, limit=400, points=pts)
    return val + _tail(cNa, N, rs)


def phi_nd(dim, alpha: float, r, tol: float = 1e-11):
    """Decaying fundamental solution for N >= 3, to absolute accuracy ``tol``."""
    dim = as_dim(dim)
    if dim.N < 3:
        raise DimensionError("phi_nd needs N >= 3; use phi_2d for N = 2")
    _check_alpha(alpha)
    if not tol > 0:
        raise DomainError("tol must be positive")
    cNa = dim.c_N * alpha
    r = _check_r(r)
    if r.ndim == 0:
        return _phi_nd_scalar(dim.N, cNa, float(r), tol)
    return np.vectorize(lambda x: _phi_nd_scalar(dim.N, cNa, x, tol))(r)


def phi(dim, alpha: float, r):
    """Fundamental solution for any N >= 2."""
    dim = as_dim(dim)
    return phi_2d(alpha, r) if dim.N == 2 else phi_nd(dim, alpha, r)


def phi_grad_mag(dim, alpha: float, r):
    dim = as_dim(dim)
    _check_alpha(alpha)
    t = dim.c_N * alpha
    r = _check_r(r)
    return t / np.sqrt(r ** (2 * (dim.N - 1)) + t * t)


def phi_shifted(dim, alpha: float, bar_alpha: float, r):
    """Phi_alpha shifted so that its value at the origin equals Phi_{bar_alpha}(0)."""
    dim = as_dim(dim)
    if dim.N < 3:
        raise DimensionError("the shifted family is defined for N >= 3")
    _check_alpha(bar_alpha)
    if alpha < bar_alpha:
        raise ContractError("alpha must be >= bar_alpha")
    if alpha == bar_alpha:
        return phi_nd(dim, alpha, r)
    return phi_nd(dim, alpha, r) + phi_nd(dim, bar_alpha, 0.0) - phi_nd(dim, alpha, 0.0)


def radial_grid(R: float, M: int = 2048, r_min_frac: float = 1e-6, switch_frac: float = 0.05):
    """0, then geometric radii up to switch_frac*R, then uniform up to R."""
    if M < 8:
        raise ContractError("need at least 8 grid nodes")
    m_geo = M // 4
    geo = np.geomspace(r_min_frac * R, switch_frac * R, m_geo)
    uni = np.linspace(switch_frac * R, R, M - m_geo)[1:]
    g = np.concatenate([[0.0], geo, uni])
    g[-1] = R
    return g


@dataclass
class RadialSource:
    """Radial density g(r) >= 0 with cumulative moment h(r) = int_0^r g t^(N-1) dt."""

    dim: object
    g: Callable
    support: float
    breakpoints: tuple = ()
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.dim = as_dim(self.dim)

    @classmethod
    def mollified(cls, dim, alpha: float, n) -> "RadialSource":
        m = Mollifier(n, dim)
        return cls(m.dim, lambda r: alpha * m.radial(r), m.support, (1.0 / n, 2.0 / n))

    @classmethod
    def zero(cls, dim) -> "RadialSource":
        return cls(dim, lambda r: np.zeros_like(np.asarray(r, dtype=float)), 0.0)

    @classmethod
    def tabulated(cls, dim, r, values) -> "RadialSource":
        r = np.asarray(r, dtype=float)
        values = np.asarray(values, dtype=float)
        nz = np.nonzero(values > 0)[0]
        support = float(r[nz[-1] + 1]) if len(nz) and nz[-1] + 1 < len(r) else float(r[-1])
        return cls(dim, lambda s: np.interp(s, r, values, right=0.0), support, tuple(r[1:-1]))

    def _moment_grid(self, grid: np.ndarray) -> np.ndarray:
        N = self.dim.N
        a, b = grid[:-1], grid[1:]
        s = a[:, None] + (b - a)[:, None] * _GL_X[None, :]
        pieces = ((b - a)[:, None] * _GL_W[None, :] * self.g(s) * s ** (N - 1)).sum(axis=1)
        return np.concatenate([[0.0], np.cumsum(pieces)])

    def h(self, r):
        """Cumulative moment at arbitrary radii (composite Gauss-Legendre)."""
        r = np.asarray(r, dtype=float)
        flat = np.unique(np.concatenate([[0.0], r.ravel(), self._breaks(r.max(initial=0.0))]))
        H = self._moment_grid(flat)
        return np.interp(r, flat, H)

    def _breaks(self, upto: float) -> np.ndarray:
        b = [x for x in self.breakpoints if 0 < x < upto]
        if 0 < self.support < upto:
            b.append(self.support)
        return np.asarray(b, dtype=float)

    @property
    def total(self) -> float:
        """Limit value of h beyond the support."""
        if self.support == 0:
            return 0.0
        return float(self.h(np.array([self.support]))[0])


@dataclass
class RadialProfile:
    dim: object
    grid: np.ndarray
    values: np.ndarray
    alpha: float
    kind: str

    def __post_init__(self):
        self.dim = as_dim(self.dim)
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if np.any(np.diff(self.grid) <= 0):
            raise ContractError("radial grid must be strictly increasing")

    @property
    def R(self) -> float:
        return float(self.grid[-1])

    def __call__(self, r):
        return np.interp(r, self.grid, self.values)

    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.grid)

    def weakly_spacelike(self, atol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(np.diff(self.values)) <= np.diff(self.grid) + atol))


def _refined(grid: np.ndarray, extra: np.ndarray, sub: int = 2):
    pts = np.unique(np.concatenate([grid, extra]))
    if sub > 1:
        a, b = pts[:-1], pts[1:]
        frac = np.arange(1, sub) / sub
        pts = np.unique(np.concatenate([pts, (a[:, None] + (b - a)[:, None] * frac).ravel()]))
    return pts


def radial_dirichlet(dim, source: RadialSource, R: float, grid=None) -> RadialProfile:
    """Radial solution of M0 v = g in B_R with v = 0 on the boundary.

    v(r) = int_r^R h(s) / sqrt(s^(2(N-1)) + h(s)^2) ds, evaluated with a
    composite Gauss-Legendre rule on the grid refined at the source breakpoints.
    """
    dim = as_dim(dim)
    if grid is None:
        grid = radial_grid(R)
    grid = np.asarray(grid, dtype=float)
    if grid[0] != 0.0 or not math.isclose(grid[-1], R, rel_tol=0, abs_tol=1e-12 * max(R, 1)):
        raise ContractError("grid must start at 0 and end at R")
    if source.support >= R:
        raise ContractError("R must exceed the source support")
    N = dim.N
    fine = _refined(grid, source._breaks(R))
    H = source._moment_grid(fine)
    a, b = fine[:-1], fine[1:]
    s = a[:, None] + (b - a)[:, None] * _GL_X[None, :]
    # moment at the inner Gauss nodes: H(a) + int_a^s g t^(N-1) dt
    Hs = H[:-1, None] + _partial_moments(source, a, s)
    F = Hs / np.sqrt(s ** (2 * (N - 1)) + Hs * Hs)
    F = np.where(Hs > 0, F, 0.0)
    pieces = ((b - a)[:, None] * _GL_W[None, :] * F).sum(axis=1)
    v_fine = np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]])
    idx = np.searchsorted(fine, grid)
    total = source.total if source.support > 0 else 0.0
    return RadialProfile(dim, grid, v_fine[idx], total / dim.c_N if total else 0.0, "dirichlet")


def _partial_moments(source: RadialSource, a: np.ndarray, s: np.ndarray) -> np.ndarray:
    N = source.dim.N
    L = s - a[:, None]
    t = a[:, None, None] + L[:, :, None] * _GL_X[None, None, :]
    return (L[:, :, None] * _GL_W * source.g(t) * t ** (N - 1)).sum(axis=2)


def fundamental_profile(dim, alpha: float, R: float, grid=None, shift_to_zero: bool = False) -> RadialProfile:
    """Phi_{N,alpha} sampled on a radial grid; optionally minus Phi(R)."""
    dim = as_dim(dim)
    if grid is None:
        grid = radial_grid(R)
    grid = np.asarray(grid, dtype=float)
    if dim.N == 2:
        vals = phi_2d(alpha, grid)
    else:
        vals = _phi_nd_on_grid(dim, alpha, grid)
    if shift_to_zero:
        vals = vals - vals[-1]
    return RadialProfile(dim, grid, vals, alpha, "fundamental")


def _phi_nd_on_grid(dim, alpha, grid):
    cNa = dim.c_N * alpha
    N = dim.N
    fine = _refined(grid, np.array([]), sub=2)
    a, b = fine[:-1], fine[1:]
    s = a[:, None] + (b - a)[:, None] * _GL_X[None, :]
    F = cNa / np.sqrt(s ** (2 * (N - 1)) + cNa * cNa)
    pieces = ((b - a)[:, None] * _GL_W[None, :] * F).sum(axis=1)
    tail = _phi_nd_scalar(N, cNa, float(fine[-1]), 1e-13)
    v = np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]]) + tail
    return v[np.searchsorted(fine, grid)]
