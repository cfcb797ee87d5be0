"""Mollifier family eta_n and the multi-pole sources g_n built from it."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .core import DomainError, PoleConfig, as_dim


def smoothstep(t):
    """Quintic smoothstep 6t^5 - 15t^4 + 10t^3, clamped to [0, 1]."""
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0)


def eta0(s):
    """Radial profile: 1 on [0,1], C^2 decay on (1,2), 0 beyond 2."""
    s = np.asarray(s, dtype=float)
    out = 1.0 - smoothstep(s - 1.0)
    out = np.where(s >= 2.0, 0.0, out)
    return out if out.ndim else float(out)


@lru_cache(maxsize=None)
def eta0_moment(N: int) -> float:
    """int_0^2 eta0(s) s^(N-1) ds."""
    val, _ = quad(lambda s: eta0(s) * s ** (N - 1), 0.0, 2.0, points=[1.0],
                  epsabs=1e-15, epsrel=1e-12, limit=200)
    return val


@dataclass(frozen=True)
class Mollifier:
    n: float
    dim: object

    def __post_init__(self):
        if not self.n >= 1:
            raise DomainError(f"mollifier index must be >= 1, got {self.n}")
        object.__setattr__(self, "dim", as_dim(self.dim))

    @property
    def normalization(self) -> float:
        N = self.dim.N
        return self.dim.c_N * self.n ** N / eta0_moment(N)

    @property
    def support(self) -> float:
        return 2.0 / self.n

    def radial(self, r):
        return self.normalization * eta0(self.n * np.asarray(r, dtype=float))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.radial(np.linalg.norm(x, axis=-1))


def eta_n(n, dim, x):
    """Normalized bump eta_n(x) with unit mass and support radius 2/n."""
    return Mollifier(n, dim)(x)


@dataclass(frozen=True)
class SourceField:
    """Superposition sum_j w_j eta_{n_j}(x - c_j)."""

    dim: object
    centers: np.ndarray
    weights: np.ndarray
    ns: np.ndarray
    cfg: PoleConfig | None = None

    def __post_init__(self):
        object.__setattr__(self, "dim", as_dim(self.dim))
        c = np.atleast_2d(np.asarray(self.centers, dtype=float))
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        ns = np.broadcast_to(np.asarray(self.ns, dtype=float), w.shape).copy()
        if c.shape != (len(w), self.dim.N):
            raise DomainError("centers/weights shape mismatch")
        if np.any(ns < 1):
            raise DomainError("mollifier index must be >= 1")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "ns", ns)

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    @property
    def radii(self) -> np.ndarray:
        return 2.0 / self.ns

    @property
    def nonnegative(self) -> bool:
        return bool(np.all(self.weights >= 0))

    def terms(self):
        for c, w, n in zip(self.centers, self.weights, self.ns):
            yield c, w, Mollifier(n, self.dim)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1])
        for c, w, m in self.terms():
            out += w * m(x - c)
        return out

    def __neg__(self):
        return SourceField(self.dim, self.centers, -self.weights, self.ns, None)

    def scaled(self, factor: float) -> "SourceField":
        return SourceField(self.dim, self.centers, factor * self.weights, self.ns, None)


def assemble_source(cfg: PoleConfig, n) -> SourceField:
    """g_n = sum_j alpha_j eta_n(x - p_j) for the poles of ``cfg``."""
    if not n >= 1:
        raise DomainError(f"mollifier index must be >= 1, got {n}")
    if len(cfg.poles) > 1 and 2.0 / n >= cfg.min_gap / 2:
        warnings.warn(f"bumps of radius {2.0 / n:.3g} overlap (min pole gap {cfg.min_gap:.3g})",
                      stacklevel=2)
    return SourceField(cfg.dim, cfg.points, cfg.weights, float(n), cfg)
