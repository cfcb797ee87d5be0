"""Shared geometric types and dimension constants."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np


class ConefieldError(ValueError):
    """Base class for invalid inputs and broken contracts."""


class DomainError(ConefieldError):
    pass


class DimensionError(ConefieldError):
    pass


class ContractError(ConefieldError):
    pass


class InfeasibleFieldError(ConefieldError):
    """A field has a cell with |grad w| >= 1."""


class LocationError(ConefieldError):
    """A query point lies outside the mesh."""


class NotApplicable(ConefieldError):
    pass


@dataclass(frozen=True)
class Dimension:
    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise DimensionError(f"dimension must be an integer >= 2, got {self.N}")

    @cached_property
    def sphere_area(self) -> float:
        return 2.0 * math.pi ** (self.N / 2) / math.gamma(self.N / 2)

    @property
    def c_N(self) -> float:
        return 1.0 / self.sphere_area


def as_dim(dim) -> Dimension:
    return dim if isinstance(dim, Dimension) else Dimension(int(dim))


def sphere_area(dim) -> float:
    """Surface area of the unit sphere in R^N."""
    return as_dim(dim).sphere_area


@dataclass(frozen=True)
class Pole:
    point: tuple
    weight: float


@dataclass(frozen=True)
class PoleConfig:
    """Signed point masses inside B_{R0/2}.

    Poles are stored as (point, weight) pairs; the positive and negative
    subsets are derived from the sign of the weight.
    """

    dim: Dimension
    poles: tuple
    R0: float
    min_gap: float = field(init=False)

    def __init__(self, dim, poles: Sequence, R0: float):
        dim = as_dim(dim)
        norm = []
        for p in poles:
            if isinstance(p, Pole):
                pt, w = p.point, p.weight
            else:
                pt, w = p
            pt = tuple(float(c) for c in pt)
            if len(pt) != dim.N:
                raise DimensionError(f"pole {pt} does not have {dim.N} coordinates")
            w = float(w)
            if w == 0.0 or not math.isfinite(w):
                raise DomainError("pole weights must be finite and nonzero")
            norm.append(Pole(pt, w))
        if not norm:
            raise DomainError("at least one pole is required")
        R0 = float(R0)
        if not R0 > 0:
            raise DomainError("R0 must be positive")
        for p in norm:
            if np.linalg.norm(p.point) >= R0 / 2:
                raise DomainError(f"pole {p.point} is not inside B_(R0/2), R0={R0}")
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "poles", tuple(norm))
        object.__setattr__(self, "R0", R0)
        gap = _pairwise_min(self.points) if len(norm) > 1 else math.inf
        if gap == 0.0:
            raise DomainError("poles must be pairwise distinct")
        object.__setattr__(self, "min_gap", gap)

    @property
    def points(self) -> np.ndarray:
        return np.array([p.point for p in self.poles], dtype=float)

    @property
    def weights(self) -> np.ndarray:
        return np.array([p.weight for p in self.poles], dtype=float)

    @property
    def positive(self) -> np.ndarray:
        return self.weights > 0

    @property
    def negative(self) -> np.ndarray:
        return self.weights < 0

    @property
    def total_positive(self) -> float:
        """alpha_0: total positive mass."""
        w = self.weights
        return float(w[w > 0].sum())

    @property
    def total_negative(self) -> float:
        """beta_0: total negative mass, as a positive number."""
        w = self.weights
        return float(-w[w < 0].sum())

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    @property
    def mixed(self) -> bool:
        return bool(self.positive.any() and self.negative.any())

    def scaled(self, factor: float) -> "PoleConfig":
        return PoleConfig(self.dim, [(p.point, factor * p.weight) for p in self.poles], self.R0)

    def truncated(self, m: int) -> "PoleConfig":
        return PoleConfig(self.dim, self.poles[:m], self.R0)


def _pairwise_min(pts: np.ndarray, other: np.ndarray | None = None) -> float:
    if other is None:
        d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
        d[np.diag_indices(len(pts))] = np.inf
    else:
        d = np.linalg.norm(pts[:, None, :] - other[None, :, :], axis=-1)
    return float(d.min())


@dataclass(frozen=True)
class PoleGap:
    gap: float
    cross_sign: float | None  # l_0, only when both signs are present


def min_pole_gap(cfg: PoleConfig) -> PoleGap:
    """Minimum pairwise pole distance and, for mixed signs, the cross-sign distance l_0."""
    if len(cfg.poles) < 2:
        raise ContractError("pole gap is undefined for fewer than two poles")
    pts = cfg.points
    cross = None
    if cfg.mixed:
        cross = _pairwise_min(pts[cfg.positive], pts[cfg.negative])
    return PoleGap(cfg.min_gap, cross)


@dataclass(frozen=True)
class LightSegment:
    x: tuple
    y: tuple
    slope: float

    def __post_init__(self):
        if tuple(self.x) == tuple(self.y):
            raise ContractError("segment endpoints must differ")
        if not 0.0 <= self.slope <= 1.0 + 1e-12:
            raise ContractError(f"segment slope {self.slope} outside [0, 1]")
