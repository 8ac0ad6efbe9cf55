"""Uniform maturity grids and curves sampled on them.

Maturities are measured in days and rates in decimal per annum. A curve
sampled on a grid is treated as an element of L2 over the maturity range,
with the rectangle quadrature rule: each grid point carries the uniform
weight ``spacing``. Multiplying sampled values by ``sqrt(spacing)``
("whitening") turns L2 inner products into plain Euclidean dot products,
which is the coordinate system the operator algebra works in.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import GridMismatchError

__all__ = [
    "Grid",
    "Fn",
    "WhitenedVec",
    "inner",
    "norm",
    "whiten",
    "dewhiten",
    "require_same_grid",
]

#: relative tolerance for deciding that externally supplied points are uniform
UNIFORM_RTOL = 1e-9


def _frozen_array(values, length=None) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d array, got shape {arr.shape}")
    if length is not None and arr.shape[0] != length:
        raise ValueError(f"expected {length} values, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("values must all be finite")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniformly spaced maturities ``origin, origin+spacing, ...`` (days).

    Grids are compared by value on (count, spacing, origin). Operations
    across different grids raise :class:`GridMismatchError`; there is no
    implicit resampling.
    """

    origin: float
    spacing: float
    count: int
    points: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.count < 2:
            raise ValueError(f"grid needs at least 2 points, got {self.count}")
        if not self.spacing > 0:
            raise ValueError(f"grid spacing must be positive, got {self.spacing}")
        pts = float(self.origin) + float(self.spacing) * np.arange(self.count)
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_points(cls, points) -> Grid:
        """Build a grid from explicit maturities, checking uniform spacing."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 1 or pts.shape[0] < 2:
            raise ValueError("need at least 2 maturity points")
        steps = np.diff(pts)
        if np.any(steps <= 0):
            raise ValueError("maturity points must be strictly increasing")
        h = (pts[-1] - pts[0]) / (pts.shape[0] - 1)
        if np.max(np.abs(steps - h)) > UNIFORM_RTOL * max(abs(h), 1.0):
            raise ValueError("maturity points are not uniformly spaced")
        return cls(origin=float(pts[0]), spacing=float(h), count=pts.shape[0])

    @property
    def terminal(self) -> float:
        return self.origin + self.spacing * (self.count - 1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Grid):
            return NotImplemented
        return (
            self.count == other.count
            and np.isclose(self.spacing, other.spacing, rtol=1e-12, atol=0.0)
            and np.isclose(self.origin, other.origin, rtol=1e-12, atol=1e-12)
        )

    def __repr__(self) -> str:
        return f"Grid(origin={self.origin:g}, spacing={self.spacing:g}, count={self.count})"


def require_same_grid(a, b) -> None:
    """Raise :class:`GridMismatchError` unless both objects share one grid."""
    ga = a if isinstance(a, Grid) else a.grid
    gb = b if isinstance(b, Grid) else b.grid
    if ga != gb:
        raise GridMismatchError(f"grid mismatch: {ga!r} vs {gb!r}")


@dataclass(frozen=True, eq=False)
class Fn:
    """A function sampled on a grid (rates in decimal per annum)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values, self.grid.count))

    def __add__(self, other: Fn) -> Fn:
        require_same_grid(self, other)
        return Fn(self.grid, self.values + other.values)

    def __sub__(self, other: Fn) -> Fn:
        require_same_grid(self, other)
        return Fn(self.grid, self.values - other.values)

    def __mul__(self, c: float) -> Fn:
        return Fn(self.grid, self.values * float(c))

    __rmul__ = __mul__

    def __neg__(self) -> Fn:
        return Fn(self.grid, -self.values)


@dataclass(frozen=True, eq=False)
class WhitenedVec:
    """Euclidean coordinates ``sqrt(spacing) * values`` of a sampled function."""

    grid: Grid
    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", _frozen_array(self.coords, self.grid.count))


def inner(x: Fn, y: Fn) -> float:
    """L2 inner product: rectangle quadrature of the pointwise product."""
    require_same_grid(x, y)
    return float(x.grid.spacing * np.dot(x.values, y.values))


def norm(x: Fn) -> float:
    """L2 norm ``sqrt(inner(x, x))``."""
    return float(np.sqrt(x.grid.spacing) * np.linalg.norm(x.values))


def whiten(x: Fn) -> WhitenedVec:
    """Scale values by sqrt(spacing) so Euclidean dots equal L2 inner products."""
    return WhitenedVec(x.grid, np.sqrt(x.grid.spacing) * x.values)


def dewhiten(w: WhitenedVec) -> Fn:
    """Inverse of :func:`whiten`."""
    return Fn(w.grid, w.coords / np.sqrt(w.grid.spacing))
