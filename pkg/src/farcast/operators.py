"""Discretized Hilbert-Schmidt integral operators on a maturity grid.

An operator with kernel K maps a curve x to the curve
``(A x)(T) = integral K(S, T) x(S) dS``. On a uniform grid with spacing h
the integral becomes ``h * sum``, and in whitened coordinates
(``sqrt(h) * values``, see :mod:`farcast.grid`) the action is a plain
matrix-vector product. Every operator therefore stores ``mat``, the m x m
matrix of its whitened action, with rows indexed by the output maturity
and columns by the integration maturity. Kernel samples relate to it by
``mat = spacing * K_samples.T`` where ``K_samples[i, j] = K(points[i],
points[j])``.

Storing the whitened matrix makes the Hilbert-Schmidt norm the Frobenius
norm, composition the matrix product, and the L2 identity the identity
matrix, so Tikhonov shifts are literal diagonal shifts.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable

import numpy as np

from .exceptions import GridMismatchError
from .grid import Fn, Grid, require_same_grid

if TYPE_CHECKING:
    from .ingest import CurvePanel

__all__ = [
    "LinOp",
    "emp_cov",
    "emp_crosscov",
    "write_kernel_csv",
    "read_kernel_csv",
]

#: absolute slack, relative to matrix scale, for the symmetry flag check
SYMMETRY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class LinOp:
    """A linear operator between curves on one grid, in whitened coordinates."""

    grid: Grid
    mat: np.ndarray
    symmetric: bool = False

    def __post_init__(self):
        arr = np.asarray(self.mat, dtype=float)
        m = self.grid.count
        if arr.shape != (m, m):
            raise ValueError(f"operator matrix must be {m}x{m}, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("operator matrix must be finite")
        if self.symmetric:
            scale = 1.0 + float(np.max(np.abs(arr)))
            gap = float(np.max(np.abs(arr - arr.T)))
            if gap > SYMMETRY_TOL * scale:
                raise ValueError(
                    f"operator marked symmetric but max asymmetry is {gap:.3e}"
                )
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "mat", arr)

    # ------------------------------------------------------------------
    # constructors

    @classmethod
    def zero(cls, grid: Grid) -> LinOp:
        return cls(grid, np.zeros((grid.count, grid.count)), symmetric=True)

    @classmethod
    def identity(cls, grid: Grid) -> LinOp:
        """The L2 identity (a discrete delta kernel in sample space)."""
        return cls(grid, np.eye(grid.count), symmetric=True)

    @classmethod
    def from_kernel(cls, grid: Grid, kernel) -> LinOp:
        """Build from kernel samples K(S_i, T_j), integration over S.

        ``kernel`` is either a callable k(S, T) evaluated on the grid's
        meshes, or an m x m array laid out as ``K[i, j] = k(points[i],
        points[j])``.
        """
        if callable(kernel):
            s, t = np.meshgrid(grid.points, grid.points, indexing="ij")
            samples = np.asarray(kernel(s, t), dtype=float)
        else:
            samples = np.asarray(kernel, dtype=float)
        m = grid.count
        if samples.shape != (m, m):
            raise ValueError(f"kernel samples must be {m}x{m}, got {samples.shape}")
        mat = grid.spacing * samples.T
        sym = np.max(np.abs(mat - mat.T)) <= SYMMETRY_TOL * (1.0 + np.max(np.abs(mat)))
        return cls(grid, mat, symmetric=bool(sym))

    @classmethod
    def outer(cls, f: Fn, g: Fn) -> LinOp:
        """Rank-1 operator x -> f * inner(g, x)."""
        require_same_grid(f, g)
        h = f.grid.spacing
        mat = h * np.outer(f.values, g.values)
        return cls(f.grid, mat, symmetric=f is g or bool(np.allclose(mat, mat.T)))

    # ------------------------------------------------------------------
    # algebra

    def apply(self, x: Fn) -> Fn:
        # sqrt(h) whitening factors cancel, so the value-space action is
        # the same matrix product
        require_same_grid(self, x)
        return Fn(self.grid, self.mat @ x.values)

    def __matmul__(self, other: LinOp) -> LinOp:
        if not isinstance(other, LinOp):
            return NotImplemented
        require_same_grid(self, other)
        return LinOp(self.grid, self.mat @ other.mat)

    def adjoint(self) -> LinOp:
        return LinOp(self.grid, self.mat.T, symmetric=self.symmetric)

    def __add__(self, other: LinOp) -> LinOp:
        if not isinstance(other, LinOp):
            return NotImplemented
        require_same_grid(self, other)
        return LinOp(
            self.grid, self.mat + other.mat, symmetric=self.symmetric and other.symmetric
        )

    def __sub__(self, other: LinOp) -> LinOp:
        if not isinstance(other, LinOp):
            return NotImplemented
        require_same_grid(self, other)
        return LinOp(
            self.grid, self.mat - other.mat, symmetric=self.symmetric and other.symmetric
        )

    def __mul__(self, c: float) -> LinOp:
        return LinOp(self.grid, self.mat * float(c), symmetric=self.symmetric)

    __rmul__ = __mul__

    def __neg__(self) -> LinOp:
        return self * -1.0

    def add_identity(self, alpha: float) -> LinOp:
        """Tikhonov shift: the operator plus alpha times the L2 identity."""
        shifted = self.mat + float(alpha) * np.eye(self.grid.count)
        return LinOp(self.grid, shifted, symmetric=self.symmetric)

    def hs_norm(self) -> float:
        """Hilbert-Schmidt norm (root of the kernel's double integral)."""
        return float(np.linalg.norm(self.mat, "fro"))

    @property
    def kernel_matrix(self) -> np.ndarray:
        """Kernel samples K[i, j] = K(points[i], points[j]), S down the rows."""
        return self.mat.T / self.grid.spacing


def emp_cov(panel: CurvePanel) -> LinOp:
    """Empirical covariance operator of the panel's rows.

    Kernel ``(1/n) sum_t f_t(S) f_t(T)`` minus the product of sample
    means; the mean term is subtracted whether or not the panel is
    pre-centered (it is then numerically zero).
    """
    rows = np.asarray(panel.rows, dtype=float)
    n = rows.shape[0]
    if n < 2:
        raise ValueError(f"covariance needs at least 2 dates, got {n}")
    w = np.sqrt(panel.grid.spacing) * rows
    wbar = w.mean(axis=0)
    mat = w.T @ w / n - np.outer(wbar, wbar)
    mat = 0.5 * (mat + mat.T)
    return LinOp(panel.grid, mat, symmetric=True)


def emp_crosscov(panel: CurvePanel, lag: int) -> tuple[LinOp, LinOp]:
    """Empirical lag cross-covariance operators (forward, adjoint).

    The forward operator maps x to the average of ``inner(f_t, x) *
    f_(t+lag)`` over the n - lag overlapping pairs, with the product of
    full-sample means subtracted from the kernel (the same means the
    covariance uses, in both slots).
    """
    rows = np.asarray(panel.rows, dtype=float)
    n = rows.shape[0]
    lag = int(lag)
    if lag < 1:
        raise ValueError(f"lag must be >= 1, got {lag}")
    if n <= lag:
        raise ValueError(f"need more than lag={lag} dates, got {n}")
    w = np.sqrt(panel.grid.spacing) * rows
    wbar = w.mean(axis=0)
    # rows of mat index the led curve, columns the lagged one
    mat12 = w[lag:].T @ w[:-lag] / (n - lag) - np.outer(wbar, wbar)
    fwd = LinOp(panel.grid, mat12)
    return fwd, fwd.adjoint()


def write_kernel_csv(op: LinOp, path) -> None:
    """Write kernel samples K(S, T): rows indexed by S, columns by T.

    The header row holds the output maturities T and the first column the
    integration maturities S, both in days.
    """
    pts = op.grid.points
    kernel = op.kernel_matrix
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["maturity_days"] + [repr(float(t)) for t in pts])
        for i, s in enumerate(pts):
            writer.writerow([repr(float(s))] + [repr(float(v)) for v in kernel[i]])


def read_kernel_csv(path) -> LinOp:
    """Inverse of :func:`write_kernel_csv`."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "maturity_days":
            raise ValueError(f"{path}: not a kernel CSV (bad header)")
        cols = np.array([float(v) for v in header[1:]])
        rows_s = []
        samples = []
        for row in reader:
            rows_s.append(float(row[0]))
            samples.append([float(v) for v in row[1:]])
    grid = Grid.from_points(cols)
    if not np.allclose(rows_s, cols, rtol=0, atol=1e-9):
        raise GridMismatchError(f"{path}: row and column maturities differ")
    return LinOp.from_kernel(grid, np.array(samples))
