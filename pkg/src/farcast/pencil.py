"""Symmetric generalized eigenproblem for operator pencils M - lambda N.

N must be symmetric positive definite. The pencil is reduced to an
ordinary symmetric eigenproblem by Cholesky whitening: with N = LL', the
eigenvalues equal those of L^-1 M L'^-1, and mapping an orthonormal
eigenvector y back through b = L'^-1 y yields b'Nb = 1 for free. Dense
O(m^3) routines are deliberate: grids here have m of order 100.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky, solve_triangular

from .exceptions import EigenSolverError, NotPositiveDefiniteError
from .grid import Fn, require_same_grid
from .operators import LinOp

__all__ = ["PencilEigen", "DegeneracyWarning", "solve_pencil", "rayleigh"]

#: smallest/largest eigenvalue ratio below which N counts as singular
PD_RTOL = 1e-12

#: adjacent eigenvalues closer than this (relative) trigger a tie warning
TIE_RTOL = 1e-10


class DegeneracyWarning(UserWarning):
    """Adjacent pencil eigenvalues are numerically tied; the eigenvectors
    spanning the tied block are determined only up to rotation."""


@dataclass(frozen=True)
class PencilEigen:
    """Top eigenpairs of a pencil, eigenvalues descending.

    Vectors are normalized so b'Nb = 1 and are N-orthogonal to each
    other; the component of each vector with the largest magnitude is
    made positive to pin down the otherwise free sign.
    """

    eigenvalues: np.ndarray
    vectors: tuple[Fn, ...]
    normalization: str = "b'Nb = 1"

    @property
    def grid(self):
        return self.vectors[0].grid

    def whitened_matrix(self) -> np.ndarray:
        """Column-stacked whitened coordinates of the vectors (m x k)."""
        h = self.grid.spacing
        return np.sqrt(h) * np.column_stack([b.values for b in self.vectors])


def _require_symmetric(op: LinOp, side: str) -> None:
    gap = float(np.max(np.abs(op.mat - op.mat.T)))
    if gap > 1e-10 * (1.0 + float(np.max(np.abs(op.mat)))):
        raise EigenSolverError(f"{side} operator is not symmetric (gap {gap:.3e})")


def solve_pencil(M: LinOp, N: LinOp, k: int) -> PencilEigen:
    """Top-k eigenpairs of M - lambda N with N symmetric positive definite."""
    require_same_grid(M, N)
    m = M.grid.count
    k = int(k)
    if not 1 <= k <= m:
        raise ValueError(f"k must be in [1, {m}], got {k}")
    _require_symmetric(M, "left")
    _require_symmetric(N, "right")

    n_evals = np.linalg.eigvalsh(N.mat)
    if n_evals[0] <= PD_RTOL * n_evals[-1] or n_evals[-1] <= 0:
        raise NotPositiveDefiniteError(
            "right operator is not positive definite: eigenvalue "
            f"{n_evals[0]:.6e} (largest {n_evals[-1]:.6e})"
        )

    try:
        L = cholesky(N.mat, lower=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - guarded above
        raise NotPositiveDefiniteError(str(exc)) from exc

    # L^-1 M L^-T, symmetrized against roundoff
    half = solve_triangular(L, M.mat, lower=True)
    core = solve_triangular(L, half.T, lower=True).T
    core = 0.5 * (core + core.T)

    lam, y = np.linalg.eigh(core)
    lam = lam[::-1]
    y = y[:, ::-1]

    scale = 1.0 + float(np.max(np.abs(lam))) if lam.size else 1.0
    for j in range(min(k, m - 1)):
        if abs(lam[j] - lam[j + 1]) <= TIE_RTOL * scale:
            warnings.warn(
                f"pencil eigenvalues {j + 1} and {j + 2} are numerically tied "
                f"({lam[j]:.12e} vs {lam[j + 1]:.12e}); the returned vectors "
                "span the tied block but are individually arbitrary",
                DegeneracyWarning,
                stacklevel=2,
            )

    # b = L^-T y keeps b'Nb = y'y = 1
    b_w = solve_triangular(L, y[:, :k], lower=True, trans="T")
    signs = np.sign(b_w[np.argmax(np.abs(b_w), axis=0), np.arange(k)])
    signs[signs == 0] = 1.0
    b_w = b_w * signs

    h = M.grid.spacing
    vectors = tuple(Fn(M.grid, b_w[:, j] / np.sqrt(h)) for j in range(k))
    lam_k = lam[:k].copy()
    lam_k.flags.writeable = False
    return PencilEigen(eigenvalues=lam_k, vectors=vectors)


def rayleigh(M: LinOp, N: LinOp, b: Fn) -> float:
    """Generalized Rayleigh quotient (b'Mb)/(b'Nb) in whitened coordinates."""
    require_same_grid(M, N)
    require_same_grid(M, b)
    w = np.sqrt(b.grid.spacing) * b.values
    denom = float(w @ N.mat @ w)
    if not np.any(w):
        raise ValueError("Rayleigh quotient of the zero function is undefined")
    return float(w @ M.mat @ w) / denom
