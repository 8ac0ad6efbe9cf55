"""Synthetic functional AR(1) panels with known population operators.

The process is f[t+1] = rho(f[t]) + eps[t+1], where eps is a finite
expansion sum_i sigma_i * xi_i * e_i over a fixed set of basis curves
with i.i.d. standard normal draws. Keeping the expansion finite makes
the innovation covariance exactly representable, so the stationary
covariance can be computed to machine precision and simulated panels can
be checked against it. Stationarity is enforced through the sufficient
condition hs_norm(rho) < 1.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .exceptions import SimulationError
from .grid import Fn, Grid, whiten
from .ingest import CurvePanel
from .operators import LinOp

__all__ = [
    "SimSpec",
    "PopulationOperators",
    "make_gaussian_kernel",
    "cosine_basis",
    "default_noise",
    "simulate_far",
    "innovation_covariance",
    "population_operators",
    "weekday_dates",
]

#: first synthetic panel date (a Monday)
SYNTH_EPOCH = dt.date(2000, 1, 3)

MAX_FIXED_POINT_ITERATIONS = 100_000


@dataclass(frozen=True)
class SimSpec:
    """Everything needed to reproduce one synthetic panel."""

    grid: Grid
    rho: LinOp
    noise: tuple
    n: int
    burn_in: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.rho.grid != self.grid:
            raise SimulationError("rho lives on a different grid than the simulation")
        if not self.rho.hs_norm() < 1.0:
            raise SimulationError(
                f"need hs_norm(rho) < 1 for stationarity, got {self.rho.hs_norm():.6f}"
            )
        noise = tuple(self.noise)
        if not noise:
            raise SimulationError("noise expansion must have at least one term")
        for basis_fn, sigma in noise:
            if basis_fn.grid != self.grid:
                raise SimulationError("a noise basis function is on the wrong grid")
            if not (np.isfinite(sigma) and sigma >= 0):
                raise SimulationError(f"bad noise standard deviation {sigma}")
        if self.n < 1:
            raise SimulationError(f"panel length must be >= 1, got {self.n}")
        if self.burn_in < 0:
            raise SimulationError(f"burn_in must be >= 0, got {self.burn_in}")
        object.__setattr__(self, "noise", noise)

    def _noise_matrix(self) -> np.ndarray:
        """Whitened m x p matrix whose columns are sigma_i * e_i."""
        cols = [sigma * whiten(basis_fn).coords for basis_fn, sigma in self.noise]
        return np.column_stack(cols)


class PopulationOperators(NamedTuple):
    gamma11: LinOp
    gamma12: LinOp


def make_gaussian_kernel(grid: Grid, amplitude: float, bandwidth: float) -> LinOp:
    """Smooth symmetric operator with kernel exp(-(S-T)^2 / 2w^2), rescaled
    so its Hilbert-Schmidt norm is exactly ``amplitude``."""
    if amplitude < 0:
        raise ValueError(f"amplitude must be >= 0, got {amplitude}")
    if not bandwidth > 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    if amplitude == 0:
        return LinOp.zero(grid)
    raw = LinOp.from_kernel(
        grid, lambda s, t: np.exp(-((s - t) ** 2) / (2.0 * bandwidth**2))
    )
    return LinOp(grid, (amplitude / raw.hs_norm()) * raw.mat, symmetric=True)


def cosine_basis(grid: Grid, count: int) -> list[Fn]:
    """First ``count`` cosine-shaped curves, exactly orthonormal in L2.

    Sampled cosines are only approximately orthogonal under the grid
    quadrature, so the whitened columns are re-orthonormalized (QR);
    the first function stays the constant one.
    """
    if not 1 <= count <= grid.count:
        raise ValueError(f"count must be in [1, {grid.count}], got {count}")
    rel = (grid.points - grid.origin) / (grid.terminal - grid.origin)
    cols = np.column_stack([np.cos(k * np.pi * rel) for k in range(count)])
    q, _ = np.linalg.qr(np.sqrt(grid.spacing) * cols)
    # QR sign freedom: pin the largest component of each column positive
    signs = np.sign(q[np.argmax(np.abs(q), axis=0), np.arange(count)])
    signs[signs == 0] = 1.0
    q = q * signs
    return [Fn(grid, q[:, k] / np.sqrt(grid.spacing)) for k in range(count)]


def default_noise(grid: Grid, count: int = 8, scale: float = 0.02) -> tuple:
    """Cosine-basis noise expansion with standard deviations scale / i."""
    basis = cosine_basis(grid, count)
    return tuple((basis[i], scale / (i + 1)) for i in range(count))


def weekday_dates(start: dt.date, count: int) -> tuple[dt.date, ...]:
    """``count`` consecutive weekdays beginning at or after ``start``."""
    out = []
    day = start
    while len(out) < count:
        if day.weekday() < 5:
            out.append(day)
        day += dt.timedelta(days=1)
    return tuple(out)


def simulate_far(spec: SimSpec) -> CurvePanel:
    """Run the AR recursion from zero, drop burn-in, return a dated panel."""
    rng = np.random.default_rng(spec.seed)
    noise_mat = spec._noise_matrix()
    m, p = noise_mat.shape
    steps = spec.burn_in + spec.n
    shocks = rng.standard_normal((steps, p)) @ noise_mat.T
    r = spec.rho.mat
    w = np.zeros(m)
    kept = np.empty((spec.n, m))
    for t in range(steps):
        w = r @ w + shocks[t]
        if t >= spec.burn_in:
            kept[t - spec.burn_in] = w
    rows = kept / np.sqrt(spec.grid.spacing)
    return CurvePanel(
        grid=spec.grid, dates=weekday_dates(SYNTH_EPOCH, spec.n), rows=rows
    )


def innovation_covariance(spec: SimSpec) -> LinOp:
    """Covariance operator of the noise expansion, sum sigma_i^2 e_i e_i'."""
    noise_mat = spec._noise_matrix()
    return LinOp(spec.grid, noise_mat @ noise_mat.T, symmetric=True)


def population_operators(spec: SimSpec) -> PopulationOperators:
    """Exact stationary covariance and lag-1 cross-covariance of the process.

    The covariance is the fixed point of gamma -> rho gamma rho' + C_eps,
    iterated until the equation residual is below 1e-12 in HS norm.
    """
    r = spec.rho.mat
    c_eps = innovation_covariance(spec).mat
    gamma = c_eps.copy()
    for _ in range(MAX_FIXED_POINT_ITERATIONS):
        gamma = r @ gamma @ r.T + c_eps
        residual = np.linalg.norm(gamma - r @ gamma @ r.T - c_eps, "fro")
        if residual <= 1e-12 * (1.0 + np.linalg.norm(gamma, "fro")):
            gamma = 0.5 * (gamma + gamma.T)
            g11 = LinOp(spec.grid, gamma, symmetric=True)
            return PopulationOperators(gamma11=g11, gamma12=spec.rho @ g11)
    raise SimulationError(
        "stationary covariance iteration did not converge; is hs_norm(rho) "
        "too close to 1?"
    )
