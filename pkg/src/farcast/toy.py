"""Closed-form two-dimensional autoregression used as analytic ground truth.

Two independent scalar AR(1) components x and y with persistences a, b
and innovation variances var_eps, var_eta. Everything of interest has a
closed form: the stationary covariance is diagonal, the two candidate
rank-1 forecast losses are explicit, and the first predictive factor is
whichever axis carries more predictable variance. The interesting regime
has x more persistent but less variable than y, so ranking by variance
(pca-style) and ranking by predictability (cca-style) pick opposite
axes. This module is the ground truth the generic operator and pencil
machinery is tested against; it lives on a 2-point grid with spacing 1
so vectors and functions coincide.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .grid import Grid

__all__ = [
    "ToyParams",
    "ToyPopulation",
    "ToyLosses",
    "ToyFirstFactor",
    "toy_grid",
    "toy_population",
    "toy_losses",
    "toy_first_factor",
]


def toy_grid() -> Grid:
    """The 2-point, unit-spacing grid the toy model lives on."""
    return Grid(origin=0.0, spacing=1.0, count=2)


@dataclass(frozen=True)
class ToyParams:
    """Parameters of the two-component AR(1): persistences and noise variances."""

    a: float
    b: float
    var_eps: float
    var_eta: float

    def __post_init__(self):
        if not (abs(self.a) < 1 and abs(self.b) < 1):
            raise ValueError("persistences must satisfy |a| < 1 and |b| < 1")
        if not (self.var_eps > 0 and self.var_eta > 0):
            raise ValueError("innovation variances must be positive")

    @property
    def var_x(self) -> float:
        """Stationary variance of x: var_eps / (1 - a^2)."""
        return self.var_eps / (1.0 - self.a**2)

    @property
    def var_y(self) -> float:
        """Stationary variance of y: var_eta / (1 - b^2)."""
        return self.var_eta / (1.0 - self.b**2)

    @property
    def predictable_var_x(self) -> float:
        """Variance of the predictable part of x, a^2 * var_x; this is the
        pencil eigenvalue attached to the x axis."""
        return self.a**2 * self.var_x

    @property
    def predictable_var_y(self) -> float:
        return self.b**2 * self.var_y

    @property
    def x_more_persistent(self) -> bool:
        """Regime flag: a > b."""
        return self.a > self.b

    @property
    def x_less_variable(self) -> bool:
        """Regime flag: stationary variance of x below that of y."""
        return self.var_x < self.var_y


class ToyPopulation(NamedTuple):
    """Population operators as 2x2 matrices (diagonal by independence)."""

    gamma11: np.ndarray
    gamma12: np.ndarray
    rho: np.ndarray


class ToyLosses(NamedTuple):
    """Forecast MSE of the two candidate rank-1 predictors.

    ``pca`` keeps only the y component (the higher-variance axis in the
    standard regime, hence a variance-ranked factor's choice) and pays
    its innovation variance plus all of x's stationary variance. ``cca``
    keeps only x (the more predictable axis) and pays the mirror-image
    price.
    """

    pca: float
    cca: float


class ToyFirstFactor(NamedTuple):
    """First predictive factor b1, its loading a1 = gamma12 @ b1, and which
    classical rank-1 choice it coincides with ("cca-like" when the x axis
    wins the pencil, "pca-like" when y does)."""

    factor: np.ndarray
    loading: np.ndarray
    which: str


def toy_population(p: ToyParams) -> ToyPopulation:
    """Stationary covariance, lag-1 cross-covariance, and the AR operator."""
    gamma11 = np.diag([p.var_x, p.var_y])
    rho = np.diag([p.a, p.b])
    return ToyPopulation(gamma11=gamma11, gamma12=rho @ gamma11, rho=rho)


def toy_losses(p: ToyParams) -> ToyLosses:
    """Closed-form rank-1 losses: keep-y (pca) and keep-x (cca)."""
    return ToyLosses(
        pca=p.var_x + p.var_eta,
        cca=p.var_eps + p.var_y,
    )


def toy_first_factor(p: ToyParams) -> ToyFirstFactor:
    """Closed-form first predictive factor, normalized so b' gamma11 b = 1.

    The winning axis is the one with the larger predictable variance; an
    exact tie leaves the factor undefined and raises.
    """
    lam_x = p.predictable_var_x
    lam_y = p.predictable_var_y
    if lam_x == lam_y:
        raise ValueError(
            f"predictable variances tie at {lam_x:g}; first factor is undefined"
        )
    if lam_x > lam_y:
        factor = np.array([1.0 / np.sqrt(p.var_x), 0.0])
        which = "cca-like"
    else:
        factor = np.array([0.0, 1.0 / np.sqrt(p.var_y)])
        which = "pca-like"
    loading = toy_population(p).gamma12 @ factor
    return ToyFirstFactor(factor=factor, loading=loading, which=which)
