"""Curve forecasters: predictive-factor and principal-component functional
autoregressions, plus random-walk, historical-mean and Nelson-Siegel
(Diebold-Li style) benchmarks.

All estimators follow the scikit-learn convention: construct with
hyperparameters, ``fit`` on a :class:`~farcast.ingest.CurvePanel`, then
``predict`` today's curve into the curve expected ``lag`` rows ahead.
The autoregression is estimated directly at the forecast lag (one
regression at lag ``lag``), so a fitted model targets exactly that
horizon. Fitted attributes carry the usual trailing underscore and
models are immutable after fit.
"""

from __future__ import annotations

import json
import warnings

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import EstimationError
from .grid import Fn, Grid
from .ingest import CurvePanel, center_panel
from .operators import LinOp, emp_cov, emp_crosscov
from .pencil import solve_pencil

__all__ = [
    "PredictiveFactorFAR",
    "PrincipalComponentFAR",
    "RandomWalkForecaster",
    "HistoricalMeanForecaster",
    "DieboldLiForecaster",
    "export_factor_model",
]

#: relative eigenvalue floor below which a covariance direction counts as dead
SPECTRUM_FLOOR = 1e-12


def _as_curve(grid: Grid, x) -> Fn:
    """Accept an Fn or a bare value vector, always returning an Fn on grid."""
    if isinstance(x, Fn):
        if x.grid != grid:
            raise EstimationError("input curve is on a different grid than the model")
        return x
    return Fn(grid, np.asarray(x, dtype=float))


def _check_panel(panel, lag: int) -> CurvePanel:
    if not isinstance(panel, CurvePanel):
        raise EstimationError(f"fit expects a CurvePanel, got {type(panel).__name__}")
    if panel.n <= lag:
        raise EstimationError(
            f"panel has {panel.n} dates but the forecast lag is {lag}; "
            "need at least lag + 1"
        )
    return panel


def _check_positive_int(name: str, value) -> int:
    if int(value) != value or int(value) < 1:
        raise EstimationError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


class _CurveForecastMixin:
    """Shared predict plumbing: affine forecast from the fitted operator."""

    def predict(self, f_now) -> Fn:
        """Forecast the curve ``lag`` rows ahead of the given current curve."""
        check_is_fitted(self)
        f = _as_curve(self.grid_, f_now)
        centered = Fn(self.grid_, f.values - self.mean_curve_.values)
        return Fn(self.grid_, self.mean_curve_.values + self.rho_.apply(centered).values)


def _split_mean(panel: CurvePanel) -> tuple[CurvePanel, Fn]:
    """Centered view of the panel plus the mean curve forecasts pivot on."""
    if panel.is_centered:
        return panel, panel.mean_curve
    centered = center_panel(panel)
    return centered, centered.mean_curve


class PredictiveFactorFAR(_CurveForecastMixin, BaseEstimator):
    """Reduced-rank functional AR(1) estimated by predictive factors.

    The factors are the top eigenvectors of the pencil
    (cross-covariance' cross-covariance, covariance + alpha * identity):
    directions ranked by how much forecast mean squared error they
    remove, not by how much variance they carry. ``alpha`` is the
    Tikhonov shift that keeps the inversion well posed; alpha = 0 is
    accepted for exploration but warned about, because without
    regularization the estimator has no consistency guarantee.

    Parameters
    ----------
    n_factors : int, default 3
        Rank of the fitted operator.
    alpha : float, default 0.1
        Nonnegative regularization added to the covariance.
    lag : int, default 252
        Forecast horizon in panel rows; the autoregression is estimated
        directly at this lag.
    """

    def __init__(self, n_factors: int = 3, alpha: float = 0.1, lag: int = 252):
        self.n_factors = n_factors
        self.alpha = alpha
        self.lag = lag

    def fit(self, panel: CurvePanel, y=None):
        k = _check_positive_int("n_factors", self.n_factors)
        lag = _check_positive_int("lag", self.lag)
        alpha = float(self.alpha)
        if alpha < 0:
            raise EstimationError(f"alpha must be >= 0, got {alpha}")
        if alpha == 0:
            warnings.warn(
                "alpha = 0: unregularized predictive factors are not a "
                "consistent estimator; prefer a small positive alpha",
                UserWarning,
                stacklevel=2,
            )
        panel = _check_panel(panel, lag)
        if k > panel.grid.count:
            raise EstimationError(
                f"n_factors={k} exceeds the grid size {panel.grid.count}"
            )
        centered, mean_curve = _split_mean(panel)

        gamma11 = emp_cov(centered)
        gamma12, gamma21 = emp_crosscov(centered, lag)
        if alpha == 0:
            evals = np.linalg.eigvalsh(gamma11.mat)
            if evals[0] <= SPECTRUM_FLOOR * max(evals[-1], 0.0) or evals[-1] <= 0:
                raise EstimationError(
                    "empirical covariance is singular and alpha = 0; "
                    "set alpha > 0 to regularize the pencil"
                )
        m_op = gamma21 @ gamma12
        m_op = LinOp(panel.grid, 0.5 * (m_op.mat + m_op.mat.T), symmetric=True)
        n_op = gamma11.add_identity(alpha)

        eigen = solve_pencil(m_op, n_op, k)
        factors = eigen.vectors
        loadings = tuple(gamma12.apply(b) for b in factors)
        rho = LinOp.zero(panel.grid)
        for a, b in zip(loadings, factors):
            rho = rho + LinOp.outer(a, b)

        self.grid_ = panel.grid
        self.mean_curve_ = mean_curve
        self.factors_ = factors
        self.loadings_ = loadings
        self.eigenvalues_ = eigen.eigenvalues
        self.rho_ = rho
        self.gamma11_ = gamma11
        self.n_dates_ = panel.n
        return self


def _pca_operator(
    gamma11: LinOp, gamma12: LinOp, k: int
) -> tuple[LinOp, tuple[Fn, ...], tuple[Fn, ...], np.ndarray]:
    """Autoregression operator with the covariance inverted only on its
    top-k principal subspace, acting as zero on the complement.

    Returns (rho, factors, loadings, eigenvalues): the principal axes
    sign-pinned as curves, the operator applied to them, and the kept
    covariance eigenvalues.
    """
    grid = gamma11.grid
    evals, evecs = np.linalg.eigh(gamma11.mat)
    evals = evals[::-1]
    evecs = evecs[:, ::-1]
    alive = int(np.sum(evals > SPECTRUM_FLOOR * max(evals[0], 0.0)))
    if k > alive:
        raise EstimationError(
            f"n_factors={k} exceeds the {alive} numerically nonzero "
            "covariance eigenvalues"
        )

    u = evecs[:, :k]
    lam = evals[:k]
    # act as gamma12 gamma11^-1 on span(u), as zero off it
    c12 = u.T @ gamma12.mat @ u
    rho_mat = u @ c12 @ np.diag(1.0 / lam) @ u.T

    h = grid.spacing
    sign = np.sign(u[np.argmax(np.abs(u), axis=0), np.arange(k)])
    sign[sign == 0] = 1.0
    u = u * sign
    factors = tuple(Fn(grid, u[:, j] / np.sqrt(h)) for j in range(k))
    load_mat = rho_mat @ u
    loadings = tuple(Fn(grid, load_mat[:, j] / np.sqrt(h)) for j in range(k))
    return LinOp(grid, rho_mat), factors, loadings, lam


class PrincipalComponentFAR(_CurveForecastMixin, BaseEstimator):
    """Functional AR(1) with the covariance inverted only on its top
    principal subspace: the fitted operator acts as the full-rank
    estimate on the span of the leading covariance eigenvectors and as
    zero on the orthogonal complement.

    Parameters
    ----------
    n_factors : int, default 3
        Dimension of the principal subspace kept.
    lag : int, default 252
        Forecast horizon in panel rows.
    """

    def __init__(self, n_factors: int = 3, lag: int = 252):
        self.n_factors = n_factors
        self.lag = lag

    def fit(self, panel: CurvePanel, y=None):
        k = _check_positive_int("n_factors", self.n_factors)
        lag = _check_positive_int("lag", self.lag)
        panel = _check_panel(panel, lag)
        if k > panel.grid.count:
            raise EstimationError(
                f"n_factors={k} exceeds the grid size {panel.grid.count}"
            )
        centered, mean_curve = _split_mean(panel)

        gamma11 = emp_cov(centered)
        gamma12, _ = emp_crosscov(centered, lag)
        rho, factors, loadings, lam = _pca_operator(gamma11, gamma12, k)

        self.grid_ = panel.grid
        self.mean_curve_ = mean_curve
        self.factors_ = factors
        self.loadings_ = loadings
        self.eigenvalues_ = lam
        self.rho_ = rho
        self.gamma11_ = gamma11
        self.n_dates_ = panel.n
        return self


class RandomWalkForecaster(BaseEstimator):
    """Forecasts any horizon with today's curve, unchanged."""

    def fit(self, panel: CurvePanel, y=None):
        if not isinstance(panel, CurvePanel):
            raise EstimationError(
                f"fit expects a CurvePanel, got {type(panel).__name__}"
            )
        self.grid_ = panel.grid
        return self

    def predict(self, f_now) -> Fn:
        check_is_fitted(self)
        return _as_curve(self.grid_, f_now)


class HistoricalMeanForecaster(BaseEstimator):
    """Forecasts any horizon with the per-maturity average of the history."""

    def fit(self, panel: CurvePanel, y=None):
        if not isinstance(panel, CurvePanel):
            raise EstimationError(
                f"fit expects a CurvePanel, got {type(panel).__name__}"
            )
        if panel.is_centered:
            mean = panel.mean_curve.values + panel.rows.mean(axis=0)
        else:
            mean = panel.rows.mean(axis=0)
        self.grid_ = panel.grid
        self.mean_curve_ = Fn(panel.grid, mean)
        return self

    def predict(self, f_now=None) -> Fn:
        check_is_fitted(self)
        if f_now is not None:
            _as_curve(self.grid_, f_now)
        return self.mean_curve_


class DieboldLiForecaster(BaseEstimator):
    """Three-coefficient exponential-components benchmark.

    Each date's curve is summarized by ordinary least squares on the
    basis (1, exp(-decay * tau), decay * tau * exp(-decay * tau)) with
    tau the maturity expressed in ``maturity_unit_days``-day units, and
    each coefficient is advanced by its own lag-``lag`` AR(1) with
    intercept. Forecasting rebuilds the curve from the advanced
    coefficients, so forecasts always live in the three-dimensional
    basis span.

    Parameters
    ----------
    decay : float, default 0.0609
        Exponential decay per maturity unit (the classic calibration is
        per month).
    lag : int, default 252
        Forecast horizon in panel rows.
    maturity_unit_days : float, default 30.0
        Days per maturity unit; 30 turns day-denominated maturities into
        months.
    """

    def __init__(
        self, decay: float = 0.0609, lag: int = 252, maturity_unit_days: float = 30.0
    ):
        self.decay = decay
        self.lag = lag
        self.maturity_unit_days = maturity_unit_days

    def _basis(self, grid: Grid) -> np.ndarray:
        tau = grid.points / float(self.maturity_unit_days)
        lt = float(self.decay) * tau
        return np.column_stack([np.ones_like(tau), np.exp(-lt), lt * np.exp(-lt)])

    def fit(self, panel: CurvePanel, y=None):
        lag = _check_positive_int("lag", self.lag)
        if not float(self.decay) > 0:
            raise EstimationError(f"decay must be positive, got {self.decay}")
        if not float(self.maturity_unit_days) > 0:
            raise EstimationError(
                f"maturity_unit_days must be positive, got {self.maturity_unit_days}"
            )
        panel = _check_panel(panel, lag)
        if panel.is_centered:
            raise EstimationError(
                "fit the exponential-components model on raw curves, not "
                "centered ones (the level coefficient absorbs the mean)"
            )
        if panel.grid.count < 3:
            raise EstimationError(
                f"basis needs at least 3 maturities, got {panel.grid.count}"
            )
        design = self._basis(panel.grid)
        betas, _, rank, _ = np.linalg.lstsq(design, panel.rows.T, rcond=None)
        if rank < 3:
            raise EstimationError("exponential basis is collinear on this grid")
        betas = betas.T  # one (level, slope-ish, hump) triple per date

        ar = np.empty((3, 2))
        for j in range(3):
            x = np.column_stack([np.ones(panel.n - lag), betas[:-lag, j]])
            ar[j], _, _, _ = np.linalg.lstsq(x, betas[lag:, j], rcond=None)

        self.grid_ = panel.grid
        self.design_ = design
        self.beta_series_ = betas
        self.ar_coeffs_ = ar
        return self

    def coefficients_for(self, f_now) -> np.ndarray:
        """OLS basis coefficients of one curve."""
        check_is_fitted(self)
        f = _as_curve(self.grid_, f_now)
        beta, _, _, _ = np.linalg.lstsq(self.design_, f.values, rcond=None)
        return beta

    def predict(self, f_now) -> Fn:
        check_is_fitted(self)
        beta_now = self.coefficients_for(f_now)
        beta_next = self.ar_coeffs_[:, 0] + self.ar_coeffs_[:, 1] * beta_now
        return Fn(self.grid_, self.design_ @ beta_next)


def export_factor_model(est, outdir) -> None:
    """Write a fitted factor model (predictive-factor or principal-component)
    as CSV blocks plus a JSON metadata record.

    Files: mean_curve.csv, factors.csv and loadings.csv (rows = grid
    maturities, one column per factor), eigenvalues.csv (rank, value),
    model.json.
    """
    import csv
    from pathlib import Path

    check_is_fitted(est)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    grid = est.grid_
    k = len(est.factors_)

    with open(outdir / "mean_curve.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["maturity_days", "value"])
        for t, v in zip(grid.points, est.mean_curve_.values):
            writer.writerow([repr(float(t)), repr(float(v))])

    for name, funcs in (("factors", est.factors_), ("loadings", est.loadings_)):
        with open(outdir / f"{name}.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["maturity_days"] + [f"{name[:-1]}_{j + 1}" for j in range(k)]
            )
            for i, t in enumerate(grid.points):
                writer.writerow(
                    [repr(float(t))] + [repr(float(f.values[i])) for f in funcs]
                )

    with open(outdir / "eigenvalues.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "value"])
        for j, v in enumerate(est.eigenvalues_, start=1):
            writer.writerow([j, repr(float(v))])

    meta = {
        "kind": "predictive_factor"
        if isinstance(est, PredictiveFactorFAR)
        else "pca",
        "n_factors": k,
        "lag": int(est.lag),
        "grid": {
            "origin": grid.origin,
            "spacing": grid.spacing,
            "count": grid.count,
        },
        "n_dates": int(est.n_dates_),
    }
    if isinstance(est, PredictiveFactorFAR):
        meta["alpha"] = float(est.alpha)
    with open(outdir / "model.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
