"""Shared fixtures, including the Monte-Carlo experiments that both the
module tests and the acceptance suite consume. The expensive ones are
session-scoped so each simulation battery runs once per pytest session.
"""

from __future__ import annotations

import datetime as dt

import numpy as np
import pytest

from farcast import (
    CurvePanel,
    Grid,
    LinOp,
    PredictiveFactorFAR,
    SimSpec,
    cosine_basis,
    emp_cov,
    make_gaussian_kernel,
    population_operators,
    simulate_far,
    weekday_dates,
)
from farcast.backtest import BacktestSpec, parse_method, run_backtest


def rank1_sim(
    grid: Grid,
    persistence: float,
    lead_sigma: float,
    dead_sigmas: tuple,
    n: int,
    seed: int,
    burn_in: int = 300,
) -> SimSpec:
    """AR(1) whose operator acts only on the first basis function.

    The remaining basis directions receive noise but are completely
    unpredictable, which makes the first predictive factor and all
    population quantities closed-form in the basis coordinates.
    """
    basis = cosine_basis(grid, 1 + len(dead_sigmas))
    rho = persistence * LinOp.outer(basis[0], basis[0])
    noise = tuple(
        [(basis[0], lead_sigma)]
        + [(basis[i + 1], s) for i, s in enumerate(dead_sigmas)]
    )
    return SimSpec(grid=grid, rho=rho, noise=noise, n=n, burn_in=burn_in, seed=seed)


@pytest.fixture(scope="session")
def covariance_error_curve():
    """Median HS error of the empirical covariance versus sample size.

    20 seeds per n over n in {250, 1000, 4000} on a stationary panel
    with a smooth non-degenerate operator; returns the medians and the
    fitted log-log slope.
    """
    grid = Grid(origin=0.0, spacing=1.0, count=10)
    rho = make_gaussian_kernel(grid, 0.6, 3.0)
    basis = cosine_basis(grid, 5)
    noise = tuple((basis[i], 0.5 / (i + 1)) for i in range(5))
    ns = (250, 1000, 4000)
    medians = []
    for n in ns:
        dists = []
        for seed in range(20):
            spec = SimSpec(
                grid=grid, rho=rho, noise=noise, n=n, burn_in=300, seed=1000 + seed
            )
            pop = population_operators(spec)
            dists.append((emp_cov(simulate_far(spec)) - pop.gamma11).hs_norm())
        medians.append(float(np.median(dists)))
    slope = float(np.polyfit(np.log(ns), np.log(medians), 1)[0])
    return {"ns": ns, "medians": tuple(medians), "slope": slope}


@pytest.fixture(scope="session")
def factor_consistency_curve():
    """First-factor estimation error versus sample size, regularized at
    alpha(n) = (log n / n)^(1/3).

    The data-generating operator is rank-1 in a known basis direction,
    so the population factor, loading and top pencil eigenvalue are
    closed-form. Per n in {200, 800, 3200} and 20 seeds, records the
    median covariance-weighted squared factor error (sign-aligned), the
    median L2 loading error, and the median top eigenvalue at the
    largest n.
    """
    grid = Grid(origin=0.0, spacing=1.0, count=12)
    persistence, lead_sigma = 0.8, 1.0
    dead = (0.4, 0.4, 0.4, 0.4, 0.4)
    var_lead = lead_sigma**2 / (1.0 - persistence**2)
    lam_top = persistence**2 * var_lead

    probe = rank1_sim(grid, persistence, lead_sigma, dead, n=10, seed=0)
    pop = population_operators(probe)
    g11 = pop.gamma11.mat
    basis = cosine_basis(grid, 1 + len(dead))
    b_true = basis[0].values / np.sqrt(var_lead)
    a_true = persistence * np.sqrt(var_lead) * basis[0].values
    h = grid.spacing
    b_true_w = np.sqrt(h) * b_true

    ns = (200, 800, 3200)
    factor_err, loading_err, lam_hats = [], [], {n: [] for n in ns}
    for n in ns:
        alpha = (np.log(n) / n) ** (1.0 / 3.0)
        errs, lerrs = [], []
        for seed in range(20):
            spec = rank1_sim(
                grid, persistence, lead_sigma, dead, n=n, seed=2000 + seed
            )
            est = PredictiveFactorFAR(n_factors=1, alpha=alpha, lag=1).fit(
                simulate_far(spec)
            )
            b_hat_w = np.sqrt(h) * est.factors_[0].values
            a_hat = est.loadings_[0].values
            if float(b_hat_w @ g11 @ b_true_w) < 0:
                # free overall sign of the pair: align to the truth
                b_hat_w = -b_hat_w
                a_hat = -a_hat
            diff = b_hat_w - b_true_w
            errs.append(float(diff @ g11 @ diff))
            lerrs.append(float(np.sqrt(h) * np.linalg.norm(a_hat - a_true)))
            lam_hats[n].append(float(est.eigenvalues_[0]))
        factor_err.append(float(np.median(errs)))
        loading_err.append(float(np.median(lerrs)))
    return {
        "ns": ns,
        "factor_err_medians": tuple(factor_err),
        "loading_err_medians": tuple(loading_err),
        "lambda_top": lam_top,
        "lambda_hat_median": float(np.median(lam_hats[ns[-1]])),
    }


def _random_walk_panel(grid: Grid, n: int, step_sigma: float, seed: int) -> CurvePanel:
    """Pure random walk confined to the first basis direction."""
    basis = cosine_basis(grid, 1)
    rng = np.random.default_rng(seed)
    path = step_sigma * np.cumsum(rng.standard_normal(n))
    rows = np.outer(path, basis[0].values)
    return CurvePanel(grid=grid, dates=weekday_dates(dt.date(2005, 1, 3), n), rows=rows)


@pytest.fixture(scope="session")
def random_walk_backtest_ranking():
    """5-seed median mean-RMSE per method on pure random-walk panels."""
    grid = Grid(origin=0.0, spacing=1.0, count=6)
    methods = ("rw", "mean", "pf:k=1,alpha=0.1", "pca:k=1")
    per_method = {m: [] for m in methods}
    for seed in range(5):
        panel = _random_walk_panel(grid, n=2000, step_sigma=0.1, seed=100 + seed)
        spec = BacktestSpec(
            panel=panel,
            methods=tuple(parse_method(m) for m in methods),
            horizon=1,
            split=0.5,
            refit_every=25,
        )
        report = run_backtest(spec)
        for m in methods:
            per_method[m].append(report.mean_rmse(m))
    return {m: float(np.median(v)) for m, v in per_method.items()}


@pytest.fixture(scope="session")
def autoregressive_backtest_ranking():
    """5-seed median mean-RMSE per method on strongly autoregressive panels."""
    grid = Grid(origin=0.0, spacing=1.0, count=8)
    methods = ("pf:k=1,alpha=0.2", "rw", "mean")
    per_method = {m: [] for m in methods}
    for seed in range(5):
        spec_sim = rank1_sim(
            grid,
            persistence=0.9,
            lead_sigma=1.0,
            dead_sigmas=(0.5, 0.5, 0.5, 0.5),
            n=2000,
            seed=200 + seed,
        )
        panel = simulate_far(spec_sim)
        spec = BacktestSpec(
            panel=panel,
            methods=tuple(parse_method(m) for m in methods),
            horizon=1,
            split=0.5,
            refit_every=25,
        )
        report = run_backtest(spec)
        for m in methods:
            per_method[m].append(report.mean_rmse(m))
    return {m: float(np.median(v)) for m, v in per_method.items()}


@pytest.fixture()
def toy_reference_params():
    from farcast import ToyParams

    return ToyParams(a=0.9, b=0.6, var_eps=0.19, var_eta=1.28)


@pytest.fixture()
def small_panel() -> CurvePanel:
    """Tiny deterministic panel for plumbing tests."""
    grid = Grid(origin=90.0, spacing=30.0, count=4)
    rows = np.array(
        [
            [0.050, 0.052, 0.054, 0.055],
            [0.051, 0.053, 0.054, 0.056],
            [0.049, 0.050, 0.052, 0.053],
            [0.052, 0.054, 0.056, 0.058],
            [0.050, 0.051, 0.052, 0.052],
        ]
    )
    return CurvePanel(
        grid=grid, dates=weekday_dates(dt.date(2001, 2, 26), 5), rows=rows
    )
