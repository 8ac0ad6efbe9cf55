"""Pseudo out-of-sample evaluation: expanding-window refits, fixed-horizon
forecasts, and RMSE-by-maturity curves per method.

Every method is evaluated on the identical set of forecast origins. From
each origin the training window is all rows up to and including it; the
forecast target sits ``horizon`` rows later. Model-based methods refit
every ``refit_every`` origins and reuse the last fitted model in
between (always forecasting from the current curve); the random-walk
and historical-mean benchmarks are refit at every origin regardless,
which makes their reports invariant to ``refit_every`` by construction.
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import BacktestError, FarcastError
from .grid import Fn
from .ingest import CurvePanel
from .estimators import (
    DieboldLiForecaster,
    HistoricalMeanForecaster,
    PredictiveFactorFAR,
    PrincipalComponentFAR,
    RandomWalkForecaster,
)

__all__ = [
    "MethodSpec",
    "parse_method",
    "BacktestSpec",
    "BacktestReport",
    "run_backtest",
    "rmse_by_maturity",
    "eigenvalue_report",
    "write_rmse_csv",
    "write_eigenvalues_csv",
]

#: centered training rows below this relative size count as "no signal"
DEGENERATE_TOL = 1e-12

_METHOD_DEFAULTS = {
    "pf": {"k": 3, "alpha": 0.1},
    "pca": {"k": 3},
    "rw": {},
    "mean": {},
    "dl": {"lambda": 0.0609, "unit": 30.0},
}


@dataclass(frozen=True)
class MethodSpec:
    """One forecasting method plus its parameters, e.g. pf:k=3,alpha=0.1."""

    kind: str
    params: dict
    label: str

    def build(self, lag: int):
        p = self.params
        if self.kind == "pf":
            return PredictiveFactorFAR(n_factors=p["k"], alpha=p["alpha"], lag=lag)
        if self.kind == "pca":
            return PrincipalComponentFAR(n_factors=p["k"], lag=lag)
        if self.kind == "rw":
            return RandomWalkForecaster()
        if self.kind == "mean":
            return HistoricalMeanForecaster()
        if self.kind == "dl":
            return DieboldLiForecaster(
                decay=p["lambda"], lag=lag, maturity_unit_days=p["unit"]
            )
        raise ValueError(f"unknown method kind {self.kind!r}")


def parse_method(text: str) -> MethodSpec:
    """Parse a method string: kind[:key=value,...].

    Kinds: pf (k, alpha), pca (k), rw, mean, dl (lambda, unit).
    """
    head, _, tail = text.strip().partition(":")
    kind = head.strip()
    if kind not in _METHOD_DEFAULTS:
        raise ValueError(
            f"unknown method {kind!r}; expected one of {sorted(_METHOD_DEFAULTS)}"
        )
    params = dict(_METHOD_DEFAULTS[kind])
    if tail:
        for part in tail.split(","):
            key, sep, value = part.partition("=")
            key = key.strip()
            if not sep or key not in params:
                raise ValueError(
                    f"bad parameter {part!r} for method {kind!r}; "
                    f"allowed: {sorted(params) or 'none'}"
                )
            try:
                params[key] = int(value) if key == "k" else float(value)
            except ValueError:
                raise ValueError(f"bad value {value!r} for {kind}:{key}") from None
    return MethodSpec(kind=kind, params=params, label=text.strip())


@dataclass(frozen=True)
class BacktestSpec:
    """A full evaluation run: panel, horizon, split, methods, refit cadence."""

    panel: CurvePanel
    methods: tuple[MethodSpec, ...]
    horizon: int = 252
    split: float | dt.date = 0.5
    refit_every: int = 1

    def __post_init__(self):
        if self.panel.is_centered:
            raise BacktestError("backtest expects the raw (un-centered) panel")
        methods = tuple(self.methods)
        if not methods:
            raise BacktestError("need at least one method")
        labels = [m.label for m in methods]
        if len(set(labels)) != len(labels):
            raise BacktestError(f"duplicate method labels in {labels}")
        if self.horizon < 1:
            raise BacktestError(f"horizon must be >= 1, got {self.horizon}")
        if self.refit_every < 1:
            raise BacktestError(f"refit_every must be >= 1, got {self.refit_every}")
        object.__setattr__(self, "methods", methods)

    def initial_train_size(self) -> int:
        n = self.panel.n
        if isinstance(self.split, dt.date):
            size = int(np.searchsorted(
                np.array([d.toordinal() for d in self.panel.dates]),
                self.split.toordinal(),
                side="right",
            ))
        else:
            frac = float(self.split)
            if not 0.0 < frac < 1.0:
                raise BacktestError(f"split fraction must be in (0, 1), got {frac}")
            size = int(np.floor(frac * n))
        if size <= self.horizon:
            raise BacktestError(
                f"initial training window of {size} rows does not exceed the "
                f"horizon {self.horizon}"
            )
        if size > n - self.horizon:
            raise BacktestError(
                f"no forecast origin: initial window {size} of {n} rows leaves "
                f"no row {self.horizon} steps ahead"
            )
        return size


@dataclass(frozen=True)
class BacktestReport:
    """Per-method RMSE curves over a shared origin set."""

    grid: object
    labels: tuple[str, ...]
    rmse: dict
    n_forecasts: int
    origins: tuple[dt.date, ...]
    horizon: int
    eigenvalues: dict = field(default_factory=dict)

    def mean_rmse(self, label: str) -> float:
        """RMSE averaged across maturities, for coarse method ranking."""
        return float(np.mean(self.rmse[label].values))


def rmse_by_maturity(errors: Sequence[Fn]) -> Fn:
    """Pointwise root mean squared error over a list of error curves."""
    errors = list(errors)
    if not errors:
        raise BacktestError("cannot take RMSE of zero forecasts")
    grid = errors[0].grid
    stacked = np.empty((len(errors), grid.count))
    for i, e in enumerate(errors):
        if e.grid != grid:
            raise BacktestError("error curves live on different grids")
        stacked[i] = e.values
    return Fn(grid, np.sqrt(np.mean(stacked**2, axis=0)))


def eigenvalue_report(model) -> np.ndarray:
    """Descending pencil eigenvalues of a fitted predictive-factor model."""
    if not isinstance(model, PredictiveFactorFAR):
        raise ValueError("eigenvalue report requires a predictive-factor model")
    return np.asarray(model.eigenvalues_)


def _slice_panel(panel: CurvePanel, end: int) -> CurvePanel:
    return CurvePanel(grid=panel.grid, dates=panel.dates[:end], rows=panel.rows[:end])


def _is_degenerate(rows: np.ndarray) -> bool:
    centered = rows - rows.mean(axis=0)
    return float(np.max(np.abs(centered))) <= DEGENERATE_TOL * (
        1.0 + float(np.max(np.abs(rows)))
    )


def run_backtest(spec: BacktestSpec) -> BacktestReport:
    """Run the expanding-window protocol and aggregate RMSE curves.

    A fit failure at any origin aborts the run with the origin date in
    the error. Constant training windows (no signal after centering) do
    not abort factor methods; they fall back to the mean forecast there.
    """
    panel = spec.panel
    n = panel.n
    first_origin = spec.initial_train_size() - 1
    last_origin = n - spec.horizon - 1
    origins = range(first_origin, last_origin + 1)

    models: dict[str, object] = {}
    final_eigs: dict[str, np.ndarray] = {}
    sq_err = {m.label: np.zeros(panel.grid.count) for m in spec.methods}

    for step, t in enumerate(origins):
        f_now = panel.row_fn(t)
        realized = panel.rows[t + spec.horizon]
        for method in spec.methods:
            always_refit = method.kind in ("rw", "mean")
            due = always_refit or step % spec.refit_every == 0
            if due or method.label not in models:
                train = _slice_panel(panel, t + 1)
                try:
                    if method.kind in ("pf", "pca") and _is_degenerate(train.rows):
                        model = HistoricalMeanForecaster().fit(train)
                        if method.kind == "pf":
                            final_eigs[method.label] = np.zeros(method.params["k"])
                    else:
                        model = method.build(spec.horizon).fit(train)
                        if method.kind == "pf":
                            final_eigs[method.label] = np.asarray(model.eigenvalues_)
                except FarcastError as exc:
                    raise BacktestError(
                        f"method {method.label!r} failed to fit at origin "
                        f"{panel.dates[t].isoformat()}: {exc}"
                    ) from exc
                models[method.label] = model
            forecast = models[method.label].predict(f_now)
            sq_err[method.label] += (forecast.values - realized) ** 2

    count = len(origins)
    rmse = {
        label: Fn(panel.grid, np.sqrt(total / count))
        for label, total in sq_err.items()
    }
    return BacktestReport(
        grid=panel.grid,
        labels=tuple(m.label for m in spec.methods),
        rmse=rmse,
        n_forecasts=count,
        origins=tuple(panel.dates[t] for t in origins),
        horizon=spec.horizon,
        eigenvalues=final_eigs,
    )


def write_rmse_csv(report: BacktestReport, path) -> None:
    """Write `maturity_days,<method>,...` with one row per grid maturity."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["maturity_days"] + list(report.labels))
        for i, t in enumerate(report.grid.points):
            writer.writerow(
                [repr(float(t))]
                + [repr(float(report.rmse[lab].values[i])) for lab in report.labels]
            )


def write_eigenvalues_csv(report: BacktestReport, path) -> None:
    """Write the final-fit pencil eigenvalues of the predictive-factor
    methods: `rank,value` for a single such method, one labeled column
    per method otherwise."""
    if not report.eigenvalues:
        raise BacktestError("report has no predictive-factor eigenvalues")
    labels = [lab for lab in report.labels if lab in report.eigenvalues]
    depth = max(len(report.eigenvalues[lab]) for lab in labels)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if len(labels) == 1:
            writer.writerow(["rank", "value"])
        else:
            writer.writerow(["rank"] + labels)
        for i in range(depth):
            row = [i + 1]
            for lab in labels:
                vals = report.eigenvalues[lab]
                row.append(repr(float(vals[i])) if i < len(vals) else "")
            writer.writerow(row)
