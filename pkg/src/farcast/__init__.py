"""Forward-curve forecasting by predictive-factor functional autoregression.

The package treats a panel of interest-rate curves as draws of a random
function and fits a reduced-rank linear map from today's curve to the
curve a fixed horizon ahead. Factors are chosen by forecast-error
reduction (a regularized operator-pencil eigenproblem) rather than by
variance, and are benchmarked against principal-component, random-walk,
historical-mean and exponential-components forecasters under an
expanding-window backtest.
"""

from .exceptions import (
    BacktestError,
    EigenSolverError,
    EstimationError,
    FarcastError,
    GridMismatchError,
    IngestError,
    NotPositiveDefiniteError,
    SimulationError,
)
from .grid import Fn, Grid, WhitenedVec, dewhiten, inner, norm, whiten
from .operators import LinOp, emp_cov, emp_crosscov, read_kernel_csv, write_kernel_csv
from .pencil import DegeneracyWarning, PencilEigen, rayleigh, solve_pencil
from .ingest import (
    CurvePanel,
    DroppedDate,
    RawQuote,
    build_curve,
    build_panel,
    center_panel,
    difference_panel,
    parse_quotes,
    read_panel_csv,
    uncenter_panel,
    write_panel_csv,
)
from .toy import (
    ToyFirstFactor,
    ToyLosses,
    ToyParams,
    ToyPopulation,
    toy_first_factor,
    toy_grid,
    toy_losses,
    toy_population,
)
from .simulate import (
    PopulationOperators,
    SimSpec,
    cosine_basis,
    default_noise,
    innovation_covariance,
    make_gaussian_kernel,
    population_operators,
    simulate_far,
    weekday_dates,
)
from .estimators import (
    DieboldLiForecaster,
    HistoricalMeanForecaster,
    PredictiveFactorFAR,
    PrincipalComponentFAR,
    RandomWalkForecaster,
    export_factor_model,
)
from .backtest import (
    BacktestReport,
    BacktestSpec,
    MethodSpec,
    eigenvalue_report,
    parse_method,
    rmse_by_maturity,
    run_backtest,
    write_eigenvalues_csv,
    write_rmse_csv,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "FarcastError",
    "GridMismatchError",
    "IngestError",
    "EigenSolverError",
    "NotPositiveDefiniteError",
    "EstimationError",
    "SimulationError",
    "BacktestError",
    # grids and functions
    "Grid",
    "Fn",
    "WhitenedVec",
    "inner",
    "norm",
    "whiten",
    "dewhiten",
    # operators
    "LinOp",
    "emp_cov",
    "emp_crosscov",
    "write_kernel_csv",
    "read_kernel_csv",
    # pencil
    "PencilEigen",
    "DegeneracyWarning",
    "solve_pencil",
    "rayleigh",
    # ingestion
    "RawQuote",
    "CurvePanel",
    "DroppedDate",
    "parse_quotes",
    "build_curve",
    "build_panel",
    "center_panel",
    "uncenter_panel",
    "difference_panel",
    "write_panel_csv",
    "read_panel_csv",
    # toy oracle
    "ToyParams",
    "ToyPopulation",
    "ToyLosses",
    "ToyFirstFactor",
    "toy_grid",
    "toy_population",
    "toy_losses",
    "toy_first_factor",
    # simulation
    "SimSpec",
    "PopulationOperators",
    "make_gaussian_kernel",
    "cosine_basis",
    "default_noise",
    "simulate_far",
    "innovation_covariance",
    "population_operators",
    "weekday_dates",
    # estimators
    "PredictiveFactorFAR",
    "PrincipalComponentFAR",
    "RandomWalkForecaster",
    "HistoricalMeanForecaster",
    "DieboldLiForecaster",
    "export_factor_model",
    # backtest
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
