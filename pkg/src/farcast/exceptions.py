"""Exception hierarchy shared across the package.

Every error raised by farcast derives from :class:`FarcastError`; the CLI
maps each subclass to a distinct exit code.
"""


class FarcastError(Exception):
    """Base class for all farcast errors."""


class GridMismatchError(FarcastError):
    """Two objects live on different maturity grids."""


class IngestError(FarcastError):
    """Raw quote data could not be parsed or turned into a panel."""


class EigenSolverError(FarcastError):
    """The operator-pencil eigensolver could not run on its inputs."""


class NotPositiveDefiniteError(EigenSolverError):
    """The right-hand operator of a pencil is not positive definite."""


class EstimationError(FarcastError):
    """A forecaster could not be fit on the given panel."""


class SimulationError(FarcastError):
    """A synthetic-panel simulation was misconfigured or failed to converge."""


class BacktestError(FarcastError):
    """The out-of-sample evaluation protocol could not be run."""
