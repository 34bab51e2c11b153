"""Exception hierarchy for the solver.

Configuration problems (bad parameters, malformed config files) are kept
separate from numerical failures so the CLI can map them to distinct exit
codes.
"""


class CavityIsingError(Exception):
    """Base class for all package errors."""


class ParameterError(CavityIsingError, ValueError):
    """A physical parameter or size violates its invariants."""


class ConfigError(CavityIsingError, ValueError):
    """A run configuration does not parse or validate."""


class NumericalError(CavityIsingError, RuntimeError):
    """Base class for failures of a numerical procedure.

    ``operation`` names the operation that failed so callers (and the CLI
    exit path) can report it.
    """

    operation = "numerical"


class QuadratureError(NumericalError):
    """Momentum quadrature failed to converge (near the chain critical point)."""

    operation = "magnetization-quadrature"


class DerivativeError(NumericalError):
    """Finite-difference derivative did not converge.

    Carries the evaluation point so the failure can be located.
    """

    operation = "dsx_dbx"

    def __init__(self, message, *, delta=None, b_x=None, j=None, size=None):
        super().__init__(message)
        self.delta = delta
        self.b_x = b_x
        self.j = j
        self.size = size


class ResolutionError(NumericalError):
    """The fixed-point scan grid is too coarse to separate known-distinct roots."""

    operation = "find_fixed_points"


class CriticalPointNotFound(NumericalError):
    """No super-radiant branch exists in the searched drive range."""

    operation = "critical_points"


class DegenerateEigenvalueError(NumericalError):
    """Stability-matrix eigenvalues too close for a biorthogonal eigenbasis."""

    operation = "biorthogonal_eigvecs"


class FitWindowError(NumericalError):
    """Too few valid samples inside the exponent-fit window."""

    operation = "critical_exponent_fit"
