"""Exception types raised across the toolkit."""


class SnailOptoError(Exception):
    """Base class for every error raised by this package."""


class NumericalError(SnailOptoError):
    """A numerical procedure could not produce a trustworthy result."""


class DegenerateMinimum(NumericalError):
    """Two global minima of the SNAIL potential have equal depth.

    This happens in the flux-qubit regime, where the quadratic expansion
    around a single well is meaningless.
    """

    def __init__(self, message, minima=(), multiwell=True):
        super().__init__(message)
        self.minima = tuple(minima)
        self.multiwell = multiwell


class InvalidCurvature(NumericalError):
    """Quadratic coefficient of the potential is not positive."""


class DegenerateDetuning(NumericalError):
    """MW-SAW detuning too small for the perturbative elimination."""


class NoZeroCrossing(NumericalError):
    """The effective Kerr coefficient keeps one sign on the search window."""


class TruncationTooSmall(NumericalError):
    """A Fock-space truncation leaks population into its top levels."""


class SingularGenerator(NumericalError):
    """The Lindblad steady-state system has no unique solution."""


class NonConvergence(NumericalError):
    """A fit stopped before meeting its convergence criterion.

    ``result`` holds the best point reached.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class SingularJacobian(NumericalError):
    """The Jacobian of a least-squares problem is rank deficient.

    ``result`` holds the point where the rank deficiency was detected.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class InsufficientLowPowerPoints(NumericalError):
    """Not enough points in the low-power region for a linear fit."""


class OracleFailure(NumericalError):
    """The forward model used inside a fit raised an error."""


class ConfigError(SnailOptoError):
    """Base class for configuration problems (CLI exit status 2)."""


class ParseError(ConfigError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SchemaError(ConfigError):
    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
