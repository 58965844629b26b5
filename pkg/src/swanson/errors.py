"""Exception hierarchy shared across the package.

Each family maps onto one CLI exit code: configuration problems exit with 2,
domain mismatches with 3 and numerical failures with 4.
"""


class SwansonError(Exception):
    exit_code = 4


class ConfigError(SwansonError, ValueError):
    exit_code = 2


class DomainMismatch(SwansonError):
    """An analytic spectral law was requested on a domain it does not cover."""

    exit_code = 3


class NumericalFailure(SwansonError):
    exit_code = 4


class ComplexFrequency(ConfigError):
    pass


class NonPositiveMass(ConfigError):
    pass


class QuadratureFailure(NumericalFailure):
    pass


class Inconclusive(NumericalFailure):
    pass


class OutOfRange(NumericalFailure, ValueError):
    pass


class SeriesNonConvergence(NumericalFailure):
    pass


class InvalidRegime(NumericalFailure, ValueError):
    pass


class RootBracketFailure(NumericalFailure):
    pass


class ParityOrderViolation(NumericalFailure):
    pass


class TruncationWarning(UserWarning):
    pass
