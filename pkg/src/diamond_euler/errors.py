"""Exception hierarchy shared by every module.

Each class carries an ``exit_code`` used by the command-line front-end.
"""


class DiamondEulerError(Exception):
    exit_code = 1


class ParameterError(DiamondEulerError, ValueError):
    exit_code = 2


class ResolutionError(DiamondEulerError):
    exit_code = 3


class DivergenceError(DiamondEulerError):
    exit_code = 4


class NonConvergenceError(DiamondEulerError):
    exit_code = 4


class DataError(DiamondEulerError):
    exit_code = 5


class DomainViolationError(DiamondEulerError):
    exit_code = 6


class PreconditionError(ParameterError):
    pass
