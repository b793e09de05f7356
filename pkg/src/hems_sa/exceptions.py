"""Exception hierarchy shared by every module."""


class HemsError(Exception):
    """Base class for all errors raised by hems_sa."""


class DataError(HemsError, ValueError):
    """Input data or configuration is invalid."""


class MalformedFile(DataError):
    pass


class NegativeValue(DataError):
    pass


class OffsetTooLarge(DataError):
    pass


class PlanMismatch(DataError):
    pass


class ConfigError(DataError):
    pass


class ComputationError(HemsError, RuntimeError):
    """A numerical routine could not produce a result."""


class Infeasible(ComputationError):
    pass


class SolverFailure(ComputationError):
    pass


class DimensionUnsupported(ComputationError, ValueError):
    pass


class VarianceZero(ComputationError):
    pass
