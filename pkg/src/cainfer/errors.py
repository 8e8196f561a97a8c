"""Exception types raised across the package."""


class CainferError(Exception):
    """Base class for all errors raised by cainfer."""


class OverlapError(CainferError, ValueError):
    """Arguments that must be pairwise disjoint share elements."""


class ForeignElementError(CainferError, ValueError):
    """A subset refers to a ground set other than the one being evaluated."""


class EmptySetError(CainferError, ValueError):
    pass


class SizeGuardError(CainferError, ValueError):
    """An exhaustive enumeration or dense table would exceed its size guard."""


class UnknownNodeError(CainferError, KeyError):
    pass


class CycleError(CainferError, ValueError):
    pass


class MissingAssumptionError(CainferError, ValueError):
    """Value-mode inference was asked for without the information it needs."""


class DegenerateConfigurationError(CainferError, ValueError):
    pass


class MarkovPreconditionError(CainferError, ValueError):
    """A DAG does not satisfy the local Markov condition required by a check."""
