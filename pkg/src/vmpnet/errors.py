"""Exception taxonomy.

Guard errors (window, parity, state-space, budget) are distinguished from
parameter validation errors so the CLI can map them to distinct exit codes.
"""


class VmpNetError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(VmpNetError, ValueError):
    """A probability, weight vector or model parameter is out of range."""


class ParityError(VmpNetError, ValueError):
    """A vertex violates the x + t parity constraint of its sublattice."""


class WindowError(VmpNetError, ValueError):
    """A construction left its space-time window (never silently truncated)."""


class StateSpaceError(VmpNetError, ValueError):
    """An exact-enumeration oracle would exceed its state-space cap."""


class BudgetError(VmpNetError, ValueError):
    """An experiment exceeds its configured vertex/cost budget."""


class ReductionError(VmpNetError, RuntimeError):
    """Internal invariant of graph reduction violated."""


class GateFailure(VmpNetError, RuntimeError):
    """A statistical or exactness gate did not pass."""
