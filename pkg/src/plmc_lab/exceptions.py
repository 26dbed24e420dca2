"""Exception types raised across the package."""


class DimensionError(ValueError):
    """A point or vector does not match the ambient dimension."""


class OutsideBodyError(ValueError):
    """A point expected to lie in a convex body does not."""


class ConvergenceError(RuntimeError):
    """An iterative inner solver exhausted its iteration budget."""


class HypothesisError(ValueError):
    """Parameters violate a hypothesis needed for a bound to apply."""


class ScheduleInfeasible(ValueError):
    """No step size / step count pair satisfies the requested accuracy."""
