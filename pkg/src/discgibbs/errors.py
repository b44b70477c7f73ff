"""Exception types shared across the toolkit."""


class DiscGibbsError(Exception):
    """Base class for all toolkit errors."""


class DomainError(DiscGibbsError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ShapeError(DiscGibbsError, ValueError):
    """Array length / truncation mismatch."""


class ResolutionError(DiscGibbsError, RuntimeError):
    """Quadrature or basis resolution insufficient (self-test failed)."""


class SolverError(DiscGibbsError, RuntimeError):
    """ODE solver failed (no bracket, blow-up, no convergence)."""


class StepSizeError(SolverError):
    """Trajectory became stiff / non-finite at the configured step size."""


class StatisticsError(DiscGibbsError, ValueError):
    """Too few samples to form the requested statistic."""


class WindowError(DiscGibbsError, ValueError):
    """Dilation parameter outside the configured (delta_*, delta^*) window."""


class NotInNeighborhood(DiscGibbsError, RuntimeError):
    """Field too far from the soliton manifold for the decomposition map."""


class ConvergenceError(DiscGibbsError, RuntimeError):
    """Fixed-point iteration exceeded its iteration cap."""


class DivergentGaussianError(DiscGibbsError, ValueError):
    """A Gaussian product factor 1 + 2(1-eta)*lambda is nonpositive."""
