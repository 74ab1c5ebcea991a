"""Exception hierarchy shared by all ellipcav modules."""


class EllipcavError(Exception):
    """Base class for every error raised by the package."""


class DomainError(EllipcavError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ConfigError(EllipcavError, ValueError):
    """Invalid solver or run configuration."""


class NumericalError(EllipcavError, ArithmeticError):
    """Iteration failed to converge or produced non-finite values."""


class NotAResonanceError(NumericalError):
    """Singular-value minimum stays above the root tolerance."""


class ParityMismatchError(NumericalError):
    """The root found belongs to a different symmetry class than requested."""


class CollisionError(NumericalError):
    """Two tracked trajectories converged onto the same root."""


class EmptyChannelError(EllipcavError):
    """No Husimi weight is left below the critical line."""


class DegenerateInputError(DomainError):
    """Inputs are identical where distinct ones are required."""


class InconsistencyError(EllipcavError, ValueError):
    """Input data contradict the declared problem type."""
