"""Exception types raised across the package."""


class MomentumError(Exception):
    """Base class for all library errors."""


class InputError(MomentumError, ValueError):
    """Malformed or out-of-range arguments."""


class DomainError(InputError):
    """A coordinate lies outside the domain of the object being evaluated."""


class SingularInputError(InputError):
    """Arguments hit a pole or a degenerate point of a formula."""


class BracketError(MomentumError, ValueError):
    """A root bracket does not contain a sign change."""


class InvariantError(MomentumError, ValueError):
    """A structural invariant (Hermiticity, normalization, ...) is violated."""


class NoBoundStateError(InputError):
    """The requested boundary parameter supports no bound state."""


class SectorError(InputError):
    """A two-component wave is not in the required projector sector."""


class RepresentationError(InputError):
    """A state cannot be written in the finite eigenbasis an operation needs."""


class SolverError(MomentumError, ArithmeticError):
    """An iterative solver failed to converge or to bracket a root."""


class TruncationError(MomentumError, ArithmeticError):
    """A finite eigenbasis expansion leaves too large a residual."""
