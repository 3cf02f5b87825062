"""Exception hierarchy shared by all sclab modules.

Validation errors (bad arguments, bad schemas, domain violations) are kept
apart from numerical failures (lost contraction, diverged Newton, unstable
rank) so the CLI can map them to distinct exit codes.
"""


class SclabError(Exception):
    """Base class for every error raised by sclab."""


class ValidationError(SclabError):
    """Bad input: violated precondition, malformed config, wrong grid."""


class NumericalError(SclabError):
    """A computation ran but failed a numerical health check."""


# -- validation ------------------------------------------------------------

class DomainError(ValidationError):
    """Argument outside the mathematical domain of an operation."""


class LevelOutOfRange(ValidationError):
    """Requested scale level exceeds the configured maximum."""


class OverflowGuard(ValidationError):
    """Weight times truncation length would overflow double precision."""


class MarginExceeded(ValidationError):
    """Operation would consume the truncation margin of the grid."""


class NeckTooLong(ValidationError):
    """Gluing neck length R exceeds the truncation length of the grid."""


class GridMismatch(ValidationError):
    """Two discretized fields live on incompatible grids."""


class NotOnRetract(ValidationError):
    """Point is not on the retract within tolerance."""


class NotTransversal(ValidationError):
    """Constraint intersection is not transversal at the reference point."""


class NoIntersection(ValidationError):
    """No constraint intersection found inside the search neighborhood."""


class NotStable(ValidationError):
    """Surface combinatorics violate the component stability condition."""


class DerivativeMissing(ValidationError):
    """Operation requires an analytic derivative that was not supplied."""


class IncompatibleNeck(ValidationError):
    """Reparametrization family targets a neck length the grid cannot hold."""


class SplittingInvalid(ValidationError):
    """Kernel/cokernel splitting data fail their invertibility check."""


class SchemaError(ValidationError):
    """Config or report payload violates its schema.

    ``field`` carries the dotted path of the offending entry.
    """

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class IoError(ValidationError):
    """Filesystem failure while persisting or loading artifacts."""


# -- numerical failures ----------------------------------------------------

class NoContraction(NumericalError):
    """Measured contraction modulus is >= 1 on the stated neighborhood."""


class MaxIterExceeded(NumericalError):
    """Fixed-point iteration did not meet tolerance within the budget."""


class NewtonDiverged(NumericalError):
    """Damped Newton iteration failed to reduce the residual."""


class IllConditioned(NumericalError):
    """Linear solve encountered a hopeless condition number."""


class RankUnstable(NumericalError):
    """Singular values cluster at the rank threshold; rank is not decided."""
