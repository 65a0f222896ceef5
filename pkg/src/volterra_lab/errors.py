"""Exception types shared across the package."""


class VolterraLabError(Exception):
    """Base class for all errors raised by this package."""


class InvalidOperator(VolterraLabError):
    """Operator model is malformed: non-square, non-finite, or empty."""


class InvalidParameter(VolterraLabError):
    """A scalar argument is outside its documented domain."""


class DimMismatch(VolterraLabError):
    """Operands have incompatible dimensions."""


class ZeroInWindow(VolterraLabError):
    """A log-scale fit window contains a zero (or negative) value."""


class InsufficientData(VolterraLabError):
    """Too few samples inside a fit window."""


class InvalidProfile(VolterraLabError):
    """A decay profile produced negative or non-finite values."""


class SingularPerturbation(VolterraLabError):
    """I + S is numerically singular."""


class InvalidH(VolterraLabError):
    """H is not Hermitian positive semidefinite within tolerance."""


class OutOfRange(VolterraLabError):
    """Bessel argument or order outside the supported range."""


class RootFindFailure(VolterraLabError):
    """Zero finder failed to converge; never silently returns."""


class OutOfBasis(VolterraLabError):
    """Requested angular order is not contained in the truncated basis."""


class InvalidSchmidtSpec(VolterraLabError):
    """Schmidt data is not orthonormal (or otherwise malformed)."""


class EigensolverFailure(VolterraLabError):
    """Dense eigensolver did not converge; carries the offending dimension."""


class ConfigError(VolterraLabError):
    """Experiment configuration is invalid; message names the field."""
