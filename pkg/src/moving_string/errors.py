"""Exception hierarchy shared by the solver modules."""


class StringModelError(Exception):
    """Base class for every error raised by this package."""


class ProfileError(StringModelError, ValueError):
    pass


class SpeedLimit(ProfileError):
    """The moving end reaches or exceeds the wave speed (|l'| >= 1)."""


class Collapse(ProfileError):
    """The string length becomes nonpositive inside the horizon."""


class NotReached(ProfileError):
    """beta(T) < L, so the transparent extinction time lies past the horizon."""


class NegativeDamping(StringModelError, ValueError):
    pass


class TransparentDamping(StringModelError, ValueError):
    """eta = 1 (or within the guard band) was passed to the spectral path."""


class DomainExceeded(StringModelError, ValueError):
    pass


class OutOfDomain(StringModelError, ValueError):
    pass


class SeedMismatch(StringModelError):
    pass


class RecursionDepth(StringModelError):
    pass


class QuadratureFailure(StringModelError, ArithmeticError):
    pass


class GridTooCoarse(StringModelError):
    pass


class SingularBoundary(StringModelError, ArithmeticError):
    pass


class InitialDataError(StringModelError, ValueError):
    pass


class ConfigError(StringModelError, ValueError):
    pass


class SeriesNotReal(StringModelError, ArithmeticError):
    """Conjugate-symmetric series left a non-negligible imaginary part."""
