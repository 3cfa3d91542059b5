"""Exception hierarchy shared by all modules."""


class PaprcapError(Exception):
    """Base class for every error raised by this package."""


class InvalidPulse(PaprcapError, ValueError):
    """Malformed pulse specification (bad family/roll-off combination)."""


class UnsupportedFamily(PaprcapError, ValueError):
    pass


class ZeroArea(PaprcapError, ValueError):
    pass


class ResolutionTooCoarse(PaprcapError, RuntimeError):
    pass


class Diverged(PaprcapError, ArithmeticError):
    """The peak-superposition series does not converge for this pulse."""


class DivergedPulse(PaprcapError, ValueError):
    """A bound was requested for a pulse whose S functional diverged."""


class SpectralZeroInterior(PaprcapError, ValueError):
    pass


class RegimeError(PaprcapError, ValueError):
    pass


class NoSolution(PaprcapError, ValueError):
    """A transcendental equation has no root for the given arguments."""


class NormalizationMismatch(PaprcapError, ValueError):
    pass


class NonParametricFamily(PaprcapError, ValueError):
    pass


class NotConverged(PaprcapError, RuntimeError):
    pass


class GridTooCoarse(PaprcapError, RuntimeError):
    pass
