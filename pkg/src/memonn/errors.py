"""Exception types shared across the toolkit."""


class MemonnError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(MemonnError, ValueError):
    """Malformed configuration or parameter file."""


class NumericOverflow(MemonnError, ArithmeticError):
    """A model evaluation produced a non-finite value."""


class NoEquilibrium(MemonnError):
    """No state equilibrium inside the search interval."""


class NoNdr(MemonnError):
    """The I-V curve has no negative differential resistance region."""


class NoOperatingPoint(MemonnError):
    """The load line does not intersect the I-V curve."""


class Diverged(MemonnError):
    """Integration left the configured state bounds."""

    def __init__(self, t: float, message: str = ""):
        self.t = t
        super().__init__(message or f"state diverged at t={t:.6g} s")


class NoOscillation(MemonnError):
    """A trajectory has too few threshold crossings to define a period."""


class FitFailed(MemonnError):
    """Least-squares Fourier fit was ill-conditioned."""


class NotConverged(MemonnError):
    """Phase differences were still drifting at the end of a run."""


class BadDimensions(MemonnError, ValueError):
    pass


class BadDuration(MemonnError, ValueError):
    pass
