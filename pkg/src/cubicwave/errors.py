"""Exception and warning types shared by all modules."""


class CubicWaveError(Exception):
    """Base class for library errors."""


class DomainError(CubicWaveError, ValueError):
    """Point or parameter outside the region where a formula is defined."""


class ConfigError(CubicWaveError, ValueError):
    """Invalid grid sizes, schema violations or infeasible configurations."""


class UnsupportedDimension(CubicWaveError, NotImplementedError):
    """Requested dimension has no implemented formula."""


class NonConvergedFit(CubicWaveError, RuntimeError):
    """Log-linear fit is not affine within tolerance."""


class PoleError(CubicWaveError, ValueError):
    """Hypergeometric lower parameter is a non-positive integer."""


class ConvergenceError(CubicWaveError, RuntimeError):
    """Series or iteration failed to reach its target accuracy."""


class BlowupDetected(CubicWaveError, RuntimeError):
    """Evolution left the perturbative regime around the static profile."""

    def __init__(self, message, tau=None, state=None):
        super().__init__(message)
        self.tau = tau
        self.state = state


class ModulationDiverged(CubicWaveError, RuntimeError):
    """Newton solve for the rapidity left the admissible ball."""


class BracketError(CubicWaveError, ValueError):
    """Both ends of a shooting bracket classify identically."""


class AssertionFailure(CubicWaveError, AssertionError):
    """A checked invariant failed inside a CLI run."""


class ResolutionWarning(UserWarning):
    """Spectral coefficient tail exceeds the resolution threshold."""
