"""Self-similar blowup laboratory for the focusing cubic wave equation in odd dimensions."""
__version__ = "0.1.0"

from .errors import (AssertionFailure, BlowupDetected, BracketError, ConfigError, ConvergenceError,
                     CubicWaveError, DomainError, ModulationDiverged, NonConvergedFit, PoleError,
                     ResolutionWarning, UnsupportedDimension)

__all__ = [
    "AssertionFailure", "BlowupDetected", "BracketError", "ConfigError", "ConvergenceError",
    "CubicWaveError", "DomainError", "ModulationDiverged", "NonConvergedFit", "PoleError",
    "ResolutionWarning", "UnsupportedDimension", "__version__",
]
