"""Exception hierarchy shared across the package.

Two broad families matter to callers: configuration/usage problems
(``ConfigError`` and friends, CLI exit code 2) and numerical failures
(``NumericsError`` and friends, CLI exit code 3).  Physics-level
rejections -- asking for a quantity that is undefined for the requested
geometry or drive -- are configuration errors: the input was wrong, not
the arithmetic.
"""

__all__ = [
    "WgqedError",
    "ConfigError",
    "UnsupportedModelError",
    "DetectorPlacementError",
    "IllConditionedChannelError",
    "NumericsError",
    "DegeneratePoleError",
    "SingularMatchingError",
    "ConvergenceError",
]


class WgqedError(Exception):
    """Base class for everything raised deliberately by this package."""


class ConfigError(WgqedError):
    """Invalid or inconsistent configuration / request parameters."""


class UnsupportedModelError(ConfigError):
    """A documented model limitation (e.g. closed forms exist only for N=1)."""


class DetectorPlacementError(ConfigError):
    """Detector coordinate falls inside the qubit array."""


class IllConditionedChannelError(ConfigError):
    """Correlation normalization requested for a channel whose coherent
    amplitude vanishes (e.g. transmission at exact resonance)."""


class NumericsError(WgqedError):
    """Numerical routine failed to meet its accuracy contract."""


class DegeneratePoleError(NumericsError):
    """Two poles closer than the simple-pole separation threshold.

    Residue-based evaluation refuses to proceed; callers fall back to
    direct quadrature.
    """


class SingularMatchingError(NumericsError):
    """Wave-matching linear system is singular (evaluation at a real pole
    of the scattering problem, i.e. an exactly dark collective mode)."""


class ConvergenceError(NumericsError):
    """Iterative refinement or quadrature exhausted its budget before
    reaching the requested tolerance."""
