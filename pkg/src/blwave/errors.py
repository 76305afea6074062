"""Exception taxonomy shared across the library.

Every error raised on purpose by this package derives from :class:`BlwaveError`,
so callers (and the CLI dispatcher) can distinguish computational failures from
programming mistakes.  The CLI maps ``BlwaveError`` to exit code 1 and argument
validation problems to exit code 2.
"""

__all__ = [
    "BlwaveError",
    "InvalidParams",
    "OrderTooLarge",
    "OrderTooSmall",
    "RootFindingFailed",
    "ToleranceUnreachable",
    "DegenerateFrame",
    "NonIntegrable",
    "MomentDeficit",
    "GramSingular",
    "QuadratureBudgetExceeded",
]


class BlwaveError(Exception):
    """Base class for all errors raised by blwave."""


class InvalidParams(BlwaveError, ValueError):
    """A parameter is outside its documented domain (e.g. p <= 0)."""


class OrderTooLarge(BlwaveError):
    """Spline order beyond the supported range (n <= 12).

    Past that point double-precision separation of the smallest
    symbol root degrades and the factorization residual is no longer
    trustworthy.
    """


class OrderTooSmall(BlwaveError):
    """System order violates the minimal-order rule for the requested space."""


class RootFindingFailed(BlwaveError):
    """Symbol roots came out complex or positive: the symbol is corrupt."""


class ToleranceUnreachable(BlwaveError):
    """Requested truncation tolerance needs more series terms than the cap."""


class DegenerateFrame(BlwaveError):
    """Lower Riesz bound numerically zero; translates do not form a basis."""


class NonIntegrable(BlwaveError):
    """Weight mass of a cube is infinite (power exponent at or below -N)."""


class MomentDeficit(BlwaveError):
    """Mollifier vanishing-moment order is too small for the smoothness s."""


class GramSingular(BlwaveError):
    """A per-level Gram solve failed; the input system is not a Riesz basis."""


class QuadratureBudgetExceeded(BlwaveError):
    """Adaptive quadrature hit its subdivision budget before converging."""
