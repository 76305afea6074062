"""Battle-Lemarie spline wavelet systems and weighted sequence-space norms.

The package is organized bottom-up:

* :mod:`blwave.bsplines` -- exact piecewise-polynomial kernel and B-splines;
* :mod:`blwave.symbol` -- autocorrelation symbols, their spectral
  factorization, and the scaling/wavelet masks;
* :mod:`blwave.orthonormal` -- truncated orthonormal generators (phi, psi)
  with certified tails;
* :mod:`blwave.localized` -- compactly supported generators, tensor systems,
  Gram machinery;
* :mod:`blwave.weights` -- Muckenhoupt weight models and the minimal-order
  rule;
* :mod:`blwave.seqspace` -- coefficient pyramids and the weighted b/f
  sequence norms;
* :mod:`blwave.transform` -- analysis/synthesis, convolution norms,
  atom/kernel certification, and the norm-equivalence experiment;
* :mod:`blwave.cli` -- the ``blwave`` command-line front end.
"""

from importlib.metadata import PackageNotFoundError, version

try:  # pragma: no cover - depends on installation mode
    __version__ = version("blwave")
except PackageNotFoundError:  # pragma: no cover
    __version__ = "0.0.0+unknown"

from .bsplines import PiecewisePolynomial, bspline, fourier_magnitude
from .errors import (
    BlwaveError,
    DegenerateFrame,
    GramSingular,
    InvalidParams,
    MomentDeficit,
    NonIntegrable,
    OrderTooLarge,
    OrderTooSmall,
    QuadratureBudgetExceeded,
    RootFindingFailed,
    ToleranceUnreachable,
)

__all__ = [
    "__version__",
    "PiecewisePolynomial",
    "bspline",
    "fourier_magnitude",
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
