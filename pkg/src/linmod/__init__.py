"""Linear models built on hand-written factorizations.

Submodules: ``matrix`` (primitives), ``decomp`` (QR, LQ, UTV, CR, spectral,
SVD), ``ls`` (least squares, projections, pseudo-inverse, GLS, ridge),
``inference`` (estimators, ANOVA, F tests, Monte Carlo), ``bayes``
(conjugate posteriors and Gibbs samplers), ``gp`` (kernels and GP
regression) and ``cli``. Hot loops live in ``kernels`` with numba and numpy
implementations.
"""
from .errors import LinmodError, RankDeficientError, ShapeError, SingularMatrixError, ValidationError
from .rng import RngStream

__version__ = "0.1.0"

__all__ = [
    "LinmodError",
    "RankDeficientError",
    "RngStream",
    "ShapeError",
    "SingularMatrixError",
    "ValidationError",
]
