"""Densities of the chi-square, t and F families and the F distribution function.

All functions accept scalars or arrays and return the same shape.
"""
import math

import numpy as np

from . import kernels
from .errors import ValidationError

BETAINC_TOL = 1e-12
BETAINC_MAX_ITER = 300


def _dof(v, name):
    if not (np.isfinite(v) and v >= 1):
        raise ValidationError(f"{name} degrees of freedom must be >= 1, got {v}")
    return float(v)


def _out(x, values):
    return float(values) if np.ndim(x) == 0 else values


def pdf_chi2(x, p):
    p = _dof(p, "chi-square")
    xs = np.asarray(x, dtype=np.float64)
    k = p / 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        logd = (k - 1.0) * np.log(xs) - xs / 2.0 - k * math.log(2.0) - math.lgamma(k)
        d = np.where(xs > 0, np.exp(logd), 0.0)
    if p == 2:
        d = np.where(xs == 0, 0.5, d)
    return _out(x, d)


def pdf_t(x, n):
    n = _dof(n, "t")
    xs = np.asarray(x, dtype=np.float64)
    logc = math.lgamma((n + 1) / 2) - math.lgamma(n / 2) - 0.5 * math.log(n * math.pi)
    return _out(x, np.exp(logc - (n + 1) / 2 * np.log1p(xs * xs / n)))


def pdf_f(x, n, d):
    n = _dof(n, "F numerator")
    d = _dof(d, "F denominator")
    xs = np.asarray(x, dtype=np.float64)
    lbeta = math.lgamma(n / 2) + math.lgamma(d / 2) - math.lgamma((n + d) / 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        logd = (
            (n / 2) * math.log(n / d)
            + (n / 2 - 1) * np.log(xs)
            - (n + d) / 2 * np.log1p(n * xs / d)
            - lbeta
        )
        out = np.where(xs > 0, np.exp(logd), 0.0)
    if n == 2:
        out = np.where(xs == 0, 1.0, out)
    elif n < 2:
        out = np.where(xs == 0, np.inf, out)
    return _out(x, out)


def betainc(a, b, x):
    """Regularized incomplete beta ``I_x(a, b)`` by continued fraction."""
    if not (a > 0 and b > 0):
        raise ValidationError(f"betainc needs a, b > 0, got ({a}, {b})")
    xs = np.asarray(x, dtype=np.float64)
    out, worst = kernels.betainc(a, b, xs.ravel(), BETAINC_TOL, BETAINC_MAX_ITER)
    if worst > BETAINC_MAX_ITER:
        raise ArithmeticError(f"incomplete beta continued fraction did not converge in {BETAINC_MAX_ITER} terms")
    return _out(x, out.reshape(xs.shape))


def cdf_f(x, n, d):
    """``P[F <= x]`` for ``F ~ F(n, d)``; negative ``x`` gives 0."""
    n = _dof(n, "F numerator")
    d = _dof(d, "F denominator")
    xs = np.asarray(x, dtype=np.float64)
    if np.any(np.isnan(xs)):
        raise ValidationError("cdf_f argument is NaN")
    pos = np.clip(xs, 0.0, None)
    with np.errstate(invalid="ignore"):
        z = np.where(np.isinf(pos), 1.0, n * pos / (n * pos + d))
    return _out(x, np.asarray(betainc(n / 2, d / 2, z)))


def sf_f(x, n, d):
    """Upper tail ``P[F >= x]``, evaluated on the complementary beta to keep small p-values accurate."""
    n = _dof(n, "F numerator")
    d = _dof(d, "F denominator")
    xs = np.asarray(x, dtype=np.float64)
    if np.any(np.isnan(xs)):
        raise ValidationError("sf_f argument is NaN")
    pos = np.clip(xs, 0.0, None)
    with np.errstate(invalid="ignore", divide="ignore"):
        w = np.where(np.isinf(pos), 0.0, d / (d + n * pos))
    return _out(x, np.asarray(betainc(d / 2, n / 2, w)))
