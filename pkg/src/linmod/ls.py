"""Least-squares solvers, projections, pseudo-inverses and GLS."""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .decomp import cr, qr_householder, spectral_symmetric, svd, ulv
from .errors import RankDeficientError, ShapeError, SingularMatrixError, ValidationError
from .matrix import as_matrix, as_vector, rank, rank_tolerance, solve_triangular

PD_RTOL = 1e-10


@dataclass(frozen=True)
class LsFit:
    beta_hat: np.ndarray
    fitted: np.ndarray
    residuals: np.ndarray
    sse: float
    dof: int
    rank: int
    method: str

    @property
    def n(self):
        return self.fitted.size

    @property
    def p(self):
        return self.beta_hat.size


@dataclass(frozen=True)
class Projector:
    h: np.ndarray
    subspace_rank: int
    metric: Optional[np.ndarray] = None  # None means the identity metric


@dataclass(frozen=True)
class PseudoInverse:
    x_plus: np.ndarray
    penrose_residuals: tuple


def _xy(x, y):
    x = as_matrix(x)
    y = as_vector(y)
    if x.shape[0] != y.size:
        raise ShapeError(f"X has {x.shape[0]} rows but y has {y.size} entries")
    return x, y


def _fit(x, y, beta, r, method, sse=None):
    fitted = x @ beta
    resid = y - fitted
    if sse is None:
        sse = float(resid @ resid)
    return LsFit(beta, fitted, resid, sse, x.shape[0] - r, r, method)


def _require_full_rank(x, what):
    r = rank(x)
    if r < x.shape[1]:
        raise RankDeficientError(
            f"{what} needs full column rank; X has rank {r} < {x.shape[1]} (use ols_svd or ols_utv)",
            rank=r,
            cols=x.shape[1],
        )


def solve_qr(a, b):
    """Solve the square system ``A x = b`` through a Householder QR of ``A``."""
    a = as_matrix(a, "a")
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"square system expected, got {a.shape}")
    f = qr_householder(a)
    rhs = f.q.T @ np.asarray(b, dtype=np.float64)
    try:
        return solve_triangular(f.r, rhs, "upper", tol=rank_tolerance(a) * 1e-3)
    except SingularMatrixError as exc:
        raise SingularMatrixError(f"matrix is singular (pivot {exc.index})", index=exc.index) from None


def inverse(a):
    a = as_matrix(a, "a")
    return solve_qr(a, np.eye(a.shape[0]))


def ols_normal(x, y) -> LsFit:
    """Solve the normal equation ``X^T X beta = X^T y``."""
    x, y = _xy(x, y)
    _require_full_rank(x, "ols_normal")
    beta = solve_qr(x.T @ x, x.T @ y)
    return _fit(x, y, beta, x.shape[1], "normal")


def ols_qr(x, y) -> LsFit:
    """Back-substitute ``R1 beta = c`` with ``c`` the first p entries of ``Q^T y``."""
    x, y = _xy(x, y)
    n, p = x.shape
    if n < p:
        raise RankDeficientError(f"ols_qr needs rows >= cols, got {x.shape}", rank=n, cols=p)
    f = qr_householder(x, mode="full")
    qty = f.q.T @ y
    try:
        beta = solve_triangular(f.r[:p, :p], qty[:p], "upper", tol=rank_tolerance(x))
    except SingularMatrixError as exc:
        raise RankDeficientError(
            f"R1 pivot {exc.index} is ~0: X is rank deficient (use ols_svd or ols_utv)", cols=p
        ) from None
    d = qty[p:]
    return _fit(x, y, beta, p, "qr", sse=float(d @ d))


def ols_utv(x, y) -> LsFit:
    """Minimal-norm least squares through a full ULV decomposition."""
    x, y = _xy(x, y)
    f = ulv(x)
    r = f.rank
    c = (f.u.T @ y)[:r]
    e = solve_triangular(f.t11, c, "lower", tol=0.0) if r else np.zeros(0)
    beta = f.v.T @ np.concatenate([e, np.zeros(x.shape[1] - r)])
    return _fit(x, y, beta, r, "utv")


def ols_svd(x, y) -> LsFit:
    """``beta = sum_i (u_i^T y / sigma_i) v_i`` over the nonzero singular values."""
    x, y = _xy(x, y)
    s = svd(x, mode="reduced")
    r = s.rank
    coef = (s.u[:, :r].T @ y) / s.sigma[:r]
    beta = s.v[:, :r] @ coef
    return _fit(x, y, beta, r, "svd")


_SOLVERS = {"normal": ols_normal, "qr": ols_qr, "utv": ols_utv, "svd": ols_svd}


def ols(x, y, method="qr") -> LsFit:
    try:
        fn = _SOLVERS[method]
    except KeyError:
        raise ValidationError(f"unknown method {method!r}; choose from {sorted(_SOLVERS)}") from None
    return fn(x, y)


def hat_matrix(x) -> Projector:
    """``H = X (X^T X)^{-1} X^T``, the orthogonal projector onto C(X)."""
    x = as_matrix(x)
    _require_full_rank(x, "hat_matrix")
    h = x @ solve_qr(x.T @ x, x.T)
    return Projector(h=h, subspace_rank=x.shape[1])


def projector_from_pinv(x) -> Projector:
    """``X X^+``: the orthogonal projector onto C(X) for any rank."""
    x = as_matrix(x)
    s = svd(x)
    u = s.u[:, : s.rank]
    return Projector(h=u @ u.T, subspace_rank=s.rank)


def penrose_residuals(x, xp):
    """Frobenius residuals of the four Penrose conditions."""
    xxp = x @ xp
    xpx = xp @ x
    return (
        float(np.linalg.norm(xxp @ x - x)),
        float(np.linalg.norm(xpx @ xp - xp)),
        float(np.linalg.norm(xxp.T - xxp)),
        float(np.linalg.norm(xpx.T - xpx)),
    )


def pinv(x) -> PseudoInverse:
    """Moore-Penrose inverse ``V Sigma^+ U^T``."""
    x = as_matrix(x)
    s = svd(x)
    r = s.rank
    xp = (s.v[:, :r] / s.sigma[:r]) @ s.u[:, :r].T
    return PseudoInverse(x_plus=xp, penrose_residuals=penrose_residuals(x, xp))


def pinv_cr(x) -> PseudoInverse:
    """Pseudo-inverse from the CR factors: ``R^T (R R^T)^{-1} (C^T C)^{-1} C^T``."""
    x = as_matrix(x)
    f = cr(x)
    if f.rank == 0:
        xp = np.zeros((x.shape[1], x.shape[0]))
    else:
        c, r = f.c, f.r_factor
        xp = r.T @ solve_qr(r @ r.T, solve_qr(c.T @ c, c.T))
    return PseudoInverse(x_plus=xp, penrose_residuals=penrose_residuals(x, xp))


def check_positive_definite(sigma, name="sigma"):
    """Validate a symmetric PD matrix; returns its spectral factors."""
    sigma = as_matrix(sigma, name)
    if sigma.shape[0] != sigma.shape[1]:
        raise ShapeError(f"{name} must be square, got {sigma.shape}")
    try:
        s = spectral_symmetric(sigma)
    except ValidationError as exc:
        raise ValidationError(f"{name}: {exc}") from None
    lmax = s.lam[0] if s.lam.size else 0.0
    if s.lam.size and (lmax <= 0 or s.lam[-1] <= PD_RTOL * lmax):
        raise ValidationError(f"{name} is not positive definite (eigenvalues {s.lam[-1]:.3g} .. {lmax:.3g})")
    return s


def inv_sqrt(sigma):
    """``Sigma^{-1/2} = Q Lambda^{-1/2} Q^T`` for symmetric PD ``sigma``."""
    s = check_positive_definite(sigma)
    return (s.q / np.sqrt(s.lam)) @ s.q.T


def gls(x, y, sigma) -> LsFit:
    """Generalized least squares by whitening with ``Sigma^{-1/2}`` and then QR.

    ``fitted`` and ``residuals`` are on the original scale; ``sse`` is the
    generalized residual ``e^T Sigma^{-1} e``, so ``sse / n`` is the MLE of
    the noise scale.
    """
    x, y = _xy(x, y)
    sigma = as_matrix(sigma, "sigma")
    if sigma.shape != (x.shape[0], x.shape[0]):
        raise ShapeError(f"sigma must be {x.shape[0]}x{x.shape[0]}, got {sigma.shape}")
    w = inv_sqrt(sigma)
    whitened = ols_qr(w @ x, w @ y)
    beta = whitened.beta_hat
    return _fit(x, y, beta, x.shape[1], "gls", sse=whitened.sse)


def wls(x, y, weights_var) -> LsFit:
    """GLS with a diagonal covariance given by per-observation variances."""
    v = as_vector(weights_var, "weights_var")
    return gls(x, y, np.diag(v))


def generalized_projector(x, sigma) -> Projector:
    """``H2 = X (X^T Sigma^{-1} X)^{-1} X^T Sigma^{-1}``."""
    x = as_matrix(x)
    sigma = as_matrix(sigma, "sigma")
    check_positive_definite(sigma)
    _require_full_rank(x, "generalized_projector")
    sinv = inverse(sigma)
    sinv = 0.5 * (sinv + sinv.T)
    h = x @ solve_qr(x.T @ sinv @ x, x.T @ sinv)
    return Projector(h=h, subspace_rank=x.shape[1], metric=sinv)


def ridge(x, y, lam) -> np.ndarray:
    """``(X^T X + lam I)^{-1} X^T y``."""
    x, y = _xy(x, y)
    if not lam > 0:
        raise ValidationError(f"ridge penalty must be > 0, got {lam}")
    return solve_qr(x.T @ x + lam * np.eye(x.shape[1]), x.T @ y)
