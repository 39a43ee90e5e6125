"""Kernels, Gram matrices and Gaussian-process regression posteriors."""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bayes import posterior_zero_mean
from .decomp import spectral_symmetric
from .errors import ShapeError, SingularMatrixError, ValidationError
from .ls import check_positive_definite
from .matrix import as_matrix, as_vector

GRAM_RTOL = 1e-10
JITTER_SCALE = 1e-10


@dataclass(frozen=True)
class Kernel:
    """``linear``: ``x^T W x'`` (W defaults to I); ``polynomial``: ``(eta + gamma x^T x')^degree``;
    ``gaussian``: ``exp(-gamma ||x - x'||^2)``."""

    variant: str = "gaussian"
    gamma: float = 1.0
    eta: float = 0.0
    degree: int = 2
    weight: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.variant not in ("linear", "polynomial", "gaussian"):
            raise ValidationError(f"unknown kernel {self.variant!r}")
        if self.variant == "polynomial":
            if self.eta < 0 or not self.gamma > 0 or int(self.degree) != self.degree or self.degree < 1:
                raise ValidationError("polynomial kernel needs eta >= 0, gamma > 0 and an integer degree >= 1")
        if self.variant == "gaussian" and not self.gamma > 0:
            raise ValidationError("gaussian kernel needs gamma > 0")
        if self.weight is not None:
            if self.variant != "linear":
                raise ValidationError("a weight matrix applies only to the linear kernel")
            w = as_matrix(self.weight, "weight")
            if w.shape[0] != w.shape[1] or not np.allclose(w, w.T, rtol=0, atol=1e-12 * max(1.0, np.abs(w).max())):
                raise ValidationError("kernel weight must be a symmetric square matrix")
            object.__setattr__(self, "weight", w)

    @classmethod
    def linear(cls, weight=None):
        return cls("linear", weight=weight)

    @classmethod
    def polynomial(cls, eta=1.0, gamma=1.0, degree=2):
        return cls("polynomial", gamma=gamma, eta=eta, degree=degree)

    @classmethod
    def gaussian(cls, gamma=1.0):
        return cls("gaussian", gamma=gamma)

    def cross(self, a, b):
        """Matrix ``K[i, j] = k(a_i, b_j)`` for row-point matrices ``a`` and ``b``."""
        if a.shape[1] != b.shape[1]:
            raise ShapeError(f"points have dimension {a.shape[1]} and {b.shape[1]}")
        if self.variant == "gaussian":
            # direct differences keep k(x, x) exactly 1
            d2 = np.sum((a[:, None, :] - b[None, :, :]) ** 2, axis=2)
            return np.exp(-self.gamma * d2)
        if self.variant == "linear":
            if self.weight is None:
                return a @ b.T
            if self.weight.shape[0] != a.shape[1]:
                raise ShapeError(f"weight is {self.weight.shape}, points have dimension {a.shape[1]}")
            return a @ self.weight @ b.T
        return (self.eta + self.gamma * (a @ b.T)) ** int(self.degree)


def _points(x, name):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 2 and x.shape[0] == 0:
        return x
    return as_matrix(x, name)


def kernel_eval(k: Kernel, x, x2) -> float:
    x = as_vector(x, "x")
    x2 = as_vector(x2, "x2")
    if x.size != x2.size:
        raise ShapeError(f"points have dimension {x.size} and {x2.size}")
    return float(k.cross(x[None, :], x2[None, :])[0, 0])


def gram(k: Kernel, xs) -> np.ndarray:
    xs = _points(xs, "xs")
    g = k.cross(xs, xs)
    return 0.5 * (g + g.T)


@dataclass(frozen=True)
class GpPosterior:
    mean: np.ndarray
    cov: np.ndarray
    train_count: int
    test_count: int

    @property
    def var(self):
        return np.clip(np.diag(self.cov), 0.0, None)

    def band(self, z=1.96):
        half = z * np.sqrt(self.var)
        return self.mean - half, self.mean + half


def gp_posterior(k: Kernel, x_train, y_train, x_test, noise=0.0, jitter=False) -> GpPosterior:
    """Predictive mean ``K*(K + N)^{-1} y`` and covariance ``K** - K*(K + N)^{-1} K*^T``.

    ``noise`` is a scalar variance or one variance per training point
    (``N = diag(noise)``). The system is solved through the spectral
    decomposition of ``K + N``. With zero noise the Gram matrix must be
    numerically invertible unless ``jitter`` adds ``1e-10 * mean(diag K)``.
    """
    xt = _points(x_test, "x_test")
    xtr = _points(x_train, "x_train")
    kss = gram(k, xt)
    if xtr.shape[0] == 0:
        return GpPosterior(np.zeros(xt.shape[0]), kss, 0, xt.shape[0])
    y = as_vector(y_train, "y_train")
    n = xtr.shape[0]
    if y.size != n:
        raise ShapeError(f"{n} training points but {y.size} targets")
    noise_v = np.broadcast_to(np.asarray(noise, dtype=np.float64), (n,)).copy() if np.ndim(noise) == 0 else as_vector(noise, "noise")
    if noise_v.size != n:
        raise ShapeError(f"noise has {noise_v.size} entries, expected {n}")
    if np.any(noise_v < 0):
        raise ValidationError("noise variances must be >= 0")
    kxx = gram(k, xtr)
    a = kxx + np.diag(noise_v)
    if jitter:
        a = a + JITTER_SCALE * float(np.mean(np.diag(kxx))) * np.eye(n)
    s = spectral_symmetric(a)
    lmax = s.lam[0]
    if not lmax > 0 or s.lam[-1] <= GRAM_RTOL * lmax:
        raise SingularMatrixError(
            f"K + noise is numerically singular (eigenvalues {s.lam[-1]:.3g} .. {lmax:.3g}); "
            "add observation noise or pass jitter=True",
            index=n - 1,
        )
    ks = k.cross(xt, xtr)
    proj = ks @ s.q
    mean = (proj / s.lam) @ (s.q.T @ y)
    cov = kss - (proj / s.lam) @ proj.T
    return GpPosterior(mean, 0.5 * (cov + cov.T), n, xt.shape[0])


@dataclass(frozen=True)
class EquivalenceReport:
    weight_mean: np.ndarray
    weight_var: np.ndarray
    kernel_mean: np.ndarray
    kernel_var: np.ndarray

    @property
    def discrepancy(self):
        return float(max(np.max(np.abs(self.weight_mean - self.kernel_mean), initial=0.0),
                         np.max(np.abs(self.weight_var - self.kernel_var), initial=0.0)))


def weight_space_prediction(x_train, y_train, x_test, sigma0, sigma2):
    """Predictive mean ``x*^T beta1`` and variance ``x*^T Sigma1 x*`` of the zero-mean Bayesian linear model."""
    post = posterior_zero_mean(x_train, y_train, sigma2, sigma0)
    xt = as_matrix(x_test, "x_test")
    return xt @ post.mean, np.einsum("ij,jk,ik->i", xt, post.cov, xt)


def weight_space_equivalence(x_train, y_train, x_test, sigma0, sigma2, report=False):
    """Largest gap between the weight-space predictive and the GP with kernel ``x^T Sigma0 x'``."""
    sigma0 = as_matrix(sigma0, "sigma0")
    check_positive_definite(sigma0, "sigma0")
    if not sigma2 > 0:
        raise ValidationError(f"sigma2 must be > 0, got {sigma2}")
    wm, wv = weight_space_prediction(x_train, y_train, x_test, sigma0, sigma2)
    gp = gp_posterior(Kernel.linear(sigma0), x_train, y_train, x_test, noise=sigma2)
    rep = EquivalenceReport(wm, wv, gp.mean, np.diag(gp.cov).copy())
    return rep if report else rep.discrepancy
