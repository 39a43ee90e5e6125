"""Conjugate Bayesian linear regression, Gibbs samplers and Bayesian variable selection."""
import io
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .decomp import spectral_symmetric
from .errors import RankDeficientError, ShapeError, ValidationError
from .ls import check_positive_definite, inverse, ols_qr
from .matrix import as_matrix, as_vector, rank
from .rng import RngStream

PSD_RTOL = 1e-9


@dataclass(frozen=True)
class BetaBernoulliPosterior:
    a: float
    b: float

    @property
    def mean(self):
        return self.a / (self.a + self.b)


def beta_bernoulli_update(a0, b0, successes, n) -> BetaBernoulliPosterior:
    if not (a0 > 0 and b0 > 0):
        raise ValidationError(f"prior parameters must be positive, got ({a0}, {b0})")
    if int(successes) != successes or int(n) != n or not 0 <= successes <= n:
        raise ValidationError(f"need integer counts with 0 <= successes <= n, got {successes}/{n}")
    return BetaBernoulliPosterior(a0 + successes, b0 + n - successes)


@dataclass(frozen=True)
class GaussianPosterior:
    mean: np.ndarray
    cov: np.ndarray


@dataclass(frozen=True)
class NigPosterior:
    """Normal-inverse-gamma posterior.

    ``a_n`` carries the ``a0 + n/2 + 1`` shape update as derived for this
    parameterization; ``a_n_conventional`` is the usual ``a0 + n/2``.
    """

    beta3: np.ndarray
    sigma3: np.ndarray
    a_n: float
    b_n: float
    a_n_conventional: float


def _sym(a):
    return 0.5 * (a + a.T)


def _data(x, y, p=None):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 2 and x.shape[0] == 0:
        y = np.zeros(0)
    else:
        x = as_matrix(x)
        y = as_vector(y)
    if x.shape[0] != y.size:
        raise ShapeError(f"X has {x.shape[0]} rows but y has {y.size} entries")
    if p is not None and x.shape[1] != p:
        raise ShapeError(f"X has {x.shape[1]} columns, prior has dimension {p}")
    return x, y


def _prior(beta0, sigma0):
    sigma0 = as_matrix(sigma0, "sigma0")
    beta0 = as_vector(beta0, "beta0") if beta0 is not None else np.zeros(sigma0.shape[0])
    if sigma0.shape != (beta0.size, beta0.size):
        raise ShapeError(f"sigma0 must be {beta0.size}x{beta0.size}, got {sigma0.shape}")
    check_positive_definite(sigma0, "sigma0")
    return beta0, _sym(inverse(sigma0))


def _gaussian_update(x, y, gamma, beta0, prec0):
    """Posterior of beta under N(beta0, prec0^{-1}) prior and noise precision gamma."""
    cov = _sym(inverse(gamma * (x.T @ x) + prec0))
    mean = cov @ (prec0 @ beta0 + gamma * (x.T @ y))
    return mean, cov


def posterior_semiconjugate(x, y, sigma2, beta0, sigma0) -> GaussianPosterior:
    """``beta | y, sigma2`` under the prior ``N(beta0, sigma0)``."""
    if not sigma2 > 0:
        raise ValidationError(f"sigma2 must be > 0, got {sigma2}")
    beta0, prec0 = _prior(beta0, sigma0)
    x, y = _data(x, y, beta0.size)
    mean, cov = _gaussian_update(x, y, 1.0 / sigma2, beta0, prec0)
    return GaussianPosterior(mean, cov)


def posterior_zero_mean(x, y, sigma2, sigma0) -> GaussianPosterior:
    """``Sigma1 = (X^T X / sigma2 + Sigma0^{-1})^{-1}``, mean ``Sigma1 X^T y / sigma2``."""
    sigma0 = as_matrix(sigma0, "sigma0")
    return posterior_semiconjugate(x, y, sigma2, np.zeros(sigma0.shape[0]), sigma0)


def _require_full_rank(x):
    r = rank(x)
    if r < x.shape[1]:
        raise RankDeficientError(f"g-prior needs full column rank; rank {r} < {x.shape[1]}", rank=r, cols=x.shape[1])


def posterior_g_prior(x, y, sigma2, g) -> GaussianPosterior:
    """Posterior under ``beta ~ N(0, g sigma2 (X^T X)^{-1})``: OLS shrunk by ``g / (g + 1)``."""
    x, y = _data(x, y)
    if not (sigma2 > 0 and g > 0):
        raise ValidationError(f"need sigma2 > 0 and g > 0, got ({sigma2}, {g})")
    _require_full_rank(x)
    shrink = g / (g + 1.0)
    mean = shrink * ols_qr(x, y).beta_hat
    cov = shrink * sigma2 * _sym(inverse(x.T @ x))
    return GaussianPosterior(mean, cov)


def posterior_nig(x, y, beta0, sigma0, a0, b0) -> NigPosterior:
    if not (a0 > 0 and b0 > 0):
        raise ValidationError(f"a0 and b0 must be positive, got ({a0}, {b0})")
    beta0, prec0 = _prior(beta0, sigma0)
    x, y = _data(x, y, beta0.size)
    n = y.size
    prec3 = x.T @ x + prec0
    sigma3 = _sym(inverse(prec3))
    beta3 = sigma3 @ (prec0 @ beta0 + x.T @ y)
    b_n = b0 + 0.5 * float(y @ y + beta0 @ prec0 @ beta0 - beta3 @ prec3 @ beta3)
    if not b_n > 0:
        raise ArithmeticError(f"b_n = {b_n:.3g} is not positive: inputs are too ill-conditioned")
    return NigPosterior(beta3, sigma3, a0 + n / 2 + 1, b_n, a0 + n / 2)


def sample_mvn(mean, cov, rng: RngStream, size=None):
    """Draw ``mean + Q Lambda^{1/2} z`` with ``cov = Q Lambda Q^T``."""
    mean = as_vector(mean, "mean")
    cov = as_matrix(cov, "cov")
    if cov.shape != (mean.size, mean.size):
        raise ShapeError(f"cov must be {mean.size}x{mean.size}, got {cov.shape}")
    s = spectral_symmetric(cov)
    lmax = max(abs(s.lam[0]), 0.0) if s.lam.size else 0.0
    if s.lam.size and s.lam[-1] < -PSD_RTOL * max(lmax, 1e-300):
        raise ValidationError(f"cov is not positive semidefinite (min eigenvalue {s.lam[-1]:.3g})")
    root = s.q * np.sqrt(np.clip(s.lam, 0.0, None))
    if size is None:
        return mean + root @ rng.normal(mean.size)
    z = rng.normal((mean.size, int(size)))
    return (mean[:, None] + root @ z).T


def sample_gamma(shape, rate, rng: RngStream, size=None):
    return rng.gamma(shape, rate, size)


@dataclass(frozen=True)
class GibbsTrace:
    """All iterations of a chain; ``burn_in`` leading draws are excluded by the ``kept_*`` views."""

    beta: np.ndarray
    gamma: np.ndarray
    burn_in: int
    seed: int
    z: Optional[np.ndarray] = None
    rejected_flips: int = 0

    @property
    def iterations(self):
        return self.gamma.size

    @property
    def kept_beta(self):
        return self.beta[self.burn_in:]

    @property
    def kept_gamma(self):
        return self.gamma[self.burn_in:]

    @property
    def kept_z(self):
        return None if self.z is None else self.z[self.burn_in:]

    def inclusion_probabilities(self):
        return self.kept_z.mean(axis=0)

    def mask_frequencies(self):
        """Retained-draw frequency of each mask, keyed by a 0/1 string."""
        keys, counts = np.unique(self.kept_z.astype(np.int8), axis=0, return_counts=True)
        total = counts.sum()
        return {"".join(str(int(b)) for b in k): c / total for k, c in zip(keys, counts)}

    def to_csv(self) -> str:
        """Retained draws, one line per iteration: z bits, beta entries, then gamma."""
        p = self.beta.shape[1]
        cols = []
        if self.z is not None:
            cols += [f"z{j}" for j in range(p)]
        cols += [f"beta{j}" for j in range(p)] + ["gamma"]
        buf = io.StringIO()
        buf.write(",".join(cols) + "\n")
        for i in range(self.burn_in, self.iterations):
            row = []
            if self.z is not None:
                row += [str(int(b)) for b in self.z[i]]
            row += [f"{v:.17g}" for v in self.beta[i]]
            row.append(f"{self.gamma[i]:.17g}")
            buf.write(",".join(row) + "\n")
        return buf.getvalue()


def _burn_in(iters, burn_in):
    if iters < 1:
        raise ValidationError(f"iters must be >= 1, got {iters}")
    if burn_in is None:
        burn_in = iters // 5
    if not 0 <= burn_in < iters:
        raise ValidationError(f"need 0 <= burn_in < iters, got burn_in={burn_in}, iters={iters}")
    return int(burn_in)


def gibbs_semiconjugate(x, y, beta0, sigma0, a0, b0, iters, burn_in=None, rng: RngStream = None) -> GibbsTrace:
    """Alternate ``beta | gamma ~ N(beta2, Sigma2)`` and ``gamma | beta ~ Gamma(a0 + n/2, b0 + ||y - X beta||^2 / 2)``."""
    if not (a0 > 0 and b0 > 0):
        raise ValidationError(f"a0 and b0 must be positive, got ({a0}, {b0})")
    burn_in = _burn_in(iters, burn_in)
    rng = rng if rng is not None else RngStream(0)
    beta0, prec0 = _prior(beta0, sigma0)
    x, y = _data(x, y, beta0.size)
    n, p = x.shape
    xtx, xty = x.T @ x, x.T @ y
    shape = a0 + n / 2
    betas = np.empty((iters, p))
    gammas = np.empty(iters)
    gamma = a0 / b0
    for it in range(iters):
        s = spectral_symmetric(gamma * xtx + prec0)
        mean = (s.q / s.lam) @ (s.q.T @ (prec0 @ beta0 + gamma * xty))
        beta = mean + (s.q / np.sqrt(s.lam)) @ rng.normal(p)
        e = y - x @ beta
        gamma = rng.gamma(shape, b0 + 0.5 * float(e @ e))
        betas[it] = beta
        gammas[it] = gamma
    return GibbsTrace(betas, gammas, burn_in, rng.seed)


def _g_residual(x, y, g):
    """``r = y^T y - g/(g+1) y^T H y`` and ``y^T H y`` via the QR of X."""
    yy = float(y @ y)
    if x.shape[1] == 0:
        return yy, 0.0
    fit = ols_qr(x, y)
    yhy = max(yy - fit.sse, 0.0)
    return yy - g / (g + 1.0) * yhy, yhy


def marginal_likelihood_g(x, y, sigma2, g) -> float:
    """``log p(y | X, sigma2)`` with beta integrated out under the g-prior."""
    x, y = _data(x, y)
    if not (sigma2 > 0 and g > 0):
        raise ValidationError(f"need sigma2 > 0 and g > 0, got ({sigma2}, {g})")
    if x.shape[1]:
        _require_full_rank(x)
    n, p = x.shape
    r, _ = _g_residual(x, y, g)
    return -0.5 * n * math.log(2 * math.pi * sigma2) - 0.5 * p * math.log1p(g) - r / (2 * sigma2)


def mle_noise_prior(x, y):
    """Per-model noise prior: ``2 a0 = 1`` and ``2 b0 / a0`` equal to the model's MLE residual variance."""
    n = y.size
    rss = float(y @ y) if x.shape[1] == 0 else ols_qr(x, y).sse
    s2 = max(rss / n, 1e-12 * float(y @ y) / n, 1e-300)
    a0 = 0.5
    return a0, a0 * s2 / 2


def log_marginal_g(x, y, g, a0, b0) -> float:
    """``log p(y | X_z)`` with beta and the noise precision both integrated out."""
    x, y = _data(x, y)
    if x.shape[1]:
        _require_full_rank(x)
    n, p = x.shape
    r, _ = _g_residual(x, y, g)
    a_n = a0 + n / 2
    b_n = b0 + r / 2
    return (
        -0.5 * n * math.log(2 * math.pi)
        - 0.5 * p * math.log1p(g)
        + a0 * math.log(b0)
        - math.lgamma(a0)
        + math.lgamma(a_n)
        - a_n * math.log(b_n)
    )


def _resolve_rule(a0_rule, xz, y):
    if a0_rule in (None, "mle"):
        return mle_noise_prior(xz, y)
    if callable(a0_rule):
        return a0_rule(xz, y)
    a0, b0 = a0_rule
    return float(a0), float(b0)


class _MaskCache:
    """Per-mask log marginal, OLS pieces and hyperparameters; ``None`` marks a singular submodel."""

    def __init__(self, x, y, g, a0_rule):
        self.x, self.y, self.g, self.rule = x, y, g, a0_rule
        self._store = {}

    def get(self, mask):
        key = mask.tobytes()
        if key not in self._store:
            self._store[key] = self._build(mask)
        return self._store[key]

    def _build(self, mask):
        xz = self.x[:, mask]
        p = xz.shape[1]
        if p and rank(xz) < p:
            return None
        a0, b0 = _resolve_rule(self.rule, xz, self.y)
        lm = log_marginal_g(xz, self.y, self.g, a0, b0)
        if p:
            s = spectral_symmetric(xz.T @ xz)
            bhat = ols_qr(xz, self.y).beta_hat
        else:
            s, bhat = None, np.zeros(0)
        return {"logm": lm, "a0": a0, "b0": b0, "eig": s, "bhat": bhat}


def inclusion_probability(logm_in, logm_out):
    """``o / (1 + o)`` with ``log o = logm_in - logm_out`` (prior odds 1), evaluated stably."""
    d = logm_in - logm_out
    if d >= 0:
        return 1.0 / (1.0 + math.exp(-d))
    e = math.exp(d)
    return e / (1.0 + e)


def gibbs_variable_selection(x, y, g, a0_rule="mle", iters=2000, burn_in=None, rng: RngStream = None, z0=None) -> GibbsTrace:
    """Gibbs sampler over inclusion masks z, coefficients and noise precision.

    Each sweep visits the coordinates of z in random order and sets ``z_j = 1``
    with probability ``o_j / (1 + o_j)``, where ``o_j`` is the Bayes factor of
    the two masks (beta and the noise precision integrated out, prior odds 1).
    Then ``beta_z`` is drawn from its g-prior posterior given gamma and gamma
    from ``Gamma(a0 + n/2, b0 + ||y - X_z beta_z||^2 / 2)``. A flip that would
    make ``X_z`` singular is rejected and counted in ``rejected_flips``.
    ``a0_rule`` is ``"mle"`` (per-model prior from :func:`mle_noise_prior`), a pair ``(a0, b0)`` or a
    callable ``(X_z, y) -> (a0, b0)``.
    """
    x, y = _data(x, y)
    if not g > 0:
        raise ValidationError(f"g must be > 0, got {g}")
    burn_in = _burn_in(iters, burn_in)
    rng = rng if rng is not None else RngStream(0)
    n, p = x.shape
    cache = _MaskCache(x, y, g, a0_rule)
    z = np.ones(p, dtype=bool) if z0 is None else np.asarray(z0, dtype=bool).copy()
    if z.shape != (p,):
        raise ShapeError(f"z0 must have {p} entries")
    if cache.get(z) is None:
        z = np.zeros(p, dtype=bool)
    zs = np.empty((iters, p), dtype=bool)
    betas = np.zeros((iters, p))
    gammas = np.empty(iters)
    shrink = g / (g + 1.0)
    gamma = None
    rejected = 0
    for it in range(iters):
        for j in rng.permutation(p):
            z_in, z_out = z.copy(), z.copy()
            z_in[j], z_out[j] = True, False
            c_in, c_out = cache.get(z_in), cache.get(z_out)
            if c_in is None or c_out is None:
                rejected += 1
                continue
            z[j] = rng.uniform() < inclusion_probability(c_in["logm"], c_out["logm"])
        cur = cache.get(z)
        if gamma is None:
            gamma = cur["a0"] / cur["b0"]
        beta = np.zeros(p)
        if z.any():
            s = cur["eig"]
            scale = math.sqrt(shrink / gamma)
            beta[z] = shrink * cur["bhat"] + (s.q / np.sqrt(s.lam)) @ rng.normal(int(z.sum())) * scale
        e = y - x @ beta
        gamma = rng.gamma(cur["a0"] + n / 2, cur["b0"] + 0.5 * float(e @ e))
        zs[it] = z
        betas[it] = beta
        gammas[it] = gamma
    return GibbsTrace(betas, gammas, burn_in, rng.seed, z=zs, rejected_flips=rejected)


def enumerate_mask_posterior(x, y, g, a0_rule="mle"):
    """Exact posterior over all ``2^p`` masks from the integrated marginal (prior odds 1)."""
    x, y = _data(x, y)
    p = x.shape[1]
    if p > 16:
        raise ValidationError("exhaustive enumeration is limited to p <= 16")
    cache = _MaskCache(x, y, g, a0_rule)
    logs = {}
    for code in range(2 ** p):
        mask = np.array([(code >> (p - 1 - j)) & 1 for j in range(p)], dtype=bool)
        c = cache.get(mask)
        if c is not None:
            logs["".join("1" if b else "0" for b in mask)] = c["logm"]
    top = max(logs.values())
    w = {k: math.exp(v - top) for k, v in logs.items()}
    total = sum(w.values())
    return {k: v / total for k, v in w.items()}


__all__ = [
    "BetaBernoulliPosterior",
    "GaussianPosterior",
    "GibbsTrace",
    "NigPosterior",
    "beta_bernoulli_update",
    "enumerate_mask_posterior",
    "gibbs_semiconjugate",
    "gibbs_variable_selection",
    "inclusion_probability",
    "log_marginal_g",
    "marginal_likelihood_g",
    "mle_noise_prior",
    "posterior_g_prior",
    "posterior_nig",
    "posterior_semiconjugate",
    "posterior_zero_mean",
    "sample_gamma",
    "sample_mvn",
]
