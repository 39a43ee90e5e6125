"""Noise-variance estimators, ANOVA, F-tests, backward selection and Monte Carlo harnesses."""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .decomp import qr_householder, spectral_symmetric, svd
from .distributions import sf_f
from .errors import RankDeficientError, ShapeError, ValidationError
from .ls import LsFit, hat_matrix, ols_qr
from .matrix import as_matrix, as_vector, rank, solve_triangular
from .rng import RngStream

__all__ = [
    "AnovaTable",
    "CochranReport",
    "FTestResult",
    "RngStream",
    "SelectionReport",
    "SigmaEstimates",
    "anova",
    "anova_projectors",
    "cochran_check",
    "crlb_check_1d",
    "f_test_submodel",
    "ks_distance",
    "learning_curve_mc",
    "min_mse_k",
    "quadratic_expectation",
    "sampling_dist_mc",
    "sigma2_estimates",
    "sigma2_mse",
    "sigma2_mse_mc",
    "variable_selection",
]


@dataclass(frozen=True)
class SigmaEstimates:
    mle: float
    unbiased: float
    min_mse: float


def sigma2_estimates(fit: LsFit) -> SigmaEstimates:
    """SSE divided by n, n - p and n - p + 2."""
    if fit.dof < 3:
        raise ValidationError(f"need n - p >= 3 for the minimum-MSE estimator, got {fit.dof}")
    return SigmaEstimates(mle=fit.sse / fit.n, unbiased=fit.sse / fit.dof, min_mse=fit.sse / (fit.dof + 2))


def sigma2_mse(k, n, p, sigma2=1.0):
    """Closed-form MSE of ``SSE / k`` as an estimator of ``sigma2``: squared bias plus variance."""
    k = np.asarray(k, dtype=np.float64)
    m = n - p
    s4 = sigma2 * sigma2
    return (m / k - 1.0) ** 2 * s4 + 2.0 * m * s4 / (k * k)


def min_mse_k(n, p, ks: Optional[Sequence[int]] = None) -> int:
    """Integer divisor minimizing :func:`sigma2_mse`, searched over ``ks`` (default ``1..2n``)."""
    ks = np.arange(1, 2 * n + 1) if ks is None else np.asarray(ks)
    return int(ks[int(np.argmin(sigma2_mse(ks, n, p)))])


@dataclass(frozen=True)
class AnovaTable:
    """Sums of squares and the F statistic with SSE in the numerator.

    ``f_stat`` is ``(SSE/(n-p)) / (SSR/(p-1))`` with reference F(n-p, p-1) and
    ``p_value`` its upper tail. The conventional regression F statistic
    (SSR first) is in ``f_conventional`` / ``p_value_conventional``.
    """

    sst: float
    sse: float
    ssr: float
    df: tuple
    r2: float
    adj_r2: float
    f_stat: float
    p_value: float
    f_conventional: float
    p_value_conventional: float
    degenerate: bool = False


def _has_intercept(x):
    return x.shape[1] > 0 and np.all(x[:, 0] == 1.0)


def anova(x, y) -> AnovaTable:
    x = as_matrix(x)
    y = as_vector(y)
    n, p = x.shape
    if not _has_intercept(x):
        raise ValidationError("anova needs an intercept: the first column of X must be all ones")
    if p < 2:
        raise ValidationError("anova needs at least one regressor besides the intercept")
    if n <= p:
        raise ValidationError(f"anova needs n > p, got n={n}, p={p}")
    fit = ols_qr(x, y)
    centered = y - y.mean()
    sst = float(centered @ centered)
    sse = fit.sse
    dev = fit.fitted - y.mean()
    ssr = float(dev @ dev)
    df = (n - 1, n - p, p - 1)
    tiny = 1e-300
    if sst <= 1e-28 * max(1.0, float(y @ y)):
        return AnovaTable(sst, sse, ssr, df, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, degenerate=True)
    r2 = 1.0 - sse / sst
    adj = 1.0 - (1.0 - r2) * (n - 1) / (n - p)
    mse, msr = sse / (n - p), ssr / (p - 1)
    f = mse / msr if msr > tiny else math.inf
    fc = msr / mse if mse > tiny else math.inf
    return AnovaTable(
        sst, sse, ssr, df, r2, adj, f, float(sf_f(f, n - p, p - 1)), fc, float(sf_f(fc, p - 1, n - p))
    )


def anova_projectors(x):
    """The defining matrices ``(I - H, H - H1, H1)`` with ``H1 = 11^T / n``."""
    x = as_matrix(x)
    n = x.shape[0]
    h = hat_matrix(x).h
    h1 = np.full((n, n), 1.0 / n)
    return np.eye(n) - h, h - h1, h1


@dataclass(frozen=True)
class FTestResult:
    statistic: float
    df_num: int
    df_den: int
    p_value: float
    rss: float = 0.0
    rss_sub: float = 0.0
    rss_check: float = 0.0  # largest gap between the QR shortcut and direct residual sums


def _qr_projection_norm2(x, y):
    """``||Q1^T y||^2`` and the direct residual sum of squares for the LS fit of y on x."""
    n, p = x.shape
    if p == 0:
        return 0.0, float(y @ y)
    f = qr_householder(x, mode="full")
    c = f.q.T @ y
    try:
        beta = solve_triangular(f.r[:p, :p], c[:p], "upper")
    except ArithmeticError:
        raise RankDeficientError("design is rank deficient", cols=p) from None
    e = y - x @ beta
    return float(c[:p] @ c[:p]), float(e @ e)


def _check_subset(subset, p):
    idx = [int(i) for i in subset]
    if len(set(idx)) != len(idx) or any(i < 0 or i >= p for i in idx):
        raise ValidationError(f"subset {list(subset)} must hold distinct column indices in 0..{p - 1}")
    return sorted(idx)


def f_test_submodel(x, y, subset: Sequence[int]) -> FTestResult:
    """F test of the submodel using columns ``subset`` against the full model.

    Residual sums come from differences of inner products with the QR factors
    (``RSS = y^T y - ||Q1^T y||^2``) and are cross-checked against direct
    residuals. An empty subset tests the zero model.
    """
    x = as_matrix(x)
    y = as_vector(y)
    n, p = x.shape
    if y.size != n:
        raise ShapeError(f"X has {n} rows but y has {y.size} entries")
    idx = _check_subset(subset, p)
    q = len(idx)
    if n <= p:
        raise ValidationError(f"F test needs n > p, got n={n}, p={p}")
    yy = float(y @ y)
    c_full, rss_direct = _qr_projection_norm2(x, y)
    c_sub, rss1_direct = _qr_projection_norm2(x[:, idx], y)
    rss = max(yy - c_full, 0.0)
    rss1 = max(yy - c_sub, 0.0)
    check = max(abs(rss - rss_direct), abs(rss1 - rss1_direct))
    if q == p:
        return FTestResult(0.0, 0, n - p, 1.0, rss, rss1, check)
    num = max(c_full - c_sub, 0.0) / (p - q)
    den = rss / (n - p)
    if den <= 1e-300:
        stat = 0.0 if num <= 1e-300 else math.inf
    else:
        stat = num / den
    return FTestResult(stat, p - q, n - p, float(sf_f(stat, p - q, n - p)), rss, rss1, check)


@dataclass(frozen=True)
class SelectionReport:
    kept: tuple
    dropped: list
    alpha: float
    final_p_values: dict = field(default_factory=dict)


def variable_selection(x, y, alpha=0.05, protect: Sequence[int] = ()) -> SelectionReport:
    """Backward elimination: drop the variable with the largest p-value >= alpha, refit, repeat.

    Each candidate ``j`` is tested with the F test of the model without ``j``
    against the current model. Ties on the largest p-value drop the lowest
    column index. Columns in ``protect`` are never tested (e.g. an intercept).
    """
    x = as_matrix(x)
    y = as_vector(y)
    if not 0 < alpha < 1:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha}")
    n, p = x.shape
    if rank(x) < p:
        raise RankDeficientError("variable selection needs a full-column-rank design", rank=rank(x), cols=p)
    protect = set(_check_subset(protect, p))
    kept = list(range(p))
    dropped = []
    while True:
        candidates = [j for j in kept if j not in protect]
        pvals = {}
        for j in candidates:
            sub = [kept.index(i) for i in kept if i != j]
            pvals[j] = f_test_submodel(x[:, kept], y, sub).p_value
        if not pvals:
            break
        worst = max(candidates, key=lambda j: (pvals[j], -j))
        if pvals[worst] < alpha:
            break
        dropped.append((worst, pvals[worst]))
        kept.remove(worst)
    return SelectionReport(kept=tuple(kept), dropped=dropped, alpha=alpha, final_p_values=pvals)


@dataclass(frozen=True)
class CochranReport:
    sum_residual: float
    min_eigenvalues: tuple
    ranks: tuple
    trace_ranks: tuple
    max_cross: float
    sums_to_identity: bool
    psd: bool
    rank_additive: bool
    pairwise_orthogonal: bool

    @property
    def passed(self):
        return self.sums_to_identity and self.psd and self.rank_additive and self.pairwise_orthogonal


def cochran_check(projectors, tol=1e-9) -> CochranReport:
    """Check the hypotheses of Cochran's theorem for a list of symmetric matrices."""
    mats = [as_matrix(a, "projector") for a in projectors]
    if not mats:
        raise ValidationError("cochran_check needs at least one matrix")
    n = mats[0].shape[0]
    for a in mats:
        if a.shape != (n, n):
            raise ShapeError(f"all matrices must be {n}x{n}, got {a.shape}")
    total = sum(mats)
    sum_res = float(np.linalg.norm(total - np.eye(n)))
    mins = tuple(float(spectral_symmetric(0.5 * (a + a.T)).lam[-1]) for a in mats)
    ranks = tuple(svd(a).rank for a in mats)
    traces = tuple(float(np.trace(a)) for a in mats)
    cross = 0.0
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            cross = max(cross, float(np.linalg.norm(mats[i] @ mats[j])))
    scale = tol * max(1.0, n)
    return CochranReport(
        sum_residual=sum_res,
        min_eigenvalues=mins,
        ranks=ranks,
        trace_ranks=traces,
        max_cross=cross,
        sums_to_identity=sum_res <= scale,
        psd=all(m >= -scale for m in mins),
        rank_additive=sum(ranks) == n,
        pairwise_orthogonal=cross <= scale,
    )


def quadratic_expectation(a, mu, sigma) -> float:
    """``E[b^T A b] = tr(A Sigma) + mu^T A mu`` for ``b`` with mean mu and covariance Sigma."""
    a = as_matrix(a, "a")
    mu = as_vector(mu, "mu")
    sigma = as_matrix(sigma, "sigma")
    n = mu.size
    if a.shape != (n, n) or sigma.shape != (n, n):
        raise ShapeError(f"a {a.shape} and sigma {sigma.shape} must both be {n}x{n}")
    return float(np.sum(a * sigma.T) + mu @ a @ mu)


def ks_distance(samples, cdf: Callable) -> float:
    """Kolmogorov-Smirnov distance between the empirical distribution of ``samples`` and ``cdf``."""
    s = np.sort(as_vector(samples, "samples"))
    m = s.size
    f = np.asarray(cdf(s), dtype=np.float64)
    i = np.arange(1, m + 1)
    return float(max(np.max(i / m - f), np.max(f - (i - 1) / m)))


def _mc(trials, rng, workers, chunk_fn):
    """Split ``trials`` across ``workers`` substreams (stream id = worker index) and add the partial sums."""
    workers = max(1, int(workers))
    sizes = [trials // workers + (1 if w < trials % workers else 0) for w in range(workers)]
    jobs = [(sizes[w], rng.spawn(w)) for w in range(workers) if sizes[w]]
    if workers == 1:
        parts = [chunk_fn(*jobs[0])]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: chunk_fn(*job), jobs))
    total = {}
    for part in parts:
        for key, val in part.items():
            total[key] = total[key] + val if key in total else val
    return total


def _mean_se(s1, s2, m):
    mean = s1 / m
    var = max(s2 / m - mean * mean, 0.0) * m / max(m - 1, 1)
    return mean, math.sqrt(var / m)


@dataclass(frozen=True)
class LearningCurveReport:
    mean_mse_in: float
    se_in: float
    mean_mse_out: float
    se_out: float
    trials: int

    def __iter__(self):
        return iter((self.mean_mse_in, self.mean_mse_out))


def learning_curve_mc(n, p, sigma2, trials, rng: RngStream, workers=1) -> LearningCurveReport:
    """In-sample MSE and fresh-point squared error of OLS with Gaussian rows and noise."""
    if not n > p >= 1:
        raise ValidationError(f"need n > p >= 1, got n={n}, p={p}")
    if trials < 1000:
        raise ValidationError(f"learning_curve_mc needs at least 1000 trials, got {trials}")
    if sigma2 < 0:
        raise ValidationError("sigma2 must be >= 0")
    beta = np.ones(p)
    sd = math.sqrt(sigma2)

    def chunk(m, r):
        s_in = s_in2 = s_out = s_out2 = 0.0
        for _ in range(m):
            x = r.normal((n, p))
            y = x @ beta + sd * r.normal(n)
            fit = ols_qr(x, y)
            x0 = r.normal(p)
            y0 = x0 @ beta + sd * r.normal()
            e_in = fit.sse / n
            e_out = (y0 - x0 @ fit.beta_hat) ** 2
            s_in += e_in
            s_in2 += e_in * e_in
            s_out += e_out
            s_out2 += e_out * e_out
        return {"in": s_in, "in2": s_in2, "out": s_out, "out2": s_out2}

    t = _mc(trials, rng, workers, chunk)
    mi, si = _mean_se(t["in"], t["in2"], trials)
    mo, so = _mean_se(t["out"], t["out2"], trials)
    return LearningCurveReport(mi, si, mo, so, trials)


@dataclass(frozen=True)
class SamplingReport:
    beta_mean: np.ndarray
    beta_se: np.ndarray
    beta_cov: np.ndarray
    cov_target: np.ndarray
    sse_mean: float
    sse_se: float
    sse_var: float
    max_abs_corr_e_yhat: float
    trials: int


def sampling_dist_mc(x, beta, sigma2, trials, rng: RngStream, workers=1) -> SamplingReport:
    """Empirical law of beta_hat, SSE and the residual/fit correlation for a fixed design.

    All replicates share one QR factorization; each chunk solves its block of
    simulated responses at once.
    """
    x = as_matrix(x)
    beta = as_vector(beta, "beta")
    n, p = x.shape
    if beta.size != p:
        raise ShapeError(f"beta has {beta.size} entries, X has {p} columns")
    if trials < 5000:
        raise ValidationError(f"sampling_dist_mc needs at least 5000 trials, got {trials}")
    if rank(x) < p:
        raise RankDeficientError("sampling_dist_mc needs full column rank", cols=p)
    f = qr_householder(x, mode="full")
    q1, r1 = f.q[:, :p], f.r[:p, :p]
    mean_y = x @ beta
    sd = math.sqrt(sigma2)
    block = 2000

    def chunk(m, r):
        acc = {"b": np.zeros(p), "bb": np.zeros((p, p)), "s": 0.0, "s2": 0.0,
               "e": np.zeros(n), "yh": np.zeros(n), "ee": np.zeros(n), "hh": np.zeros(n), "eh": np.zeros((n, n))}
        done = 0
        while done < m:
            k = min(block, m - done)
            y = mean_y[:, None] + sd * r.normal((n, k))
            bh = solve_triangular(r1, q1.T @ y, "upper")
            yh = x @ bh
            e = y - yh
            sse = np.sum(e * e, axis=0)
            acc["b"] += bh.sum(axis=1)
            acc["bb"] += bh @ bh.T
            acc["s"] += float(sse.sum())
            acc["s2"] += float(sse @ sse)
            acc["e"] += e.sum(axis=1)
            acc["yh"] += yh.sum(axis=1)
            acc["ee"] += np.sum(e * e, axis=1)
            acc["hh"] += np.sum(yh * yh, axis=1)
            acc["eh"] += e @ yh.T
            done += k
        return acc

    t = _mc(trials, rng, workers, chunk)
    m = trials
    bmean = t["b"] / m
    bcov = (t["bb"] - m * np.outer(bmean, bmean)) / (m - 1)
    bse = np.sqrt(np.clip(np.diag(bcov), 0.0, None) / m)
    smean, sse_se = _mean_se(t["s"], t["s2"], m)
    svar = max(t["s2"] / m - smean * smean, 0.0) * m / (m - 1)
    em, hm = t["e"] / m, t["yh"] / m
    cov_eh = t["eh"] / m - np.outer(em, hm)
    ve = np.clip(t["ee"] / m - em * em, 0.0, None)
    vh = np.clip(t["hh"] / m - hm * hm, 0.0, None)
    denom = np.sqrt(np.outer(ve, vh))
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = np.where(denom > 0, cov_eh / denom, 0.0)
    target = sigma2 * solve_triangular(r1, solve_triangular(r1.T, np.eye(p), "lower"), "upper")
    return SamplingReport(bmean, bse, bcov, target, smean, sse_se, svar, float(np.max(np.abs(corr))), m)


@dataclass(frozen=True)
class MseReport:
    mse_mle: float
    mse_unbiased: float
    mse_min_mse: float
    se_diff: float  # standard error of the paired difference MSE(min_mse) - MSE(unbiased)
    trials: int


def sigma2_mse_mc(n, p, sigma2, trials, rng: RngStream, workers=1) -> MseReport:
    """Monte Carlo MSE of the three noise-variance estimators on a fixed Gaussian design."""
    if n - p < 3:
        raise ValidationError(f"need n - p >= 3, got n={n}, p={p}")
    x = rng.spawn(10_000).normal((n, p))
    f = qr_householder(x, mode="full")
    q2 = f.q[:, p:]
    sd = math.sqrt(sigma2)

    def chunk(m, r):
        y = sd * r.normal((n, m))
        sse = np.sum((q2.T @ y) ** 2, axis=0)
        errs = [(sse / k - sigma2) ** 2 for k in (n, n - p, n - p + 2)]
        d = errs[2] - errs[1]
        return {"mle": errs[0].sum(), "unb": errs[1].sum(), "min": errs[2].sum(), "d": d.sum(), "d2": d @ d}

    t = _mc(trials, rng, workers, chunk)
    _, se_d = _mean_se(t["d"], t["d2"], trials)
    return MseReport(t["mle"] / trials, t["unb"] / trials, t["min"] / trials, se_d, trials)


@dataclass(frozen=True)
class CrlbReport:
    empirical_var: float
    var_se: float
    target_var: float
    trials: int


def crlb_check_1d(x, beta, sigma2, n_repeats, trials, rng: RngStream) -> CrlbReport:
    """Variance of the 1-D LS slope when the design ``x`` is replicated ``n_repeats`` times."""
    x = as_vector(x, "x")
    if n_repeats < 1 or trials < 2:
        raise ValidationError("need n_repeats >= 1 and trials >= 2")
    xx = np.tile(x, n_repeats)
    sxx = float(xx @ xx)
    if sxx == 0:
        raise ValidationError("design x must be nonzero")
    y = beta * xx[:, None] + math.sqrt(sigma2) * rng.normal((xx.size, trials))
    b = (xx @ y) / sxx
    var = float(np.var(b, ddof=1))
    return CrlbReport(var, var * math.sqrt(2.0 / (trials - 1)), sigma2 / sxx, trials)
