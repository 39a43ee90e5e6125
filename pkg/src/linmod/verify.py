"""Acceptance suites: seeded numerical checks with explicit tolerances.

Each suite returns a :class:`SuiteResult` made of :class:`Check` rows. The
text and JSON reports contain only seeded quantities (no timings), so two
runs with the same seed and backend are byte-identical.
"""
import json
import math
from dataclasses import dataclass, field
from typing import Callable, List

import numpy as np

from . import bayes, decomp, gp, inference, kernels, ls
from .distributions import cdf_f
from .matrix import rank as rref_rank
from .rng import RngStream

SCHEMA_VERSION = 1


_OPS = {
    "<=": lambda a, b: a <= b,
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
    "==": lambda a, b: a == b,
}


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    bound: float
    op: str = "<="  # one of <=, >=, >, ==

    @property
    def passed(self):
        return bool(_OPS[self.op](self.value, self.bound))


@dataclass
class SuiteResult:
    number: int
    name: str
    checks: List[Check] = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def add(self, name, value, bound, op="<="):
        self.checks.append(Check(name, float(value), float(bound), op))


def _fro(a):
    return float(np.linalg.norm(a))


def _orth_err(q):
    return _fro(q.T @ q - np.eye(q.shape[1]))


def _random_matrix(r: RngStream, n_max=30, p_max=20, deficient=None):
    n = int(r.integers(1, n_max + 1))
    p = int(r.integers(1, p_max + 1))
    full = min(n, p)
    if deficient is None:
        deficient = bool(r.integers(2))
    k = int(r.integers(0, full)) if deficient and full > 1 else full
    if deficient and full == 1:
        k = 0 if r.uniform() < 0.1 else 1
    x = r.normal((n, k)) @ r.normal((k, p)) if k < full else r.normal((n, p))
    return x, k


def suite_factorizations(seed) -> SuiteResult:
    res = SuiteResult(1, "factorizations")
    r = RngStream(seed, 1)
    recon = orth = 0.0
    rank_mismatch = 0
    for _ in range(200):
        x, _ = _random_matrix(r)
        nf = max(_fro(x), 1e-300)
        facs = [decomp.qr(x, "full", a) for a in ("gram_schmidt", "householder", "givens")]
        l = decomp.lq(x)
        u1, u2 = decomp.ulv(x), decomp.urv(x)
        c = decomp.cr(x)
        s = decomp.svd(x, mode="full")
        for f in facs:
            recon = max(recon, _fro(f.reconstruct() - x) / nf)
            orth = max(orth, _orth_err(f.q))
        recon = max(recon, _fro(l.reconstruct() - x) / nf, _fro(c.reconstruct() - x) / nf)
        orth = max(orth, _orth_err(l.q.T))
        for f in (u1, u2):
            recon = max(recon, _fro(f.reconstruct() - x) / nf)
            orth = max(orth, _orth_err(f.u), _orth_err(f.v))
        recon = max(recon, _fro(s.reconstruct() - x) / nf)
        orth = max(orth, _orth_err(s.u), _orth_err(s.v))
        ranks = {u1.rank, u2.rank, s.rank, rref_rank(x), c.rank}
        rank_mismatch += len(ranks) != 1
    res.add("max reconstruction / ||X||_F", recon, 1e-9)
    res.add("max orthogonality ||Q^T Q - I||_F", orth, 1e-10)
    res.add("rank disagreements (ulv/urv/svd/rref/cr)", rank_mismatch, 0, "==")
    return res


def suite_qr_uniqueness(seed) -> SuiteResult:
    res = SuiteResult(2, "qr uniqueness")
    r = RngStream(seed, 2)
    worst = 0.0
    for _ in range(100):
        p = int(r.integers(1, 11))
        n = int(r.integers(p, 31))
        x = r.normal((n, p))
        fs = [decomp.positive_diagonal(decomp.qr(x, "reduced", a)) for a in ("gram_schmidt", "householder", "givens")]
        for f in fs[1:]:
            worst = max(worst, float(np.max(np.abs(f.q - fs[0].q))), float(np.max(np.abs(f.r - fs[0].r))))
    res.add("max entrywise gap between algorithms", worst, 1e-8)
    x = np.array([[4.0, 1.0], [3.0, 2.0]])
    q_ref = np.array([[0.8, -0.6], [0.6, 0.8]])
    r_ref = np.array([[5.0, 2.0], [0.0, 1.0]])
    ex = 0.0
    for a in ("gram_schmidt", "householder", "givens"):
        f = decomp.positive_diagonal(decomp.qr(x, "reduced", a))
        ex = max(ex, float(np.max(np.abs(f.q - q_ref))), float(np.max(np.abs(f.r - r_ref))))
    res.add("2x2 worked example max error", ex, 1e-12)
    return res


def suite_solvers(seed) -> SuiteResult:
    res = SuiteResult(3, "solver equivalence")
    r = RngStream(seed, 3)
    full_gap = def_gap = 0.0
    norm_violations = 0
    for _ in range(100):
        p = int(r.integers(1, 9))
        n = int(r.integers(p + 1, 41))
        x = r.normal((n, p))
        y = r.normal(n)
        bs = [ls.ols(x, y, m).beta_hat for m in ("normal", "qr", "utv", "svd")]
        scale = max(1.0, float(np.max(np.abs(bs[1]))))
        full_gap = max(full_gap, max(float(np.max(np.abs(b - bs[1]))) for b in bs) / scale)
    for _ in range(100):
        p = int(r.integers(2, 9))
        n = int(r.integers(2, 41))
        k = int(r.integers(1, min(n, p)))
        x = r.normal((n, k)) @ r.normal((k, p))
        y = r.normal(n)
        bu = ls.ols_utv(x, y).beta_hat
        bsv = ls.ols_svd(x, y).beta_hat
        def_gap = max(def_gap, float(np.max(np.abs(bu - bsv))))
        s = decomp.svd(x, mode="full")
        null = s.v[:, s.rank:]
        nb = float(np.linalg.norm(bsv))
        for _ in range(100):
            alt = bsv + null @ r.normal(null.shape[1])
            if np.linalg.norm(alt) < nb * (1 - 1e-12):
                norm_violations += 1
    res.add("full rank: max relative gap across 4 solvers", full_gap, 1e-9)
    res.add("rank deficient: max |utv - svd|", def_gap, 1e-8)
    res.add("alternative minimizers shorter than solution", norm_violations, 0, "==")
    return res


def suite_penrose(seed) -> SuiteResult:
    res = SuiteResult(4, "penrose conditions")
    r = RngStream(seed, 4)
    cond = agree = 0.0
    for i in range(100):
        x, _ = _random_matrix(r, 20, 15, deficient=(i % 2 == 1))
        nf = max(_fro(x), 1e-300)
        a = ls.pinv(x)
        b = ls.pinv_cr(x)
        cond = max(cond, max(a.penrose_residuals) / nf, max(b.penrose_residuals) / nf)
        agree = max(agree, float(np.max(np.abs(a.x_plus - b.x_plus))))
    res.add("max Penrose residual / ||X||_F", cond, 1e-8)
    res.add("max |X+_svd - X+_cr|", agree, 1e-8)
    return res


def suite_projections(seed) -> SuiteResult:
    res = SuiteResult(5, "projections and cochran")
    r = RngStream(seed, 5)
    idem = sym = tr = pyth = cross = 0.0
    cochran_fail = rank_fail = 0
    for _ in range(50):
        n = int(r.integers(5, 31))
        p = int(r.integers(2, n))
        x = np.hstack([np.ones((n, 1)), r.normal((n, p - 1))])
        y = r.normal(n)
        h = ls.hat_matrix(x).h
        idem = max(idem, _fro(h @ h - h))
        sym = max(sym, _fro(h - h.T))
        tr = max(tr, abs(float(np.trace(h)) - p))
        fit = ls.ols_qr(x, y)
        yy = float(y @ y)
        pyth = max(pyth, abs(yy - float(fit.fitted @ fit.fitted) - float(fit.residuals @ fit.residuals)) / yy)
        rep = inference.cochran_check(inference.anova_projectors(x))
        cochran_fail += not rep.passed
        rank_fail += rep.ranks != (n - p, p - 1, 1)
        cross = max(cross, rep.max_cross)
    res.add("max ||H^2 - H||_F", idem, 1e-9)
    res.add("max ||H - H^T||_F", sym, 1e-9)
    res.add("max |trace(H) - p|", tr, 1e-8)
    res.add("max Pythagoras relative gap", pyth, 1e-9)
    res.add("max pairwise ||A_i A_j||_F", cross, 1e-9)
    res.add("cochran failures", cochran_fail, 0, "==")
    res.add("rank tuples != (n-p, p-1, 1)", rank_fail, 0, "==")
    return res


def suite_sampling(seed) -> SuiteResult:
    res = SuiteResult(6, "sampling distribution")
    r = RngStream(seed, 6)
    n, p = 30, 5
    x = r.normal((n, p))
    beta = np.array([1.0, -0.5, 2.0, 0.0, 0.75])
    rep = inference.sampling_dist_mc(x, beta, 1.0, 20000, r.spawn(1))
    z = np.abs(rep.beta_mean - beta) / rep.beta_se
    res.add("max |mean(beta_hat) - beta| / stderr", float(np.max(z)), 3.0)
    res.add("cov(beta_hat) relative Frobenius error", _fro(rep.beta_cov - rep.cov_target) / _fro(rep.cov_target), 0.10)
    res.add("|mean(SSE) - 25| / stderr", abs(rep.sse_mean - (n - p)) / rep.sse_se, 3.0)
    res.add("|var(SSE) - 50| / 50", abs(rep.sse_var - 2 * (n - p)) / (2 * (n - p)), 0.10)
    return res


def suite_learning_curve(seed) -> SuiteResult:
    res = SuiteResult(7, "learning curve")
    rep = inference.learning_curve_mc(100, 5, 1.0, 20000, RngStream(seed, 7))
    res.add("|E[MSE_in] - 0.95| / stderr", abs(rep.mean_mse_in - 0.95) / rep.se_in, 3.0)
    res.add("|E[MSE_out] - 1.05| / 1.05", abs(rep.mean_mse_out - 1.05) / 1.05, 0.05)
    return res


def suite_min_mse(seed) -> SuiteResult:
    res = SuiteResult(8, "minimum-MSE estimator")
    misses = 0
    for n in range(5, 51):
        for p in range(1, n - 2):
            misses += inference.min_mse_k(n, p) != n - p + 2
    res.add("(n, p) pairs whose argmin k != n - p + 2", misses, 0, "==")
    mc = inference.sigma2_mse_mc(30, 5, 1.0, 20000, RngStream(seed, 8))
    res.add("MSE(min_mse) - MSE(S^2) in stderrs", (mc.mse_min_mse - mc.mse_unbiased) / mc.se_diff, 3.0)
    return res


def suite_f_tests(seed) -> SuiteResult:
    res = SuiteResult(9, "F-test calibration and selection")
    r = RngStream(seed, 9)
    n, p, q = 30, 5, 3
    stats = np.empty(5000)
    for i in range(stats.size):
        x = r.normal((n, p))
        y = x[:, :q] @ np.array([1.0, -1.0, 0.5]) + r.normal(n)
        stats[i] = inference.f_test_submodel(x, y, range(q)).statistic
    ks = inference.ks_distance(stats, lambda s: cdf_f(s, p - q, n - p))
    res.add("KS distance to F(p-q, n-p)", ks, 0.025)
    lost = 0
    decoys = dropped = 0
    for s in range(50):
        rs = RngStream(seed, 900 + s)
        x = rs.normal((40, 6))
        y = 3.0 * x[:, 0] + 0.01 * rs.normal(40)
        rep = inference.variable_selection(x, y, 0.05)
        lost += 0 not in rep.kept
        decoys += 5
        dropped += sum(1 for j in range(1, 6) if j not in rep.kept)
    res.add("seeds losing the planted signal", lost, 0, "==")
    res.add("fraction of decoys dropped", dropped / decoys, 0.70, ">=")
    return res


def suite_bayes(seed) -> SuiteResult:
    res = SuiteResult(10, "bayesian")
    r = RngStream(seed, 10)
    n, p = 25, 3
    x = r.normal((n, p))
    y = x @ np.array([1.0, -2.0, 0.5]) + r.normal(n)
    pm = r.normal((p, p)) + 3 * np.eye(p)
    a = bayes.posterior_g_prior(x, y, 0.8, 10.0)
    b = bayes.posterior_g_prior(x @ pm, y, 0.8, 10.0)
    inv = max(float(np.max(np.abs(pm @ b.mean - a.mean))), float(np.max(np.abs(pm @ b.cov @ pm.T - a.cov))))
    res.add("g-prior reparameterization gap", inv, 1e-9)
    lam = 0.7
    ridge_gap = float(np.max(np.abs(ls.ridge(x, y, lam) - bayes.posterior_zero_mean(x, y, lam, np.eye(p)).mean)))
    res.add("ridge vs zero-mean posterior mean", ridge_gap, 1e-10)
    beta0 = r.normal(p)
    s0 = np.diag([2.0, 0.5, 1.5])
    nig = bayes.posterior_nig(x, y, beta0, s0, 2.0, 3.0)
    xtx = x.T @ x
    c = ls.inverse(xtx + ls.inverse(s0)) @ xtx
    bhat = ls.ols_qr(x, y).beta_hat
    res.add("NIG weighted-average identity", float(np.max(np.abs(nig.beta3 - ((np.eye(p) - c) @ beta0 + c @ bhat)))), 1e-10)
    s2 = 0.6
    tr = bayes.gibbs_semiconjugate(x, y, beta0, s0, 1e8, 1e8 * s2, 20000, rng=r.spawn(1))
    oracle = bayes.posterior_semiconjugate(x, y, s2, beta0, s0).mean
    kb = tr.kept_beta
    z = np.abs(kb.mean(axis=0) - oracle) / (kb.std(axis=0, ddof=1) / math.sqrt(kb.shape[0]))
    res.add("Gibbs mean vs conditional oracle (stderrs)", float(np.max(z)), 3.0)
    x2 = r.normal((30, 2))
    y2 = 0.4 * x2[:, 0] + r.normal(30)
    chain = bayes.gibbs_variable_selection(x2, y2, 30.0, iters=10000, rng=r.spawn(2))
    exact = bayes.enumerate_mask_posterior(x2, y2, 30.0)
    freq = chain.mask_frequencies()
    tv = 0.5 * sum(abs(exact.get(k, 0.0) - freq.get(k, 0.0)) for k in set(exact) | set(freq))
    res.add("p=2 mask posterior total variation", tv, 0.03)
    return res


def suite_gp(seed) -> SuiteResult:
    res = SuiteResult(11, "gaussian processes")
    r = RngStream(seed, 11)
    worst = 0.0
    for _ in range(50):
        n = int(r.integers(1, 31))
        p = int(r.integers(1, 6))
        a = r.normal((p, p))
        worst = max(worst, gp.weight_space_equivalence(
            r.normal((n, p)), r.normal(n), r.normal((5, p)), a @ a.T + 0.5 * np.eye(p), 0.1 + r.uniform()))
    res.add("weight-space vs kernel-form max discrepancy", worst, 1e-8)
    k = gp.Kernel.gaussian(0.5)
    xt = r.normal((10, 2))
    yt = r.normal(10)
    post = gp.gp_posterior(k, xt, yt, xt)
    res.add("interpolation: max |mean - y|", float(np.max(np.abs(post.mean - yt))), 1e-8)
    res.add("interpolation: max posterior variance", float(np.max(np.abs(np.diag(post.cov)))), 1e-8)
    x = np.hstack([np.ones((8, 1)), r.normal((8, 1))])
    y = x @ np.array([0.5, 1.5]) + 0.3 * r.normal(8)
    x0 = np.array([[1.0, 0.3]])
    base = ls.ols_qr(x, y).beta_hat
    variances, drift = [], 0.0
    for m in range(1, 5):
        xk, yk = np.tile(x, (m, 1)), np.tile(y, m)
        drift = max(drift, float(np.max(np.abs(ls.ols_qr(xk, yk).beta_hat - base))))
        variances.append(float(gp.gp_posterior(gp.Kernel.gaussian(0.5), xk, yk, x0, noise=0.25).cov[0, 0]))
    steps = [variances[i] - variances[i + 1] for i in range(3)]
    res.add("min variance decrease over k=1..4", min(steps), 0.0, ">")
    res.add("OLS coefficient drift under duplication", drift, 1e-10)
    return res


def _fingerprint(seed):
    r = RngStream(seed, 12)
    x = r.normal((15, 2))
    y = x @ np.array([1.0, -1.0]) + r.normal(15)
    t = bayes.gibbs_variable_selection(x, y, 15.0, iters=200, rng=r.spawn(1)).to_csv()
    lc = inference.learning_curve_mc(20, 2, 1.0, 1000, r.spawn(2))
    return t + repr((lc.mean_mse_in, lc.mean_mse_out))


def suite_determinism(seed) -> SuiteResult:
    res = SuiteResult(12, "determinism")
    res.add("seeded reruns differing", int(_fingerprint(seed) != _fingerprint(seed)), 0, "==")
    return res


SUITES: List[Callable[[int], SuiteResult]] = [
    suite_factorizations,
    suite_qr_uniqueness,
    suite_solvers,
    suite_penrose,
    suite_projections,
    suite_sampling,
    suite_learning_curve,
    suite_min_mse,
    suite_f_tests,
    suite_bayes,
    suite_gp,
    suite_determinism,
]


def run_all(seed=42, only=None) -> List[SuiteResult]:
    chosen = SUITES if not only else [s for i, s in enumerate(SUITES, 1) if i in set(only)]
    return [suite(seed) for suite in chosen]


def _fmt(v):
    return f"{v:.6g}" if float(v).is_integer() and abs(v) < 1e15 else f"{v:.6e}"


def format_text(results, seed) -> str:
    lines = [f"linmod verify seed={seed} backend={kernels.get_backend()}"]
    for s in results:
        lines.append(f"[{'PASS' if s.passed else 'FAIL'}] {s.number:2d} {s.name}")
        for c in s.checks:
            mark = "ok " if c.passed else "BAD"
            lines.append(f"    {mark} {c.name}: {_fmt(c.value)} (need {c.op} {_fmt(c.bound)})")
    ok = sum(s.passed for s in results)
    lines.append(f"summary: {ok}/{len(results)} suites passed")
    return "\n".join(lines) + "\n"


def format_json(results, seed) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": "verify",
        "seed": seed,
        "backend": kernels.get_backend(),
        "passed": all(s.passed for s in results),
        "suites": [
            {
                "number": s.number,
                "name": s.name,
                "passed": s.passed,
                "checks": [
                    {"name": c.name, "value": c.value, "op": c.op, "bound": c.bound, "passed": c.passed}
                    for c in s.checks
                ],
            }
            for s in results
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"
