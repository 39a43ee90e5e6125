import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from linmod import RngStream, inference, ls
from linmod.distributions import cdf_f, sf_f
from linmod.errors import ValidationError
from linmod.ls import LsFit


def fake_fit(sse, n, p):
    return LsFit(np.zeros(p), np.zeros(n), np.zeros(n), sse, n - p, p, "qr")


def with_intercept(g, n, k):
    return np.hstack([np.ones((n, 1)), g.normal(size=(n, k))])


def test_sigma_estimates_examples():
    e = inference.sigma2_estimates(fake_fit(12.0, 10, 4))
    assert (e.mle, e.unbiased, e.min_mse) == pytest.approx((1.2, 2.0, 1.5))
    z = inference.sigma2_estimates(fake_fit(0.0, 10, 4))
    assert (z.mle, z.unbiased, z.min_mse) == (0.0, 0.0, 0.0)
    with pytest.raises(ValidationError):
        inference.sigma2_estimates(fake_fit(1.0, 5, 3))


@given(st.floats(0, 1e6), st.integers(1, 20), st.integers(3, 30))
def test_sigma_estimates_ordering(sse, p, extra):
    e = inference.sigma2_estimates(fake_fit(sse, p + extra, p))
    assert e.min_mse <= e.unbiased
    if p >= 2:
        assert e.mle <= e.min_mse
    else:
        # with one column n - p + 2 = n + 1 exceeds n, so the order flips
        assert e.min_mse <= e.mle


def test_sigma_estimates_monte_carlo():
    r = RngStream(3)
    n, p = 30, 5
    x = r.normal((n, p))
    q2 = np.linalg.qr(x, mode="complete")[0][:, p:]
    y = r.normal((n, 20000))
    sse = np.sum((q2.T @ y) ** 2, axis=0)
    for values, target in ((sse / (n - p), 1.0), (sse / n, (n - p) / n)):
        assert abs(values.mean() - target) <= 3 * values.std(ddof=1) / math.sqrt(values.size)


def test_min_mse_closed_form_argmin():
    assert inference.sigma2_mse(25, 30, 5) == pytest.approx(2 / 25)
    for n in range(5, 51):
        for p in range(1, n - 2):
            assert inference.min_mse_k(n, p) == n - p + 2
            ks = np.arange(n - p, n + 1)
            if n - p + 2 <= n:
                assert inference.min_mse_k(n, p, ks) == n - p + 2


def test_anova_identities(rs):
    x = with_intercept(rs, 20, 3)
    y = x @ np.array([1.0, 0.5, -1.0, 0.0]) + rs.normal(size=20)
    t = inference.anova(x, y)
    assert t.sst == pytest.approx(t.sse + t.ssr, rel=1e-9)
    assert t.df == (19, 16, 3)
    assert t.r2 == pytest.approx(1 - t.sse / t.sst)
    assert t.adj_r2 == pytest.approx(1 - (1 - t.r2) * 19 / 16)
    assert t.f_stat == pytest.approx((t.sse / 16) / (t.ssr / 3))
    assert t.p_value == pytest.approx(sf_f(t.f_stat, 16, 3))
    assert t.f_conventional == pytest.approx(1 / t.f_stat)
    assert t.p_value_conventional == pytest.approx(sf_f(t.f_conventional, 3, 16))
    assert 0 <= t.p_value <= 1 and not t.degenerate


def test_anova_edge_cases(rs):
    x = with_intercept(rs, 10, 2)
    d = inference.anova(x, np.full(10, 3.0))
    assert d.degenerate and d.r2 == 0.0 and d.sst == pytest.approx(0.0, abs=1e-20)
    exact = inference.anova(x, x @ np.array([1.0, 2.0, 3.0]))
    assert exact.sse == pytest.approx(0.0, abs=1e-18) and exact.r2 == pytest.approx(1.0)
    with pytest.raises(ValidationError):
        inference.anova(rs.normal(size=(10, 2)), rs.normal(size=10))


def test_anova_defining_matrices(rs):
    for _ in range(10):
        n = int(rs.integers(6, 25))
        p = int(rs.integers(2, n - 1))
        x = with_intercept(rs, n, p - 1)
        i_h, h_h1, h1 = inference.anova_projectors(x)
        for a, r in ((i_h, n - p), (h_h1, p - 1), (h1, 1), (i_h + h_h1, n - 1)):
            assert np.trace(a) == pytest.approx(r, abs=1e-8)
            assert np.linalg.norm(a @ a - a) <= 1e-9


def test_cochran_cases(rs):
    x = with_intercept(rs, 12, 3)
    rep = inference.cochran_check(inference.anova_projectors(x))
    assert rep.passed and rep.ranks == (8, 3, 1) and sum(rep.ranks) == 12
    assert inference.cochran_check([np.eye(5)]).passed
    h = ls.hat_matrix(x).h
    bad = inference.cochran_check([h, h])
    assert not bad.sums_to_identity and not bad.passed


def test_f_test_full_subset_and_direct_rss(rs):
    x, y = rs.normal(size=(15, 4)), rs.normal(size=15)
    r = inference.f_test_submodel(x, y, range(4))
    assert (r.statistic, r.p_value) == (0.0, 1.0)
    t = inference.f_test_submodel(x, y, [0, 2])
    rss = ls.ols_qr(x, y).sse
    rss1 = ls.ols_qr(x[:, [0, 2]], y).sse
    assert t.rss == pytest.approx(rss, abs=1e-10) and t.rss_sub == pytest.approx(rss1, abs=1e-10)
    assert t.rss_check <= 1e-10
    assert t.statistic == pytest.approx(((rss1 - rss) / 2) / (rss / 11), rel=1e-10)
    assert t.p_value == pytest.approx(1 - cdf_f(t.statistic, 2, 11), abs=1e-12)
    with pytest.raises(ValidationError):
        inference.f_test_submodel(x, y, [0, 0])
    with pytest.raises(ValidationError):
        inference.f_test_submodel(x, y, [7])


def test_f_test_orthogonal_design_zero_coefficient():
    q = np.linalg.qr(np.random.default_rng(2).normal(size=(12, 3)))[0]
    noise = np.linalg.qr(np.column_stack([q, np.random.default_rng(3).normal(size=12)]))[0][:, 3]
    y = q @ np.array([2.0, -1.0, 0.0]) + 1e-6 * noise
    t = inference.f_test_submodel(q, y, [0, 1])
    assert t.statistic == pytest.approx(0.0, abs=1e-12)
    assert t.p_value == pytest.approx(1.0, abs=1e-9)
    assert inference.f_test_submodel(q, y, [1, 2]).p_value < 1e-12


def test_f_test_null_calibration():
    r = RngStream(17)
    n, p, q = 25, 4, 2
    stats = []
    for _ in range(2000):
        x = r.normal((n, p))
        y = x[:, :q] @ np.array([1.0, 2.0]) + r.normal(n)
        stats.append(inference.f_test_submodel(x, y, range(q)).statistic)
    assert inference.ks_distance(np.array(stats), lambda s: cdf_f(s, p - q, n - p)) <= 0.035


def test_selection_planted_signal_and_invariants():
    for s in range(10):
        r = RngStream(100 + s)
        x = r.normal((40, 6))
        y = 3.0 * x[:, 0] + 0.01 * r.normal(40)
        rep = inference.variable_selection(x, y, 0.05)
        assert 0 in rep.kept
        assert all(pv >= 0.05 for _, pv in rep.dropped)
        assert all(rep.final_p_values[j] < 0.05 for j in rep.kept)
        assert set(rep.kept) | {j for j, _ in rep.dropped} == set(range(6))


def test_selection_pure_noise():
    kept = [len(inference.variable_selection(RngStream(s).normal((60, 10)), RngStream(s, 1).normal(60)).kept)
            for s in range(20)]
    assert all(k <= 5 for k in kept)


def test_selection_cutoff_extremes(rs):
    x, y = rs.normal(size=(30, 4)), rs.normal(size=30)
    high = inference.variable_selection(x, y, 1 - 1e-9)
    assert high.dropped == [] and high.kept == (0, 1, 2, 3)
    low = inference.variable_selection(x, y, 1e-300)
    assert low.kept == () and len(low.dropped) == 4
    with pytest.raises(ValidationError):
        inference.variable_selection(x, y, 1.0)


def test_selection_protects_columns():
    x = np.hstack([np.ones((20, 1)), np.random.default_rng(0).normal(size=(20, 2))])
    rep = inference.variable_selection(x, np.random.default_rng(1).normal(size=20), 0.999, protect=[0])
    assert 0 in rep.kept


def test_quadratic_expectation(rs):
    a = rs.normal(size=(4, 4))
    assert inference.quadratic_expectation(a, np.zeros(4), np.eye(4)) == pytest.approx(np.trace(a))
    assert inference.quadratic_expectation(np.eye(4), np.zeros(4), 2.5 * np.eye(4)) == pytest.approx(10.0)
    mu = rs.normal(size=4)
    c = rs.normal(size=(4, 4))
    sigma = c @ c.T
    b = RngStream(9).normal((1_000_000, 4)) @ np.linalg.cholesky(sigma).T + mu
    vals = np.einsum("ij,jk,ik->i", b, a, b)
    target = inference.quadratic_expectation(a, mu, sigma)
    assert abs(vals.mean() - target) <= 4 * vals.std(ddof=1) / math.sqrt(vals.size)


def test_learning_curve_small_run():
    rep = inference.learning_curve_mc(40, 4, 1.0, 4000, RngStream(2))
    assert abs(rep.mean_mse_in - 36 / 40) <= 3 * rep.se_in
    assert rep.mean_mse_out == pytest.approx(44 / 40, rel=0.08)
    quiet = inference.learning_curve_mc(10, 2, 0.0, 1000, RngStream(2))
    assert quiet.mean_mse_in <= 1e-20 and quiet.mean_mse_out <= 1e-20
    with pytest.raises(ValidationError):
        inference.learning_curve_mc(10, 2, 1.0, 10, RngStream(2))


def test_worker_split_is_deterministic():
    a = inference.learning_curve_mc(20, 2, 1.0, 1200, RngStream(4), workers=3)
    b = inference.learning_curve_mc(20, 2, 1.0, 1200, RngStream(4), workers=3)
    assert a == b


def test_sampling_distribution_fixed_design():
    r = RngStream(21)
    x = r.normal((20, 3))
    beta = np.array([1.0, -2.0, 0.5])
    rep = inference.sampling_dist_mc(x, beta, 1.0, 20000, r.spawn(1))
    assert np.all(np.abs(rep.beta_mean - beta) <= 3 * rep.beta_se)
    assert abs(rep.sse_mean - 17) <= 3 * rep.sse_se
    assert rep.max_abs_corr_e_yhat <= 4 / math.sqrt(rep.trials)
    assert np.linalg.norm(rep.beta_cov - rep.cov_target) <= 0.1 * np.linalg.norm(rep.cov_target)


def test_crlb_1d():
    x = np.linspace(-1, 2, 10)
    one = inference.crlb_check_1d(x, 1.5, 2.0, 1, 20000, RngStream(8))
    assert one.target_var == pytest.approx(2.0 / (x @ x))
    assert abs(one.empirical_var - one.target_var) <= 3 * one.var_se
    four = inference.crlb_check_1d(x, 1.5, 2.0, 4, 20000, RngStream(8, 1))
    assert math.sqrt(four.empirical_var / one.empirical_var) == pytest.approx(0.5, rel=0.1)
    assert inference.crlb_check_1d(x, 1.5, 0.0, 2, 100, RngStream(8)).empirical_var == 0.0


def test_ks_distance_known_values():
    assert inference.ks_distance([0.5], lambda s: s) == pytest.approx(0.5)
    u = (np.arange(1000) + 0.5) / 1000
    assert inference.ks_distance(u, lambda s: s) == pytest.approx(0.0005)
