import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from linmod import decomp
from linmod.errors import ShapeError, ValidationError
from linmod.matrix import rank as rref_rank

from oracles import cubic_symmetric_eigs, symmetric_2x2_eigs

ALGOS = ("gram_schmidt", "householder", "givens")


def fro(a):
    return float(np.linalg.norm(a))


def orth_err(q):
    return fro(q.T @ q - np.eye(q.shape[1]))


def low_rank(g, n, p, k):
    return g.normal(size=(n, k)) @ g.normal(size=(k, p))


def assert_qr_invariants(f, x):
    nf = max(fro(x), 1e-300)
    assert orth_err(f.q) <= 1e-10 * math.sqrt(f.q.shape[1])
    assert np.all(np.abs(np.tril(f.r, -1)) <= 1e-12 * nf)
    assert fro(x - f.reconstruct()) <= 1e-10 * nf


@pytest.mark.parametrize("algorithm", ALGOS)
def test_qr_two_by_two_worked_example(algorithm, each_backend):
    f = decomp.positive_diagonal(decomp.qr([[4.0, 1.0], [3.0, 2.0]], "reduced", algorithm))
    np.testing.assert_allclose(f.q, [[0.8, -0.6], [0.6, 0.8]], rtol=0, atol=1e-12)
    np.testing.assert_allclose(f.r, [[5.0, 2.0], [0.0, 1.0]], rtol=0, atol=1e-12)


def test_gram_schmidt_orthonormal_input(rs):
    q0, _ = np.linalg.qr(rs.normal(size=(6, 3)))
    f = decomp.qr_gram_schmidt(q0)
    np.testing.assert_allclose(f.q, q0, atol=1e-13)
    np.testing.assert_allclose(f.r, np.eye(3), atol=1e-13)


def test_gram_schmidt_positive_diagonal_on_full_rank(rs):
    f = decomp.qr_gram_schmidt(rs.normal(size=(7, 4)))
    assert np.all(np.diag(f.r) > 0)


def test_gram_schmidt_dependent_column(each_backend):
    x = np.array([[1.0, 2.0], [2.0, 4.0], [-1.0, -2.0]])
    f = decomp.qr_gram_schmidt(x)
    assert f.r[1, 1] == 0.0
    assert f.dependent is not None and bool(f.dependent[1])
    assert fro(x - f.reconstruct()) <= 1e-10 * fro(x)
    assert orth_err(f.q) <= 1e-12


def test_householder_aligned_column():
    x = np.array([[3.0, 1.0], [0.0, 2.0], [0.0, 5.0]])
    f = decomp.qr_householder(x)
    assert fro(x - f.reconstruct()) <= 1e-12 * fro(x)
    assert f.r[0, 0] == pytest.approx(-3.0)


def test_householder_step_zero_pattern(rs, each_backend):
    x = rs.normal(size=(5, 4))
    for k in range(1, 5):
        part = decomp.qr_householder(x, steps=k)
        np.testing.assert_allclose(part.q @ part.r, x, atol=1e-12)
        for j in range(k):
            assert np.all(np.abs(part.r[j + 1:, j]) <= 1e-12)
        for j in range(k, 4):
            assert np.any(np.abs(part.r[k:, j]) > 1e-8)


def test_householder_matches_gram_schmidt_up_to_signs(rs):
    x = rs.normal(size=(8, 5))
    np.testing.assert_allclose(
        np.abs(decomp.qr_householder(x, "reduced").r), np.abs(decomp.qr_gram_schmidt(x).r), atol=1e-9
    )


def test_householder_reflector_properties(rs):
    for _ in range(20):
        x = rs.normal(size=int(rs.integers(1, 8)))
        h = decomp.householder_reflector(x)
        np.testing.assert_allclose(h, h.T, atol=1e-12)
        np.testing.assert_allclose(h @ h, np.eye(x.size), atol=1e-12)
        hx = h @ x
        assert hx[0] == pytest.approx(-math.copysign(np.linalg.norm(x), x[0]))
        np.testing.assert_allclose(hx[1:], 0.0, atol=1e-12)


def test_givens_pythagorean_pair():
    c, s = decomp.givens_rotation(3.0, 4.0)
    assert (c, s) == pytest.approx((0.6, 0.8))
    np.testing.assert_allclose(np.array([[c, s], [-s, c]]) @ [3.0, 4.0], [5.0, 0.0], atol=1e-15)


def test_givens_rotations_preserve_length(rs):
    for _ in range(200):
        a, b = rs.normal(size=2) * 10 ** rs.uniform(-5, 5)
        c, s = decomp.givens_rotation(a, b)
        v = np.array([[c, s], [-s, c]]) @ rs.normal(size=2)
        w = np.array([[c, s], [-s, c]]) @ [a, b]
        assert abs(c * c + s * s - 1) <= 1e-13
        assert abs(np.linalg.norm(w) - math.hypot(a, b)) <= 1e-13 * math.hypot(a, b)
        assert np.isfinite(v).all()


def test_givens_upper_triangular_input_is_fixed(each_backend):
    x = np.triu(np.arange(1.0, 13.0).reshape(4, 3))
    f = decomp.qr_givens(x)
    np.testing.assert_allclose(f.q, np.eye(4), atol=0)
    np.testing.assert_allclose(f.r, x, atol=0)


def test_givens_matches_householder(rs, each_backend):
    x = rs.normal(size=(5, 4))
    np.testing.assert_allclose(np.abs(decomp.qr_givens(x).r), np.abs(decomp.qr_householder(x).r), atol=1e-9)


@given(st.integers(1, 9), st.integers(1, 9), st.integers(0, 9), st.integers(0, 2**32 - 1), st.sampled_from(ALGOS))
def test_qr_invariants(n, p, k, seed, algorithm):
    x = low_rank(np.random.default_rng(seed), n, p, min(k, n, p))
    for mode in ("full", "reduced"):
        if algorithm == "gram_schmidt" and mode == "reduced" and n < p:
            with pytest.raises(ShapeError):
                decomp.qr(x, mode, algorithm)
            continue
        assert_qr_invariants(decomp.qr(x, mode, algorithm), x)


@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_positive_diagonal_qr_is_unique(p, seed):
    g = np.random.default_rng(seed)
    x = g.normal(size=(p + int(g.integers(0, 5)), p))
    fs = [decomp.positive_diagonal(decomp.qr(x, "reduced", a)) for a in ALGOS]
    for f in fs[1:]:
        np.testing.assert_allclose(f.q, fs[0].q, atol=1e-8)
        np.testing.assert_allclose(f.r, fs[0].r, atol=1e-8)


def test_qr_unknown_algorithm():
    with pytest.raises(ValidationError):
        decomp.qr(np.eye(2), algorithm="magic")


def test_lq_is_transposed_qr(rs):
    x = rs.normal(size=(3, 6))
    f = decomp.lq(x)
    g = decomp.qr(x.T)
    np.testing.assert_array_equal(f.l, g.r.T)
    np.testing.assert_array_equal(f.q, g.q.T)
    assert fro(x - f.reconstruct()) <= 1e-10 * fro(x)
    assert np.all(np.abs(np.triu(f.l, 1)) <= 1e-12 * fro(x))


def test_lq_row_orthonormal_input(rs):
    q0, _ = np.linalg.qr(rs.normal(size=(6, 3)))
    f = decomp.lq(q0.T, "reduced", "gram_schmidt")
    np.testing.assert_allclose(f.l, np.eye(3), atol=1e-13)


def test_utv_full_rank_square(rs):
    x = rs.normal(size=(4, 4))
    for f in (decomp.ulv(x), decomp.urv(x)):
        assert f.rank == 4 and f.t11.shape == (4, 4)
        assert fro(x - f.reconstruct()) <= 1e-9 * fro(x)
    assert np.all(np.abs(np.triu(decomp.ulv(x).t, 1)) <= 1e-12 * fro(x))
    assert np.all(np.abs(np.tril(decomp.urv(x).t, -1)) <= 1e-12 * fro(x))


def test_utv_rank_one(rs):
    a, b = rs.normal(size=4), rs.normal(size=3)
    for f in (decomp.ulv(np.outer(a, b)), decomp.urv(np.outer(a, b))):
        assert f.rank == 1
        assert abs(f.t11[0, 0]) == pytest.approx(np.linalg.norm(a) * np.linalg.norm(b), rel=1e-12)


@pytest.mark.parametrize("variant", ["ulv", "urv"])
def test_utv_rank_two_structure(variant, rs, each_backend):
    x = np.outer(rs.normal(size=5), rs.normal(size=4)) + np.outer(rs.normal(size=5), rs.normal(size=4))
    f = getattr(decomp, variant)(x)
    assert f.rank == 2 == rref_rank(x)
    assert fro(x - f.reconstruct()) <= 1e-9 * fro(x)
    assert orth_err(f.u) <= 1e-10 and orth_err(f.v) <= 1e-10
    outside = f.t.copy()
    outside[:2, :2] = 0.0
    assert np.all(np.abs(outside) <= 1e-10 * fro(x))
    tri = np.triu(f.t11, 1) if variant == "ulv" else np.tril(f.t11, -1)
    assert np.all(np.abs(tri) <= 1e-12 * fro(x))


def test_utv_zero_matrix():
    f = decomp.ulv(np.zeros((3, 2)))
    assert f.rank == 0
    np.testing.assert_array_equal(f.reconstruct(), 0.0)


def test_cr_examples(rs):
    x = rs.normal(size=(5, 3))
    f = decomp.cr(x)
    np.testing.assert_array_equal(f.c, x)
    np.testing.assert_allclose(f.r_factor, np.eye(3), atol=1e-12)
    g = decomp.cr([[1.0, 2.0], [2.0, 4.0]])
    np.testing.assert_array_equal(g.c, [[1.0], [2.0]])
    np.testing.assert_allclose(g.r_factor, [[1.0, 2.0]], atol=1e-15)


def test_cr_rank_of_idempotent_is_trace(rs):
    for p in range(1, 6):
        x = rs.normal(size=(8, p))
        h = x @ np.linalg.solve(x.T @ x, x.T)
        assert decomp.cr(h).rank == round(np.trace(h)) == p


@given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 8), st.integers(0, 2**32 - 1))
def test_cr_invariants(n, p, k, seed):
    x = low_rank(np.random.default_rng(seed), n, p, min(k, n, p))
    f = decomp.cr(x)
    assert fro(x - f.reconstruct()) <= 1e-10 * max(fro(x), 1.0)
    assert f.rank == len(f.pivot_cols)
    if f.rank:
        np.testing.assert_allclose(f.r_factor[:, list(f.pivot_cols)], np.eye(f.rank), atol=1e-12)
        assert rref_rank(f.c) == rref_rank(f.r_factor) == f.rank


def test_spectral_examples(each_backend):
    s = decomp.spectral_symmetric(np.diag([1.0, 5.0, 3.0]))
    np.testing.assert_array_equal(s.lam, [5.0, 3.0, 1.0])
    np.testing.assert_array_equal(np.abs(s.q), np.eye(3)[:, [1, 2, 0]])
    t = decomp.spectral_symmetric([[2.0, 1.0], [1.0, 2.0]])
    np.testing.assert_allclose(t.lam, [3.0, 1.0], atol=1e-14)
    r2 = 1 / math.sqrt(2)
    np.testing.assert_allclose(t.q[:, 0], [r2, r2], atol=1e-14)
    np.testing.assert_allclose(np.abs(t.q[:, 1]), [r2, r2], atol=1e-14)
    assert t.q[0, 1] * t.q[1, 1] < 0


def test_spectral_random_and_cubic_oracle(rs, each_backend):
    b = rs.normal(size=(8, 8))
    a = b + b.T
    s = decomp.spectral_symmetric(a)
    assert fro(a @ s.q - s.q * s.lam) <= 1e-9 * fro(a)
    assert orth_err(s.q) <= 1e-10 * math.sqrt(8)
    assert np.all(np.diff(s.lam) <= 0)
    assert s.sweeps <= 50
    for _ in range(20):
        c = rs.normal(size=(3, 3))
        c = c + c.T
        np.testing.assert_allclose(decomp.spectral_symmetric(c).lam, cubic_symmetric_eigs(c), atol=1e-10)
    for _ in range(20):
        a2, b2, c2 = rs.normal(size=3)
        np.testing.assert_allclose(
            decomp.spectral_symmetric([[a2, b2], [b2, c2]]).lam, symmetric_2x2_eigs(a2, b2, c2), atol=1e-13
        )


def test_spectral_sign_convention(rs):
    b = rs.normal(size=(6, 6))
    s = decomp.spectral_symmetric(b @ b.T)
    for j in range(6):
        col = s.q[:, j]
        assert col[np.argmax(np.abs(col))] > 0
    assert np.all(s.lam >= -1e-9 * fro(b @ b.T))


def test_spectral_rejects_asymmetric_and_rectangular():
    with pytest.raises(ValidationError):
        decomp.spectral_symmetric([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(ShapeError):
        decomp.spectral_symmetric(np.ones((2, 3)))


def test_svd_examples(rs):
    q0, _ = np.linalg.qr(rs.normal(size=(5, 5)))
    np.testing.assert_allclose(decomp.svd(q0).sigma, 1.0, atol=1e-12)
    u = np.array([2.0, 0.0, 0.0])
    v = np.array([0.0, 3.0, 0.0, 0.0])
    f = decomp.svd(np.outer(u, v))
    assert f.rank == 1
    assert f.sigma[0] == pytest.approx(6.0, rel=1e-14)
    np.testing.assert_array_equal(f.sigma[1:], 0.0)


def test_svd_matches_gram_eigenvalues(rs, each_backend):
    x = rs.normal(size=(6, 4))
    f = decomp.svd(x)
    lam = decomp.spectral_symmetric(x.T @ x).lam
    np.testing.assert_allclose(f.sigma**2, lam, rtol=1e-8)
    for i in range(f.rank):
        assert np.linalg.norm(x @ f.v[:, i] - f.sigma[i] * f.u[:, i]) <= 1e-9 * f.sigma[0]


@given(st.integers(1, 9), st.integers(1, 9), st.integers(0, 9), st.integers(0, 2**32 - 1))
def test_svd_invariants_and_four_subspaces(n, p, k, seed):
    x = low_rank(np.random.default_rng(seed), n, p, min(k, n, p))
    nf = fro(x)
    f = decomp.svd(x, "full")
    assert fro(x - f.reconstruct()) <= 1e-9 * max(nf, 1e-300)
    assert orth_err(f.u) <= 1e-10 and orth_err(f.v) <= 1e-10
    assert np.all(np.diff(f.sigma) <= 0) and np.all(f.sigma >= 0)
    assert f.rank == rref_rank(x) == decomp.ulv(x).rank == decomp.urv(x).rank
    if f.rank:
        assert np.all(f.sigma[f.rank:] <= 1e-8 * f.sigma[0])
    null_v, null_u = f.v[:, f.rank:], f.u[:, f.rank:]
    assert fro(x @ null_v) <= 1e-8 * max(nf, 1e-300) * math.sqrt(max(1, null_v.shape[1]))
    assert fro(x.T @ null_u) <= 1e-8 * max(nf, 1e-300) * math.sqrt(max(1, null_u.shape[1]))


def test_svd_reduced_shapes(rs):
    f = decomp.svd(rs.normal(size=(7, 3)))
    assert f.u.shape == (7, 3) and f.v.shape == (3, 3) and f.sigma.shape == (3,)
    g = decomp.svd(rs.normal(size=(3, 7)), "full")
    assert g.u.shape == (3, 3) and g.v.shape == (7, 7)
