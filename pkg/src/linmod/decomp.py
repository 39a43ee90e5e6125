"""Matrix factorizations built from elementary orthogonal transforms.

QR comes in three flavours (Gram-Schmidt, Householder, Givens); LQ, ULV,
URV and CR are assembled from QR and row reduction; the symmetric
eigendecomposition uses cyclic Jacobi sweeps and the SVD is derived from
the eigendecomposition of ``X^T X``.
"""
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import kernels
from .errors import ShapeError, ValidationError
from .matrix import as_matrix, frobenius_norm, rank_tolerance, rref, solve_triangular

JACOBI_RTOL = 1e-12
JACOBI_MAX_SWEEPS = 50
SVD_RTOL = 1e-8
SYMMETRY_RTOL = 1e-10


@dataclass(frozen=True)
class QrFactors:
    q: np.ndarray
    r: np.ndarray
    mode: str
    algorithm: str
    dependent: Optional[np.ndarray] = None

    def reconstruct(self):
        return self.q @ self.r


@dataclass(frozen=True)
class LqFactors:
    l: np.ndarray  # noqa: E741
    q: np.ndarray
    mode: str

    def reconstruct(self):
        return self.l @ self.q


@dataclass(frozen=True)
class UtvFactors:
    u: np.ndarray
    t: np.ndarray
    v: np.ndarray
    rank: int
    variant: str

    @property
    def t11(self):
        return self.t[: self.rank, : self.rank]

    def reconstruct(self):
        return self.u @ self.t @ self.v


@dataclass(frozen=True)
class CrFactors:
    c: np.ndarray
    r_factor: np.ndarray
    rank: int
    pivot_cols: tuple

    def reconstruct(self):
        return self.c @ self.r_factor


@dataclass(frozen=True)
class SpectralFactors:
    q: np.ndarray
    lam: np.ndarray
    sweeps: int = 0

    def reconstruct(self):
        return (self.q * self.lam) @ self.q.T


@dataclass(frozen=True)
class SvdFactors:
    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray
    rank: int
    mode: str

    def sigma_matrix(self):
        s = np.zeros((self.u.shape[1], self.v.shape[1]))
        k = self.sigma.size
        s[:k, :k] = np.diag(self.sigma)
        return s

    def reconstruct(self):
        return self.u @ self.sigma_matrix() @ self.v.T


def _check_mode(mode):
    if mode not in ("reduced", "full"):
        raise ValidationError(f"mode must be 'reduced' or 'full', got {mode!r}")


def _orthonormal_completion(q):
    """Extend the orthonormal columns of ``q`` (n x k) to an n x n orthogonal matrix."""
    n, k = q.shape
    if k == n:
        return q.copy()
    h, _ = kernels.householder_qr(q, k)
    return np.hstack([q, h[:, k:]])


def _reduce(q, r, mode):
    if mode == "full":
        return q, r
    k = min(r.shape)
    return q[:, :k].copy(), r[:k, :].copy()


def qr_gram_schmidt(x, mode="reduced") -> QrFactors:
    """Classical Gram-Schmidt (with one reorthogonalization pass).

    A column whose residual after projection falls below the rank tolerance
    gets ``r_kk = 0`` and is replaced in ``Q`` by a unit vector orthogonal to
    the previous ones, drawn from the standard basis. Those columns are
    flagged in ``dependent``.
    """
    x = as_matrix(x)
    _check_mode(mode)
    n, p = x.shape
    if mode == "reduced" and n < p:
        raise ShapeError(f"reduced Gram-Schmidt QR needs rows >= cols, got {x.shape}")
    q, r, dep = kernels.gram_schmidt(x, rank_tolerance(x))
    if mode == "full":
        q = _orthonormal_completion(q)
        r = np.vstack([r, np.zeros((n - r.shape[0], p))])
    return QrFactors(q=q, r=r, mode=mode, algorithm="gram_schmidt", dependent=dep)


def qr_householder(x, mode="full", steps=None) -> QrFactors:
    """Householder triangularization with ``r_kk = -sign(x_kk) * ||x_k||``.

    ``steps`` stops after that many reflections, exposing the intermediate
    matrices of the elimination.
    """
    x = as_matrix(x)
    _check_mode(mode)
    q, r = kernels.householder_qr(x, min(x.shape) if steps is None else steps)
    q, r = _reduce(q, r, mode)
    return QrFactors(q=q, r=r, mode=mode, algorithm="householder")


def qr_givens(x, mode="full") -> QrFactors:
    """Givens triangularization: column by column, rotate rows (k, i) for i = k+1..n-1."""
    x = as_matrix(x)
    _check_mode(mode)
    q, r = kernels.givens_qr(x)
    q, r = _reduce(q, r, mode)
    return QrFactors(q=q, r=r, mode=mode, algorithm="givens")


_QR = {"gram_schmidt": qr_gram_schmidt, "householder": qr_householder, "givens": qr_givens}


def qr(x, mode="full", algorithm="householder") -> QrFactors:
    try:
        fn = _QR[algorithm]
    except KeyError:
        raise ValidationError(f"unknown QR algorithm {algorithm!r}") from None
    return fn(x, mode=mode)


def positive_diagonal(f: QrFactors) -> QrFactors:
    """Flip signs so the diagonal of R is nonnegative (the unique reduced QR for full rank)."""
    k = min(f.r.shape)
    signs = np.ones(f.q.shape[1])
    d = np.diag(f.r)[:k]
    signs[:k] = np.where(d < 0, -1.0, 1.0)
    return replace(f, q=f.q * signs, r=signs[: f.r.shape[0], None] * f.r)


def householder_reflector(x):
    """The reflector H with ``H x = -sign(x_1) ||x|| e_1``."""
    x = np.asarray(x, dtype=np.float64)
    nrm = float(np.linalg.norm(x))
    v = x.copy()
    v[0] -= -nrm if x[0] >= 0 else nrm
    vv = v @ v
    if vv == 0.0:
        return np.eye(x.size)
    return np.eye(x.size) - (2.0 / vv) * np.outer(v, v)


def givens_rotation(a, b):
    """``(c, s)`` such that ``[[c, s], [-s, c]] @ [a, b] = [hypot(a, b), 0]``."""
    if b == 0.0:
        return 1.0, 0.0
    h = math.hypot(a, b)
    return a / h, b / h


def lq(x, mode="full", algorithm="householder") -> LqFactors:
    """LQ from the QR of ``X^T``: ``L = R^T`` and ``Q_lq = Q^T``."""
    x = as_matrix(x)
    f = qr(x.T, mode=mode, algorithm=algorithm)
    return LqFactors(l=f.r.T.copy(), q=f.q.T.copy(), mode=mode)


def ulv(x, tol=None) -> UtvFactors:
    """Full ULV following the constructive existence argument.

    Independent columns (rref pivots) are moved to the front, the
    independent block ``Z`` gets a full QR, the remaining columns are written
    as ``Z E``, and the fat block ``[R, R E]`` gets a full LQ.
    """
    x = as_matrix(x)
    n, p = x.shape
    piv = list(rref(x, tol).pivot_cols)
    r = len(piv)
    if r == 0:
        return UtvFactors(u=np.eye(n), t=np.zeros((n, p)), v=np.eye(p), rank=0, variant="ulv")
    order = piv + [j for j in range(p) if j not in piv]
    perm = np.eye(p)[:, order]
    xp = x[:, order]
    z, rest = xp[:, :r], xp[:, r:]
    fz = qr_householder(z, mode="full")
    u = fz.q
    r1 = fz.r[:r, :r]
    e = solve_triangular(r1, u[:, :r].T @ rest, "upper", tol=0.0)
    w = np.hstack([r1, r1 @ e])
    fw = lq(w, mode="full")
    t = np.zeros((n, p))
    t[:r, :r] = fw.l[:, :r]
    v = fw.q @ perm.T
    return UtvFactors(u=u, t=t, v=v, rank=r, variant="ulv")


def urv(x, tol=None) -> UtvFactors:
    """Full URV: the row-space mirror of :func:`ulv` (independent rows first, LQ then QR)."""
    x = as_matrix(x)
    n, p = x.shape
    piv = list(rref(x.T, tol).pivot_cols)
    r = len(piv)
    if r == 0:
        return UtvFactors(u=np.eye(n), t=np.zeros((n, p)), v=np.eye(p), rank=0, variant="urv")
    order = piv + [i for i in range(n) if i not in piv]
    perm = np.eye(n)[order, :]
    px = x[order, :]
    z, rest = px[:r, :], px[r:, :]
    fz = qr_householder(z.T, mode="full")
    l1 = fz.r[:r, :r].T
    v = fz.q.T
    e_t = solve_triangular(l1.T, fz.q[:, :r].T @ rest.T, "upper", tol=0.0)
    m = np.vstack([l1, e_t.T @ l1])
    fm = qr_householder(m, mode="full")
    t = np.zeros((n, p))
    t[:r, :r] = fm.r[:r, :r]
    u = perm.T @ fm.q
    return UtvFactors(u=u, t=t, v=v, rank=r, variant="urv")


def cr(x, tol=None) -> CrFactors:
    """X = C R with C the pivot columns of X and R the nonzero rows of rref(X)."""
    x = as_matrix(x)
    res = rref(x, tol)
    piv = list(res.pivot_cols)
    return CrFactors(
        c=x[:, piv].copy(), r_factor=res.rref[: res.rank].copy(), rank=res.rank, pivot_cols=res.pivot_cols
    )


def _sign_normalize(vecs):
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def spectral_symmetric(a) -> SpectralFactors:
    """Eigendecomposition ``A = Q diag(lam) Q^T`` of a symmetric matrix by cyclic Jacobi.

    Eigenvalues are sorted descending; each eigenvector has its
    largest-magnitude entry positive.
    """
    a = as_matrix(a, "a")
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"spectral decomposition needs a square matrix, got {a.shape}")
    fro = frobenius_norm(a)
    if frobenius_norm(a - a.T) > SYMMETRY_RTOL * max(fro, 1e-300):
        raise ValidationError("matrix is not symmetric")
    w, v, sweeps = kernels.jacobi_eigh(0.5 * (a + a.T), JACOBI_RTOL, JACOBI_MAX_SWEEPS)
    order = np.argsort(-w, kind="stable")
    return SpectralFactors(q=_sign_normalize(v[:, order]), lam=w[order], sweeps=sweeps)


def spectral_function(a, fn):
    """``Q diag(fn(lam)) Q^T`` for symmetric ``a``, e.g. square roots and inverses."""
    s = spectral_symmetric(a)
    return (s.q * fn(s.lam)) @ s.q.T


def svd(x, mode="reduced") -> SvdFactors:
    """SVD built from the eigendecomposition of the Gram matrix.

    ``V`` holds the eigenvectors of ``X^T X``, ``sigma_i = ||X v_i||`` and
    ``u_i = X v_i / sigma_i`` for the ``rank`` values above ``1e-8 sigma_1``;
    the rest of ``sigma`` is set to zero and ``U`` is completed with an
    orthonormal basis of the left null space. The reduced mode keeps
    ``min(n, p)`` columns of each factor.
    """
    x = as_matrix(x)
    _check_mode(mode)
    n, p = x.shape
    k = min(n, p)
    eig = spectral_symmetric(x.T @ x)
    v = eig.q
    s_all = np.sqrt(np.sum((x @ v) ** 2, axis=0))
    order = np.argsort(-s_all, kind="stable")
    v, s_all = v[:, order], s_all[order]
    smax = s_all[0] if s_all.size else 0.0
    rank = int(np.sum(s_all > SVD_RTOL * smax)) if smax > 0 else 0
    ur = (x @ v[:, :rank]) / s_all[:rank]
    if rank:
        # one Gram-Schmidt pass cleans the O(eps * cond^2) loss of orthogonality
        ur, _, _ = kernels.gram_schmidt(ur, 0.0)
    u = _orthonormal_completion(ur)
    sigma = np.zeros(k)
    sigma[:rank] = s_all[:rank]
    if mode == "reduced":
        u, v = u[:, :k].copy(), v[:, :k].copy()
    return SvdFactors(u=u, sigma=sigma, v=v, rank=rank, mode=mode)
