"""Dense real matrix primitives.

Matrices are plain 2-D ``float64`` numpy arrays and vectors are 1-D arrays.
Every public function validates its inputs (finite entries, conformable
shapes) and never mutates them.
"""
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import ShapeError, SingularMatrixError, ValidationError

# zero test for rank decisions: RANK_RTOL * max(1, ||X||_inf)
RANK_RTOL = 1e-10


def as_matrix(x, name="x") -> np.ndarray:
    a = np.array(x, dtype=np.float64)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} contains NaN or Inf")
    return a


def as_vector(y, name="y") -> np.ndarray:
    v = np.array(y, dtype=np.float64)
    if v.ndim == 2 and 1 in v.shape:
        v = v.ravel()
    if v.ndim != 1:
        raise ShapeError(f"{name} must be a vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValidationError(f"{name} contains NaN or Inf")
    return v


def inf_norm(x) -> float:
    x = np.asarray(x)
    return float(np.max(np.sum(np.abs(x), axis=1))) if x.size else 0.0


def rank_tolerance(x) -> float:
    return RANK_RTOL * max(1.0, inf_norm(x))


def matmul(a, b) -> np.ndarray:
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return kernels.matmul(a, b)


def transpose(x) -> np.ndarray:
    return as_matrix(x).T.copy()


def trace(x) -> float:
    x = as_matrix(x)
    if x.shape[0] != x.shape[1]:
        raise ShapeError(f"trace needs a square matrix, got {x.shape}")
    return float(np.sum(np.diag(x)))


def frobenius_norm(x) -> float:
    x = as_matrix(x)
    return float(np.sqrt(np.sum(x * x)))


def _check_side(side):
    if side not in ("rows", "cols"):
        raise ValidationError(f"side must be 'rows' or 'cols', got {side!r}")


def validate_permutation(order: Sequence[int]) -> np.ndarray:
    idx = np.asarray(order)
    if idx.ndim != 1 or (idx.size and not np.issubdtype(idx.dtype, np.integer)):
        raise ValidationError("permutation must be a 1-D sequence of integers")
    idx = idx.astype(np.int64)
    if sorted(idx.tolist()) != list(range(idx.size)):
        raise ValidationError(f"{list(order)} is not a permutation of 0..{idx.size - 1}")
    return idx


def permutation_matrix(order: Sequence[int]) -> np.ndarray:
    """Dense P with row ``i`` equal to ``e_{order[i]}``, so ``P @ X`` reorders rows."""
    idx = validate_permutation(order)
    p = np.zeros((idx.size, idx.size))
    p[np.arange(idx.size), idx] = 1.0
    return p


def permute(x, order: Sequence[int], side="rows") -> np.ndarray:
    """Reorder rows (``P @ X``) or columns (``X @ P.T``) so entry ``i`` comes from ``order[i]``."""
    x = as_matrix(x)
    _check_side(side)
    idx = validate_permutation(order)
    axis_len = x.shape[0] if side == "rows" else x.shape[1]
    if idx.size != axis_len:
        raise ShapeError(f"permutation of length {idx.size} does not match {side} ({axis_len})")
    return x[idx, :].copy() if side == "rows" else x[:, idx].copy()


def inverse_permutation(order: Sequence[int]) -> np.ndarray:
    idx = validate_permutation(order)
    inv = np.empty_like(idx)
    inv[idx] = np.arange(idx.size)
    return inv


def selection_matrix(mask: Sequence[bool]) -> np.ndarray:
    return np.diag(np.asarray(mask, dtype=bool).astype(np.float64))


def select(x, mask: Sequence[bool], side="rows") -> np.ndarray:
    """Zero out the rows (``S @ X``) or columns (``X @ S``) whose mask entry is false."""
    x = as_matrix(x)
    _check_side(side)
    m = np.asarray(mask).astype(bool)
    axis_len = x.shape[0] if side == "rows" else x.shape[1]
    if m.ndim != 1 or m.size != axis_len:
        raise ShapeError(f"mask of length {m.size} does not match {side} ({axis_len})")
    out = x.copy()
    if side == "rows":
        out[~m, :] = 0.0
    else:
        out[:, ~m] = 0.0
    return out


def solve_triangular(t, b, shape="upper", tol=None) -> np.ndarray:
    """Solve ``T x = b`` by back (``upper``) or forward (``lower``) substitution.

    ``b`` may be a vector or a matrix of right-hand sides. Raises
    :class:`SingularMatrixError` with the offending index when a diagonal
    entry is at or below ``tol`` (default: the scale-relative rank tolerance).
    """
    t = as_matrix(t, "t")
    if shape not in ("upper", "lower"):
        raise ValidationError(f"shape must be 'upper' or 'lower', got {shape!r}")
    if t.shape[0] != t.shape[1]:
        raise ShapeError(f"triangular system needs a square matrix, got {t.shape}")
    b_arr = np.asarray(b, dtype=np.float64)
    vec = b_arr.ndim == 1
    b2 = b_arr.reshape(-1, 1) if vec else b_arr
    if b2.shape[0] != t.shape[0]:
        raise ShapeError(f"rhs has {b2.shape[0]} rows, system has {t.shape[0]}")
    if tol is None:
        tol = rank_tolerance(t) * 1e-2
    x, bad = kernels.solve_triangular(t, b2, shape == "upper", tol)
    if bad >= 0:
        raise SingularMatrixError(f"pivot {bad} of the {shape}-triangular system is ~0", index=bad)
    return x[:, 0] if vec else x


@dataclass(frozen=True)
class RrefResult:
    rref: np.ndarray
    pivot_cols: tuple
    rank: int


def rref(x, tol=None) -> RrefResult:
    """Reduced row echelon form by Gauss-Jordan elimination with partial pivoting."""
    x = as_matrix(x)
    if tol is None:
        tol = rank_tolerance(x)
    r, piv = kernels.rref(x, tol)
    pivots = tuple(int(c) for c in piv)
    return RrefResult(rref=r, pivot_cols=pivots, rank=len(pivots))


def rank(x, tol=None) -> int:
    return rref(x, tol).rank


def format_matrix(x) -> str:
    """Text form: ``"rows cols"`` header, then one space-separated row per line."""
    x = as_matrix(x)
    lines = [f"{x.shape[0]} {x.shape[1]}"]
    lines += [" ".join(f"{v:.17g}" for v in row) for row in x]
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise ValidationError("empty matrix text")
    try:
        rows, cols = (int(t) for t in lines[0].split())
    except ValueError as exc:
        raise ValidationError(f"bad matrix header {lines[0]!r}") from exc
    body = lines[1:]
    if len(body) != rows:
        raise ShapeError(f"header says {rows} rows, found {len(body)}")
    data = np.array([[float(t) for t in ln.split()] for ln in body]).reshape(rows, cols) if rows else np.zeros((0, cols))
    return as_matrix(data)
