"""Independent reference implementations used only by the tests.

Everything here is deliberately naive: explicit loops, brute force, or
textbook formulas evaluated in exact or extended arithmetic.
"""
from fractions import Fraction
import math

import numpy as np


def matmul_loops(a, b):
    n, k = len(a), len(a[0])
    m = len(b[0])
    out = [[0.0] * m for _ in range(n)]
    for i in range(n):
        for j in range(m):
            out[i][j] = math.fsum(a[i][t] * b[t][j] for t in range(k))
    return np.array(out)


def rref_exact(x):
    """RREF over the rationals. Returns (rows as Fractions, pivot columns)."""
    m = [[Fraction(v).limit_denominator(10**9) for v in row] for row in np.asarray(x).tolist()]
    rows, cols = len(m), len(m[0])
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        lead = m[r][c]
        m[r] = [v / lead for v in m[r]]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m, tuple(pivots)


def solve_gauss_exact(a, b):
    """Dense solve by Gauss-Jordan over the rationals."""
    aug = np.hstack([np.asarray(a, float), np.asarray(b, float).reshape(-1, 1)])
    m, piv = rref_exact(aug)
    return np.array([float(row[-1]) for row in m[: len(piv)]])


def symmetric_2x2_eigs(a, b, c):
    """Eigenvalues of [[a, b], [b, c]], descending."""
    mid = 0.5 * (a + c)
    rad = math.hypot(0.5 * (a - c), b)
    return mid + rad, mid - rad


def cubic_symmetric_eigs(a):
    """Eigenvalues of a symmetric 3x3 by the trigonometric cubic formula, descending."""
    a = np.asarray(a, float)
    p1 = a[0, 1] ** 2 + a[0, 2] ** 2 + a[1, 2] ** 2
    q = np.trace(a) / 3
    p2 = (a[0, 0] - q) ** 2 + (a[1, 1] - q) ** 2 + (a[2, 2] - q) ** 2 + 2 * p1
    p = math.sqrt(p2 / 6)
    b = (a - q * np.eye(3)) / p
    r = np.linalg.det(b) / 2
    phi = math.acos(min(1.0, max(-1.0, r))) / 3
    e1 = q + 2 * p * math.cos(phi)
    e3 = q + 2 * p * math.cos(phi + 2 * math.pi / 3)
    return sorted([e1, 3 * q - e1 - e3, e3], reverse=True)


def simpson(f, a, b, tol=1e-12, depth=60):
    """Adaptive Simpson quadrature."""

    def rec(a, b, fa, fm, fb, whole, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6 * (fa + 4 * flm + fm)
        right = (b - m) / 6 * (fm + 4 * frm + fb)
        if depth <= 0 or abs(left + right - whole) <= 15 * tol:
            return left + right + (left + right - whole) / 15
        return rec(a, m, fa, flm, fm, left, depth - 1) + rec(m, b, fm, frm, fb, right, depth - 1)

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return rec(a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), depth)


def ls_coordinate_descent(x, y, sweeps=20000, tol=1e-15):
    """Least squares by cyclic exact coordinate minimisation, started from zero.

    From a zero start the iterates stay in the row space of X, so on a
    rank-deficient X this converges to the minimum-norm minimiser.
    """
    x = np.asarray(x, float)
    beta = np.zeros(x.shape[1])
    r = np.asarray(y, float).copy()
    col2 = np.sum(x * x, axis=0)
    for _ in range(sweeps):
        biggest = 0.0
        for j in range(x.shape[1]):
            if col2[j] == 0:
                continue
            step = x[:, j] @ r / col2[j]
            beta[j] += step
            r -= step * x[:, j]
            biggest = max(biggest, abs(step))
        if biggest < tol:
            break
    return beta


def ls_landweber_min_norm(x, y, iters=200000):
    """Gradient descent on ||y - X b||^2 from zero; converges to the minimum-norm solution."""
    x = np.asarray(x, float)
    step = 1.0 / np.sum(x * x)
    b = np.zeros(x.shape[1])
    for _ in range(iters):
        g = x.T @ (y - x @ b)
        b_new = b + step * g
        if np.max(np.abs(b_new - b)) < 1e-16:
            break
        b = b_new
    return b


def betainc_series(a, b, x, terms=4000):
    """Regularised incomplete beta by its power series in x (valid for x < 1)."""
    s = 0.0
    t = 1.0
    for k in range(terms):
        if k > 0:
            t *= (k - b) / k * x
        s += t / (a + k)
    log_front = a * math.log(x) - (math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))
    return math.exp(log_front) * s
