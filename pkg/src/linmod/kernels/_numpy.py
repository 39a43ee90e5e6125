"""Pure-numpy kernels, used when numba is disabled or unavailable."""
import math

import numpy as np


def matmul(a, b):
    return a @ b


def solve_triangular(t, b, upper, tol):
    n = t.shape[0]
    x = np.zeros((n, b.shape[1]))
    order = range(n - 1, -1, -1) if upper else range(n)
    for i in order:
        d = t[i, i]
        if abs(d) <= tol:
            return x, i
        if upper:
            x[i] = (b[i] - t[i, i + 1:] @ x[i + 1:]) / d
        else:
            x[i] = (b[i] - t[i, :i] @ x[:i]) / d
    return x, -1


def rref(a, tol):
    r = a.copy()
    n, p = r.shape
    pivots = []
    row = 0
    for col in range(p):
        if row >= n:
            break
        best = row + int(np.argmax(np.abs(r[row:, col])))
        if abs(r[best, col]) <= tol:
            r[row:, col] = 0.0
            continue
        if best != row:
            r[[row, best]] = r[[best, row]]
        r[row, col:] /= r[row, col]
        r[row, col] = 1.0
        f = r[:, col].copy()
        f[row] = 0.0
        r[:, col:] -= np.outer(f, r[row, col:])
        r[:, col] = 0.0
        r[row, col] = 1.0
        pivots.append(col)
        row += 1
    r[np.abs(r) <= tol] = 0.0
    return r, np.array(pivots, dtype=np.int64)


def householder_qr(a, steps):
    r = a.copy()
    n, p = r.shape
    q = np.eye(n)
    for k in range(min(steps, n - 1, p)):
        x = r[k:, k]
        norm = math.sqrt(x @ x)
        if norm == 0.0:
            continue
        alpha = -norm if x[0] >= 0.0 else norm
        v = x.copy()
        v[0] -= alpha
        vnorm2 = v @ v
        if vnorm2 == 0.0:
            continue
        r[k:, k:] -= np.outer(v, (2.0 / vnorm2) * (v @ r[k:, k:]))
        q[:, k:] -= np.outer((2.0 / vnorm2) * (q[:, k:] @ v), v)
        r[k, k] = alpha
        r[k + 1:, k] = 0.0
    return q, r


def givens_qr(a):
    r = a.copy()
    n, p = r.shape
    q = np.eye(n)
    for k in range(min(n - 1, p)):
        for i in range(k + 1, n):
            b = r[i, k]
            if b == 0.0:
                continue
            h = math.hypot(r[k, k], b)
            c, s = r[k, k] / h, b / h
            rk, ri = r[k, k:].copy(), r[i, k:].copy()
            r[k, k:] = c * rk + s * ri
            r[i, k:] = -s * rk + c * ri
            r[i, k] = 0.0
            qk, qi = q[:, k].copy(), q[:, i].copy()
            q[:, k] = c * qk + s * qi
            q[:, i] = -s * qk + c * qi
    return q, r


def _complete_column(q, k):
    n = q.shape[0]
    basis = np.eye(n)
    qk = q[:, :k]
    for _ in range(2):
        basis -= qk @ (qk.T @ basis)
    norms = np.sqrt(np.sum(basis * basis, axis=0))
    e = int(np.argmax(norms > 0.7)) if np.any(norms > 0.7) else int(np.argmax(norms))
    return basis[:, e] / norms[e]


def gram_schmidt(a, tol):
    n, p = a.shape
    k_out = min(n, p)
    q = np.zeros((n, k_out))
    r = np.zeros((k_out, p))
    dependent = np.zeros(p, dtype=np.bool_)
    for k in range(p):
        w = a[:, k].copy()
        m = min(k, k_out)
        qm = q[:, :m]
        for _ in range(2):
            s = qm.T @ w
            r[:m, k] += s
            w -= qm @ s
        if k >= k_out:
            dependent[k] = True
            continue
        nrm = math.sqrt(w @ w)
        if nrm <= tol:
            dependent[k] = True
            q[:, k] = _complete_column(q, k)
        else:
            r[k, k] = nrm
            q[:, k] = w / nrm
    return q, r, dependent


def jacobi_eigh(a, rel_tol, max_sweeps):
    d = a.copy()
    n = d.shape[0]
    v = np.eye(n)
    fro = math.sqrt(np.sum(d * d))
    offdiag = ~np.eye(n, dtype=bool)
    sweeps = 0
    while sweeps < max_sweeps:
        off = math.sqrt(np.sum(d[offdiag] ** 2))
        if off <= rel_tol * fro:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = d[p, q]
                if apq == 0.0:
                    continue
                theta = (d[q, q] - d[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                dp, dq = d[:, p].copy(), d[:, q].copy()
                d[:, p] = c * dp - s * dq
                d[:, q] = s * dp + c * dq
                dp, dq = d[p, :].copy(), d[q, :].copy()
                d[p, :] = c * dp - s * dq
                d[q, :] = s * dp + c * dq
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return np.diag(d).copy(), v, sweeps


def _betacf(a, b, x, tol, max_iter):
    # all x advance through the Lentz recursion in lockstep; converged lanes freeze
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < tiny, tiny, d)
    d = 1.0 / d
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    iters = 0
    for m in range(1, max_iter + 1):
        if not active.any():
            break
        iters = m
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d_new = 1.0 + aa * d
        d_new = np.where(np.abs(d_new) < tiny, tiny, d_new)
        c_new = 1.0 + aa / c
        c_new = np.where(np.abs(c_new) < tiny, tiny, c_new)
        d_new = 1.0 / d_new
        h_new = h * d_new * c_new
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d_new = 1.0 + aa * d_new
        d_new = np.where(np.abs(d_new) < tiny, tiny, d_new)
        c_new = 1.0 + aa / c_new
        c_new = np.where(np.abs(c_new) < tiny, tiny, c_new)
        d_new = 1.0 / d_new
        delta = d_new * c_new
        h_new = h_new * delta
        h = np.where(active, h_new, h)
        c = np.where(active, c_new, c)
        d = np.where(active, d_new, d)
        active &= ~(np.abs(delta - 1.0) <= tol)
    else:
        iters = max_iter + 1 if active.any() else iters
    return h, iters


def betainc(a, b, xs, tol, max_iter):
    out = np.empty_like(xs)
    lo = xs <= 0.0
    hi = xs >= 1.0
    out[lo] = 0.0
    out[hi] = 1.0
    mid = ~(lo | hi)
    worst = 0
    if mid.any():
        x = xs[mid]
        lbeta = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
        front = np.exp(a * np.log(x) + b * np.log1p(-x) - lbeta)
        direct = x < (a + 1.0) / (a + b + 2.0)
        res = np.empty_like(x)
        if direct.any():
            h, it = _betacf(a, b, x[direct], tol, max_iter)
            res[direct] = front[direct] * h / a
            worst = max(worst, it)
        if (~direct).any():
            h, it = _betacf(b, a, 1.0 - x[~direct], tol, max_iter)
            res[~direct] = 1.0 - front[~direct] * h / b
            worst = max(worst, it)
        out[mid] = res
    return out, worst
