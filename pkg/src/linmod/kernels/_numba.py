"""Loop-form kernels compiled with numba.

Every function here has a vectorized twin in ``_numpy.py`` with the same
signature and the same output up to rounding.
"""
import math

import numpy as np
from numba import njit


@njit(cache=True)
def matmul(a, b):
    n, k = a.shape
    m = b.shape[1]
    out = np.zeros((n, m))
    for i in range(n):
        for t in range(k):
            ait = a[i, t]
            if ait == 0.0:
                continue
            for j in range(m):
                out[i, j] += ait * b[t, j]
    return out


@njit(cache=True)
def solve_triangular(t, b, upper, tol):
    # b is 2-D (n, m); returns (x, bad_index) with bad_index = -1 on success
    n = t.shape[0]
    m = b.shape[1]
    x = np.zeros((n, m))
    if upper:
        for ii in range(n):
            i = n - 1 - ii
            d = t[i, i]
            if abs(d) <= tol:
                return x, i
            for j in range(m):
                s = b[i, j]
                for k in range(i + 1, n):
                    s -= t[i, k] * x[k, j]
                x[i, j] = s / d
    else:
        for i in range(n):
            d = t[i, i]
            if abs(d) <= tol:
                return x, i
            for j in range(m):
                s = b[i, j]
                for k in range(i):
                    s -= t[i, k] * x[k, j]
                x[i, j] = s / d
    return x, -1


@njit(cache=True)
def rref(a, tol):
    r = a.copy()
    n, p = r.shape
    pivots = np.empty(min(n, p), dtype=np.int64)
    npiv = 0
    row = 0
    for col in range(p):
        if row >= n:
            break
        best = row
        bestval = abs(r[row, col])
        for i in range(row + 1, n):
            v = abs(r[i, col])
            if v > bestval:
                best = i
                bestval = v
        if bestval <= tol:
            for i in range(row, n):
                r[i, col] = 0.0
            continue
        if best != row:
            for j in range(p):
                tmp = r[row, j]
                r[row, j] = r[best, j]
                r[best, j] = tmp
        piv = r[row, col]
        for j in range(col, p):
            r[row, j] /= piv
        r[row, col] = 1.0
        for i in range(n):
            if i == row:
                continue
            f = r[i, col]
            if f != 0.0:
                for j in range(col, p):
                    r[i, j] -= f * r[row, j]
                r[i, col] = 0.0
        pivots[npiv] = col
        npiv += 1
        row += 1
    for i in range(n):
        for j in range(p):
            if abs(r[i, j]) <= tol:
                r[i, j] = 0.0
    return r, pivots[:npiv].copy()


@njit(cache=True)
def householder_qr(a, steps):
    r = a.copy()
    n, p = r.shape
    q = np.eye(n)
    v = np.empty(n)
    for k in range(min(steps, n - 1, p)):
        norm = 0.0
        for i in range(k, n):
            norm += r[i, k] * r[i, k]
        norm = math.sqrt(norm)
        if norm == 0.0:
            continue
        alpha = -norm if r[k, k] >= 0.0 else norm
        vnorm2 = 0.0
        for i in range(k, n):
            v[i] = r[i, k]
        v[k] -= alpha
        for i in range(k, n):
            vnorm2 += v[i] * v[i]
        if vnorm2 == 0.0:
            continue
        for j in range(k, p):
            s = 0.0
            for i in range(k, n):
                s += v[i] * r[i, j]
            s *= 2.0 / vnorm2
            for i in range(k, n):
                r[i, j] -= s * v[i]
        # Q <- Q H accumulates Q = H_1 H_2 ... H_k
        for i in range(n):
            s = 0.0
            for t in range(k, n):
                s += q[i, t] * v[t]
            s *= 2.0 / vnorm2
            for t in range(k, n):
                q[i, t] -= s * v[t]
        r[k, k] = alpha
        for i in range(k + 1, n):
            r[i, k] = 0.0
    return q, r


@njit(cache=True)
def givens_qr(a):
    r = a.copy()
    n, p = r.shape
    q = np.eye(n)
    for k in range(min(n - 1, p)):
        for i in range(k + 1, n):
            b = r[i, k]
            if b == 0.0:
                continue
            f = r[k, k]
            h = math.hypot(f, b)
            c = f / h
            s = b / h
            for j in range(k, p):
                rk = r[k, j]
                ri = r[i, j]
                r[k, j] = c * rk + s * ri
                r[i, j] = -s * rk + c * ri
            r[i, k] = 0.0
            for t in range(n):
                qk = q[t, k]
                qi = q[t, i]
                q[t, k] = c * qk + s * qi
                q[t, i] = -s * qk + c * qi
    return q, r


@njit(cache=True)
def _complete_column(q, k):
    # unit vector orthogonal to q[:, :k], taken from the standard basis
    n = q.shape[0]
    best = np.zeros(n)
    bestnorm = -1.0
    w = np.empty(n)
    for e in range(n):
        for i in range(n):
            w[i] = 0.0
        w[e] = 1.0
        for _ in range(2):
            for j in range(k):
                s = 0.0
                for i in range(n):
                    s += q[i, j] * w[i]
                for i in range(n):
                    w[i] -= s * q[i, j]
        nrm = 0.0
        for i in range(n):
            nrm += w[i] * w[i]
        nrm = math.sqrt(nrm)
        if nrm > bestnorm and nrm > 1e-8:
            bestnorm = nrm
            for i in range(n):
                best[i] = w[i] / nrm
        if bestnorm > 0.7:
            break
    return best


@njit(cache=True)
def gram_schmidt(a, tol):
    n, p = a.shape
    k_out = min(n, p)
    q = np.zeros((n, k_out))
    r = np.zeros((k_out, p))
    dependent = np.zeros(p, dtype=np.bool_)
    w = np.empty(n)
    s = np.empty(k_out)
    for k in range(p):
        for i in range(n):
            w[i] = a[i, k]
        m = min(k, k_out)
        # classical projection, repeated once to restore orthogonality
        for _ in range(2):
            for j in range(m):
                acc = 0.0
                for i in range(n):
                    acc += q[i, j] * w[i]
                s[j] = acc
            for j in range(m):
                r[j, k] += s[j]
                for i in range(n):
                    w[i] -= s[j] * q[i, j]
        if k >= k_out:
            dependent[k] = True
            continue
        nrm = 0.0
        for i in range(n):
            nrm += w[i] * w[i]
        nrm = math.sqrt(nrm)
        if nrm <= tol:
            dependent[k] = True
            col = _complete_column(q, k)
            for i in range(n):
                q[i, k] = col[i]
        else:
            r[k, k] = nrm
            for i in range(n):
                q[i, k] = w[i] / nrm
    return q, r, dependent


@njit(cache=True)
def jacobi_eigh(a, rel_tol, max_sweeps):
    d = a.copy()
    n = d.shape[0]
    v = np.eye(n)
    fro = 0.0
    for i in range(n):
        for j in range(n):
            fro += d[i, j] * d[i, j]
    fro = math.sqrt(fro)
    sweeps = 0
    while sweeps < max_sweeps:
        off = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off += d[i, j] * d[i, j]
        if math.sqrt(off) <= rel_tol * fro:
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
                for k in range(n):
                    dkp = d[k, p]
                    dkq = d[k, q]
                    d[k, p] = c * dkp - s * dkq
                    d[k, q] = s * dkp + c * dkq
                for k in range(n):
                    dpk = d[p, k]
                    dqk = d[q, k]
                    d[p, k] = c * dpk - s * dqk
                    d[q, k] = s * dpk + c * dqk
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
    w = np.empty(n)
    for i in range(n):
        w[i] = d[i, i]
    return w, v, sweeps


@njit(cache=True)
def _betacf(a, b, x, tol, max_iter):
    # modified Lentz evaluation of the incomplete-beta continued fraction
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) <= tol:
            return h, m
    return h, max_iter + 1


@njit(cache=True)
def betainc(a, b, xs, tol, max_iter):
    out = np.empty(xs.shape[0])
    worst = 0
    lbeta = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    for i in range(xs.shape[0]):
        x = xs[i]
        if x <= 0.0:
            out[i] = 0.0
            continue
        if x >= 1.0:
            out[i] = 1.0
            continue
        front = math.exp(a * math.log(x) + b * math.log1p(-x) - lbeta)
        if x < (a + 1.0) / (a + b + 2.0):
            h, it = _betacf(a, b, x, tol, max_iter)
            out[i] = front * h / a
        else:
            h, it = _betacf(b, a, 1.0 - x, tol, max_iter)
            out[i] = 1.0 - front * h / b
        if it > worst:
            worst = it
    return out, worst
