"""Numba-compiled kernel implementations.

Twin of ``_kernels_np``: same names, signatures and semantics, written
as scalar loops for nopython compilation.  All kernels release the GIL
so trials can run in a thread pool.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

_GOLD = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S12 = np.uint64(12)
_S63 = np.uint64(63)
_U1 = np.uint64(1)
_U0 = np.uint64(0)
_TWO_NEG52 = 2.0**-52
_TWO_PI = 2.0 * np.pi


@njit(cache=True, nogil=True)
def _word(seed, counter):
    x = seed + (counter + _U1) * _GOLD
    x = (x ^ (x >> _S30)) * _MIX1
    x = (x ^ (x >> _S27)) * _MIX2
    return x ^ (x >> _S31)


@njit(cache=True, nogil=True)
def fill_uint64(seed, start, out):
    for i in range(out.size):
        out[i] = _word(seed, start + np.uint64(i))


@njit(cache=True, nogil=True)
def _unit_open(bits):
    return (np.float64(bits >> _S12) + 0.5) * _TWO_NEG52


@njit(cache=True, nogil=True)
def fill_normals(seed, start, out):
    for j in range(out.size):
        b1 = _word(seed, start + np.uint64(2 * j))
        b2 = _word(seed, start + np.uint64(2 * j + 1))
        u1 = _unit_open(b1)
        u2 = _unit_open(b2)
        out[j] = math.sqrt(-2.0 * math.log(u1)) * math.cos(_TWO_PI * u2)


@njit(cache=True, nogil=True)
def qr_factor(a, q, r, tol):
    d = a.shape[0]
    k = a.shape[1]
    colnorm0 = np.empty(k)
    vn2 = np.empty(k)
    rdiag = np.empty(k)
    for j in range(k):
        s = 0.0
        for i in range(d):
            s += a[i, j] * a[i, j]
        colnorm0[j] = math.sqrt(s)
    for j in range(k):
        s = 0.0
        for i in range(j, d):
            s += a[i, j] * a[i, j]
        normx = math.sqrt(s)
        if normx == 0.0 or normx < tol * colnorm0[j]:
            return j + 1
        alpha = a[j, j]
        sgn = 1.0 if alpha >= 0.0 else -1.0
        a[j, j] = alpha + sgn * normx
        v2 = 0.0
        for i in range(j, d):
            v2 += a[i, j] * a[i, j]
        vn2[j] = v2
        rdiag[j] = -sgn * normx
        inv = 2.0 / v2
        for c in range(j + 1, k):
            w = 0.0
            for i in range(j, d):
                w += a[i, j] * a[i, c]
            w *= inv
            for i in range(j, d):
                a[i, c] -= w * a[i, j]
    for j in range(k):
        for i in range(k):
            r[i, j] = 0.0
        for i in range(j):
            r[i, j] = a[i, j]
        r[j, j] = rdiag[j]
    for j in range(k):
        for i in range(d):
            q[i, j] = 0.0
        q[j, j] = 1.0
    for j in range(k - 1, -1, -1):
        inv = 2.0 / vn2[j]
        for c in range(k):
            w = 0.0
            for i in range(j, d):
                w += a[i, j] * q[i, c]
            w *= inv
            for i in range(j, d):
                q[i, c] -= w * a[i, j]
    for j in range(k):
        if rdiag[j] < 0.0:
            for i in range(d):
                q[i, j] = -q[i, j]
            for c in range(j, k):
                r[j, c] = -r[j, c]
    return 0


@njit(cache=True, nogil=True)
def sgd_chunk_dense(q, xs, gammas, tol, s, r):
    m = xs.shape[0]
    d = q.shape[0]
    k = q.shape[1]
    w = np.empty(k)
    for t in range(m):
        for j in range(k):
            acc = 0.0
            for i in range(d):
                acc += xs[t, i] * q[i, j]
            w[j] = acc
        g = gammas[t]
        for i in range(d):
            gx = g * xs[t, i]
            for j in range(k):
                s[i, j] = q[i, j] + gx * w[j]
        code = qr_factor(s, q, r, tol)
        if code != 0:
            return np.int64((t << 8) | code)
    return np.int64(0)


@njit(cache=True, nogil=True)
def sgd_chunk_csr(q, indptr, indices, values, gammas, tol, s, r):
    m = indptr.size - 1
    d = q.shape[0]
    k = q.shape[1]
    w = np.empty(k)
    for t in range(m):
        lo = indptr[t]
        hi = indptr[t + 1]
        for j in range(k):
            acc = 0.0
            for p in range(lo, hi):
                acc += values[p] * q[indices[p], j]
            w[j] = acc
        for i in range(d):
            for j in range(k):
                s[i, j] = q[i, j]
        g = gammas[t]
        for p in range(lo, hi):
            row = indices[p]
            gv = g * values[p]
            for j in range(k):
                s[row, j] += gv * w[j]
        code = qr_factor(s, q, r, tol)
        if code != 0:
            return np.int64((t << 8) | code)
    return np.int64(0)


@njit(cache=True, nogil=True)
def block_accum_dense(s, q, xs, weight):
    m = xs.shape[0]
    d = q.shape[0]
    k = q.shape[1]
    w = np.empty(k)
    for t in range(m):
        for j in range(k):
            acc = 0.0
            for i in range(d):
                acc += xs[t, i] * q[i, j]
            w[j] = acc
        for i in range(d):
            xw = weight * xs[t, i]
            for j in range(k):
                s[i, j] += xw * w[j]


@njit(cache=True, nogil=True)
def block_accum_csr(s, q, indptr, indices, values, weight):
    m = indptr.size - 1
    k = q.shape[1]
    w = np.empty(k)
    for t in range(m):
        lo = indptr[t]
        hi = indptr[t + 1]
        for j in range(k):
            acc = 0.0
            for p in range(lo, hi):
                acc += values[p] * q[indices[p], j]
            w[j] = acc
        for p in range(lo, hi):
            row = indices[p]
            wv = weight * values[p]
            for j in range(k):
                s[row, j] += wv * w[j]


@njit(cache=True, nogil=True)
def jacobi_sv(a, sv):
    m = a.shape[0]
    n = a.shape[1]
    for _sweep in range(60):
        rotated = 0
        for p in range(n - 1):
            for c in range(p + 1, n):
                app = 0.0
                acc = 0.0
                apc = 0.0
                for i in range(m):
                    app += a[i, p] * a[i, p]
                    acc += a[i, c] * a[i, c]
                    apc += a[i, p] * a[i, c]
                if app == 0.0 or acc == 0.0:
                    continue
                if abs(apc) <= 1e-15 * math.sqrt(app * acc):
                    continue
                tau = (acc - app) / (2.0 * apc)
                t = (1.0 if tau >= 0.0 else -1.0) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                cth = 1.0 / math.sqrt(1.0 + t * t)
                sth = cth * t
                for i in range(m):
                    vp = a[i, p]
                    vc = a[i, c]
                    a[i, p] = cth * vp - sth * vc
                    a[i, c] = sth * vp + cth * vc
                rotated += 1
        if rotated == 0:
            break
    for j in range(n):
        s = 0.0
        for i in range(m):
            s += a[i, j] * a[i, j]
        sv[j] = math.sqrt(s)


@njit(cache=True, nogil=True)
def synthetic_fill(seed, start, cum_p, dirs, out):
    m = out.shape[0]
    d = dirs.shape[1]
    for t in range(m):
        b1 = _word(seed, start + np.uint64(2 * t))
        b2 = _word(seed, start + np.uint64(2 * t + 1))
        u = _unit_open(b1)
        lo = 0
        hi = cum_p.size
        while lo < hi:
            mid = (lo + hi) >> 1
            if cum_p[mid] <= u:
                lo = mid + 1
            else:
                hi = mid
        sgn = 1.0 if (b2 >> _S63) == _U0 else -1.0
        for i in range(d):
            out[t, i] = sgn * dirs[lo, i]


@njit(cache=True, nogil=True)
def shuffle(seed, start, idx):
    n = idx.size
    c = start
    for i in range(n - 1, 0, -1):
        bound = np.uint64(i + 1)
        mask = _U1
        while mask < bound:
            mask = mask << _U1
        mask = mask - _U1
        while True:
            x = _word(seed, c) & mask
            c = c + _U1
            if x < bound:
                break
        j = np.int64(x)
        if j != i:
            tmp = idx[i]
            idx[i] = idx[j]
            idx[j] = tmp
    return np.int64(c - start)
