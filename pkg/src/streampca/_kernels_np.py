"""Pure-numpy kernel implementations.

This module is the fallback backend: every function here has a
numba-compiled twin in ``_kernels_nb`` with the same name, signature and
semantics.  Integer outputs (random words, shuffles) are bit-identical
across the two backends; floating-point outputs may differ in the last
few ulps because vectorized reductions round differently than scalar
loops.

Conventions shared by both backends:

* output arrays are preallocated by the caller,
* matrices are C-ordered float64,
* functions return 0 on success and a small positive/encoded integer on
  numerical failure (see each docstring), never raising.
"""

from __future__ import annotations

import numpy as np

_GOLD = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S12 = np.uint64(12)
_S63 = np.uint64(63)
_TWO_NEG52 = 2.0**-52

_MASK64 = (1 << 64) - 1
_GOLD_INT = 0x9E3779B97F4A7C15


def _mix64_arr(x: np.ndarray) -> np.ndarray:
    x = (x ^ (x >> _S30)) * _MIX1
    x = (x ^ (x >> _S27)) * _MIX2
    return x ^ (x >> _S31)


def _mix64_int(x: int) -> int:
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def fill_uint64(seed: np.uint64, start: np.uint64, out: np.ndarray) -> None:
    """Fill ``out`` with stream words at counters start..start+n-1."""
    n = out.size
    ctr = np.arange(1, n + 1, dtype=np.uint64) + start
    out[:] = _mix64_arr(ctr * _GOLD + seed)


def _unit_open(bits: np.ndarray) -> np.ndarray:
    """Map 64-bit words to doubles strictly inside (0, 1).

    52-bit resolution: the endpoints (2**52 - 0.5) * 2**-52 and
    0.5 * 2**-52 are exactly representable, so neither 0.0 nor 1.0 can
    be produced (53 bits would round the top value up to 1.0).
    """
    return ((bits >> _S12).astype(np.float64) + 0.5) * _TWO_NEG52


def fill_normals(seed: np.uint64, start: np.uint64, out: np.ndarray) -> None:
    """Box-Muller normals; draw j consumes counters start+2j, start+2j+1."""
    n = out.size
    bits = np.empty(2 * n, dtype=np.uint64)
    fill_uint64(seed, start, bits)
    u1 = _unit_open(bits[0::2])
    u2 = _unit_open(bits[1::2])
    out[:] = np.sqrt(-2.0 * np.log(u1)) * np.cos((2.0 * np.pi) * u2)


def qr_factor(a: np.ndarray, q: np.ndarray, r: np.ndarray, tol: float) -> int:
    """Householder QR of ``a`` (d, k) into ``q`` (d, k) and ``r`` (k, k).

    ``a`` is destroyed.  The sign convention fixes diag(R) >= 0.  Returns
    0 on success, or j+1 if column j is numerically rank-deficient, i.e.
    the reduced column norm falls below ``tol`` times the original column
    norm (or is exactly zero).
    """
    d, k = a.shape
    colnorm0 = np.sqrt(np.einsum("ij,ij->j", a, a))
    vn2 = np.empty(k)
    rdiag = np.empty(k)
    for j in range(k):
        x = a[j:, j]
        normx = np.sqrt(x @ x)
        if normx == 0.0 or normx < tol * colnorm0[j]:
            return j + 1
        alpha = x[0]
        sgn = 1.0 if alpha >= 0.0 else -1.0
        x[0] = alpha + sgn * normx
        v2 = x @ x
        vn2[j] = v2
        rdiag[j] = -sgn * normx
        if j + 1 < k:
            w = (2.0 / v2) * (x @ a[j:, j + 1 :])
            a[j:, j + 1 :] -= np.outer(x, w)
    r[:] = 0.0
    for j in range(k):
        r[: j, j] = a[: j, j]
        r[j, j] = rdiag[j]
    q[:] = 0.0
    for j in range(k):
        q[j, j] = 1.0
    for j in range(k - 1, -1, -1):
        v = a[j:, j]
        w = (2.0 / vn2[j]) * (v @ q[j:, :])
        q[j:, :] -= np.outer(v, w)
    for j in range(k):
        if rdiag[j] < 0.0:
            q[:, j] = -q[:, j]
            r[j, j:] = -r[j, j:]
    return 0


def sgd_chunk_dense(
    q: np.ndarray,
    xs: np.ndarray,
    gammas: np.ndarray,
    tol: float,
    s: np.ndarray,
    r: np.ndarray,
) -> np.int64:
    """Run stochastic-gradient steps Q <- QR(Q + gamma_t x_t x_t^T Q).

    ``s`` and ``r`` are (d, k) and (k, k) workspaces.  Returns 0, or the
    encoded failure ``(t << 8) | (j + 1)`` for a rank-deficient column j
    at chunk-relative step t.
    """
    m = xs.shape[0]
    for t in range(m):
        x = xs[t]
        w = x @ q
        s[:] = q
        s += gammas[t] * x[:, None] * w[None, :]
        code = qr_factor(s, q, r, tol)
        if code != 0:
            return np.int64((t << 8) | code)
    return np.int64(0)


def sgd_chunk_csr(
    q: np.ndarray,
    indptr: np.ndarray,
    indices: np.ndarray,
    values: np.ndarray,
    gammas: np.ndarray,
    tol: float,
    s: np.ndarray,
    r: np.ndarray,
) -> np.int64:
    """Sparse-row variant of ``sgd_chunk_dense``; indices must be unique per row."""
    m = indptr.size - 1
    for t in range(m):
        lo = indptr[t]
        hi = indptr[t + 1]
        idx = indices[lo:hi]
        val = values[lo:hi]
        w = val @ q[idx, :]
        s[:] = q
        s[idx, :] += gammas[t] * val[:, None] * w[None, :]
        code = qr_factor(s, q, r, tol)
        if code != 0:
            return np.int64((t << 8) | code)
    return np.int64(0)


def block_accum_dense(s: np.ndarray, q: np.ndarray, xs: np.ndarray, weight: float) -> None:
    """Accumulate s += weight * sum_t x_t (x_t^T q) over the chunk rows."""
    w = xs @ q
    s += weight * (xs.T @ w)


def block_accum_csr(
    s: np.ndarray,
    q: np.ndarray,
    indptr: np.ndarray,
    indices: np.ndarray,
    values: np.ndarray,
    weight: float,
) -> None:
    """Sparse-row variant of ``block_accum_dense``."""
    m = indptr.size - 1
    for t in range(m):
        lo = indptr[t]
        hi = indptr[t + 1]
        idx = indices[lo:hi]
        val = values[lo:hi]
        w = val @ q[idx, :]
        s[idx, :] += weight * val[:, None] * w[None, :]


def jacobi_sv(a: np.ndarray, sv: np.ndarray) -> None:
    """One-sided Jacobi singular values of ``a`` (m, n), m >= n.

    ``a`` is destroyed; ``sv`` receives the n unsorted singular values.
    Sweeps rotate column pairs until all are numerically orthogonal.
    """
    n = a.shape[1]
    for _sweep in range(60):
        rotated = 0
        for p in range(n - 1):
            for c in range(p + 1, n):
                ap = a[:, p]
                ac = a[:, c]
                app = ap @ ap
                acc = ac @ ac
                apc = ap @ ac
                if app == 0.0 or acc == 0.0:
                    continue
                if abs(apc) <= 1e-15 * np.sqrt(app * acc):
                    continue
                tau = (acc - app) / (2.0 * apc)
                t = (1.0 if tau >= 0.0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                cth = 1.0 / np.sqrt(1.0 + t * t)
                sth = cth * t
                new_p = cth * ap - sth * ac
                new_c = sth * ap + cth * ac
                a[:, p] = new_p
                a[:, c] = new_c
                rotated += 1
        if rotated == 0:
            break
    for j in range(n):
        sv[j] = np.sqrt(a[:, j] @ a[:, j])


def synthetic_fill(
    seed: np.uint64,
    start: np.uint64,
    cum_p: np.ndarray,
    dirs: np.ndarray,
    out: np.ndarray,
) -> None:
    """Fill ``out`` (m, d) with signed direction draws.

    Point t consumes counters start+2t (component choice against the
    cumulative weights ``cum_p``) and start+2t+1 (sign bit).  Row i of
    ``dirs`` is the pre-scaled direction for component i.
    """
    m = out.shape[0]
    bits = np.empty(2 * m, dtype=np.uint64)
    fill_uint64(seed, start, bits)
    u = _unit_open(bits[0::2])
    comp = np.searchsorted(cum_p, u, side="right")
    sign = np.where((bits[1::2] >> _S63) == 0, 1.0, -1.0)
    out[:] = dirs[comp, :] * sign[:, None]


def shuffle(seed: np.uint64, start: np.uint64, idx: np.ndarray) -> np.int64:
    """Fisher-Yates shuffle of ``idx`` in place; returns words consumed.

    Uses masked rejection so both backends draw identical words.
    """
    n = idx.size
    seed_i = int(seed)
    c = int(start)
    for i in range(n - 1, 0, -1):
        bound = i + 1
        mask = (1 << (bound - 1).bit_length()) - 1
        while True:
            x = _mix64_int(seed_i + (c + 1) * _GOLD_INT) & mask
            c += 1
            if x < bound:
                break
        if x != i:
            tmp = idx[i]
            idx[i] = idx[x]
            idx[x] = tmp
    return np.int64(c - int(start))
