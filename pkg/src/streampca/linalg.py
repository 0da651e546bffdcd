"""Dense linear algebra for tall-skinny and small square matrices.

QR uses Householder reflections with a fixed sign convention (diagonal
of R nonnegative) so factorizations are unique and reproducible.
Singular values of small matrices come from one-sided Jacobi sweeps,
which keep full relative accuracy on the smallest singular value; that
value feeds the subspace error metric, where bits matter.
"""

from __future__ import annotations

import numpy as np

from .backend import kernels
from .errors import InvalidArgumentError, RankDeficiencyError
from .rng import RngState

RANK_TOL = 1e-12
SMALL_LIMIT = 64


def _as_matrix(m: np.ndarray, who: str) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise InvalidArgumentError(f"{who}: expected a 2-d matrix with positive shape, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidArgumentError(f"{who}: matrix entries must be finite")
    return m


def gaussian_matrix(rows: int, cols: int, rng: RngState) -> np.ndarray:
    """A (rows, cols) matrix of i.i.d. standard normals, rows >= cols.

    Entries are filled in column-major order: entry m of the draw stream
    lands at (m mod rows, m div rows).  The same (seed, counter) state
    always yields the same matrix.
    """
    if rows < 1 or cols < 1:
        raise InvalidArgumentError("gaussian_matrix: rows and cols must be positive")
    if rows < cols:
        raise InvalidArgumentError(f"gaussian_matrix: rows ({rows}) must be >= cols ({cols})")
    draws = rng.normals(rows * cols)
    return np.ascontiguousarray(draws.reshape((rows, cols), order="F"))


def qr_decompose(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Thin QR of a (d, k) matrix with d >= k: returns (Q, R), diag(R) >= 0.

    Raises RankDeficiencyError naming the first numerically dependent
    column when the reduced column norm drops below RANK_TOL times the
    original column norm.
    """
    m = _as_matrix(m, "qr_decompose")
    d, k = m.shape
    if d < k:
        raise InvalidArgumentError(f"qr_decompose: need rows >= cols, got {m.shape}")
    work = np.array(m, dtype=np.float64, order="C", copy=True)
    q = np.empty((d, k), dtype=np.float64)
    r = np.empty((k, k), dtype=np.float64)
    code = kernels().qr_factor(work, q, r, RANK_TOL)
    if code != 0:
        raise RankDeficiencyError(code - 1)
    return q, r


def singular_values_small(m: np.ndarray) -> np.ndarray:
    """All singular values of ``m``, descending; min(shape) must be <= 64."""
    m = _as_matrix(m, "singular_values_small")
    if min(m.shape) > SMALL_LIMIT:
        raise InvalidArgumentError(
            f"singular_values_small: min(shape) must be <= {SMALL_LIMIT}, got {m.shape}"
        )
    if m.shape[0] < m.shape[1]:
        m = m.T
    work = np.array(m, dtype=np.float64, order="C", copy=True)
    sv = np.empty(work.shape[1], dtype=np.float64)
    kernels().jacobi_sv(work, sv)
    return np.sort(sv)[::-1]


def smallest_singular_value(m: np.ndarray) -> float:
    """The smallest singular value of ``m`` (same limits as singular_values_small)."""
    return float(singular_values_small(m)[-1])
