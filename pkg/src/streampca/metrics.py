"""Subspace quality metrics and reference subspaces.

The headline metric is the squared sine of the largest principal angle
between the reference basis U and an estimate Q,

    spectral_error(U, Q) = 1 - sigma_min(U^T Q)**2,

which is 0 when the spans coincide and 1 when some reference direction
is orthogonal to the estimate.  ``residual_error`` computes the same
quantity through the energy outside the reference span,
lambda_max(Q^T Q - (U^T Q)^T (U^T Q)); the two routes agree to rounding
and cross-check each other.  ``tan_error`` maps the sine form to the
tangent scale.

References come either from the closed-form synthetic model or from
``reference_oracle``, an orthogonal-iteration solver that touches data
only through streaming passes (it never forms the d x d covariance).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .backend import kernels
from .errors import InfiniteAngleError, InvalidArgumentError, RankDeficiencyError
from .linalg import RANK_TOL, gaussian_matrix, qr_decompose, singular_values_small
from .rng import RngState, derive_seed
from .streams import BagOfWordsDataset, SparseRows, SyntheticSpec, synthetic_basis

CLAMP_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ReferenceSubspace:
    """A (d, k) orthonormal reference basis with eigenvalue estimates.

    ``provenance`` records how the basis was obtained (analytic model or
    oracle settings), and lands in run manifests.
    """

    basis: np.ndarray
    eigenvalues: np.ndarray
    provenance: str

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def k(self) -> int:
        return self.basis.shape[1]


def _clamp_unit(value: float, what: str) -> float:
    if value < 0.0:
        if value < -CLAMP_TOL:
            raise InvalidArgumentError(f"{what} evaluated to {value}, outside [0, 1]")
        return 0.0
    if value > 1.0:
        if value > 1.0 + CLAMP_TOL:
            raise InvalidArgumentError(f"{what} evaluated to {value}, outside [0, 1]")
        return 1.0
    return value


def _check_pair(ref: ReferenceSubspace, q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64)
    if q.ndim != 2 or q.shape != ref.basis.shape:
        raise InvalidArgumentError(
            f"estimate shape {q.shape} does not match reference shape {ref.basis.shape}"
        )
    if not np.all(np.isfinite(q)):
        raise InvalidArgumentError("estimate entries must be finite")
    return q


def spectral_error(ref: ReferenceSubspace, q: np.ndarray) -> float:
    """sin^2 of the largest principal angle between ref and the estimate."""
    q = _check_pair(ref, q)
    b = ref.basis.T @ q
    sv = singular_values_small(b)
    smin = float(sv[-1])
    return _clamp_unit(1.0 - smin * smin, "spectral error")


def residual_error(ref: ReferenceSubspace, q: np.ndarray) -> float:
    """Same angle through the complement: lambda_max(Q^T Q - B^T B), B = U^T Q."""
    q = _check_pair(ref, q)
    b = ref.basis.T @ q
    g = q.T @ q - b.T @ b
    sv = singular_values_small(g)
    return _clamp_unit(float(sv[0]), "residual error")


def tan_error(ref: ReferenceSubspace, q: np.ndarray) -> float:
    """tan^2-free tangent of the largest principal angle, sqrt(phi/(1-phi)).

    Raises InfiniteAngleError when the angle reaches 90 degrees.
    """
    phi = spectral_error(ref, q)
    if phi >= 1.0:
        raise InfiniteAngleError("largest principal angle is 90 degrees; tangent is unbounded")
    return float(np.sqrt(phi / (1.0 - phi)))


def subspace_distance(basis_a: np.ndarray, basis_b: np.ndarray) -> float:
    """sin^2 of the largest principal angle between two orthonormal bases."""
    b = np.asarray(basis_a).T @ np.asarray(basis_b)
    smin = float(singular_values_small(b)[-1])
    return _clamp_unit(1.0 - smin * smin, "subspace distance")


def analytic_reference(spec: SyntheticSpec, k: int) -> ReferenceSubspace:
    """Exact leading-k subspace of a synthetic source.

    Requires a strict eigengap between eigenvalue k and k+1 so the
    subspace is well defined (any k up to d with no trailing tie).
    """
    if not 1 <= k <= spec.dim:
        raise InvalidArgumentError(f"k must be in 1..{spec.dim}, got {k}")
    ev = spec.eigenvalues
    if k < spec.dim and not ev[k - 1] > ev[k]:
        raise InvalidArgumentError(
            f"eigenvalues {k} and {k + 1} are tied ({ev[k - 1]}); the leading-{k} subspace is not unique"
        )
    v = synthetic_basis(spec)
    return ReferenceSubspace(
        basis=np.ascontiguousarray(v[:, :k]),
        eigenvalues=np.array(ev[:k], dtype=np.float64),
        provenance="analytic",
    )


def _data_views(data):
    """Normalize oracle inputs to (dim, n_points, chunk iterator factory)."""
    if isinstance(data, BagOfWordsDataset):
        return data.dim, data.n_points, lambda: data.iter_chunks()
    arr = np.ascontiguousarray(np.asarray(data, dtype=np.float64))
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise InvalidArgumentError("reference_oracle: expected (n, d) data or a dataset")

    def chunks(block: int = 8192):
        for lo in range(0, arr.shape[0], block):
            yield arr[lo : lo + block]

    return arr.shape[1], arr.shape[0], chunks


def _accumulate(s: np.ndarray, q: np.ndarray, chunk, weight: float) -> None:
    k = kernels()
    if isinstance(chunk, SparseRows):
        k.block_accum_csr(s, q, chunk.indptr, chunk.indices, chunk.values, weight)
    else:
        k.block_accum_dense(s, q, chunk, weight)


def reference_oracle(
    data,
    k: int,
    max_passes: int = 300,
    seed: int = 0,
    tol: float = 1e-12,
) -> ReferenceSubspace:
    """Leading-k eigenbasis of the empirical second moment, by streaming.

    Runs orthogonal iteration Q <- orth((1/N) sum_n x_n x_n^T Q), where
    the product is accumulated one chunk at a time, so memory stays
    O(k d).  Stops once successive iterates are within ``tol`` in
    squared-sine distance; failing to converge inside ``max_passes``
    emits a RuntimeWarning and is recorded in the provenance.
    Eigenvalue estimates are Rayleigh quotients of the final basis.
    """
    dim, n_points, chunk_factory = _data_views(data)
    if not 1 <= k <= dim:
        raise InvalidArgumentError(f"reference_oracle: k must be in 1..{dim}, got {k}")
    if n_points < 1:
        raise InvalidArgumentError("reference_oracle: data has no points")
    if max_passes < 1:
        raise InvalidArgumentError("reference_oracle: max_passes must be >= 1")

    q, _ = qr_decompose(gaussian_matrix(dim, k, RngState(derive_seed("oracle-init", seed))))
    weight = 1.0 / n_points
    s = np.empty((dim, k), dtype=np.float64)
    r = np.empty((k, k), dtype=np.float64)
    q_next = np.empty((dim, k), dtype=np.float64)
    converged = False
    passes = 0
    for _ in range(max_passes):
        s[:] = 0.0
        for chunk in chunk_factory():
            _accumulate(s, q, chunk, weight)
        passes += 1
        code = kernels().qr_factor(s, q_next, r, RANK_TOL)
        if code != 0:
            raise RankDeficiencyError(
                code - 1,
                f"reference_oracle: second-moment action is rank-deficient at column {code - 1}; "
                "k may exceed the data rank",
            )
        delta = subspace_distance(q, q_next)
        q, q_next = q_next, q
        if delta < tol:
            converged = True
            break
    if not converged:
        warnings.warn(
            f"reference_oracle did not converge in {max_passes} passes (last delta {delta:.3e})",
            RuntimeWarning,
            stacklevel=2,
        )
    s[:] = 0.0
    for chunk in chunk_factory():
        _accumulate(s, q, chunk, weight)
    eigenvalues = np.einsum("ij,ij->j", q, s)
    return ReferenceSubspace(
        basis=q,
        eigenvalues=eigenvalues,
        provenance=f"oracle(passes={passes}, seed={seed}, converged={converged})",
    )
