"""Streaming k-dimensional PCA estimators with O(k d) state.

Two families share one interface.  Stochastic gradient methods update

    Q <- orth(Q + gamma_n x_n x_n^T Q)

once per point, with a decaying rate ``gamma_n = c / (n0 + n)`` (spca)
or a fixed rate (alecton).  Block power methods accumulate

    S <- S + (1 / |I_i|) x_n x_n^T Q

over a block I_i and orthonormalize only at block boundaries, with a
fixed block length (bpca) or blocks growing geometrically by ``1 /
gamma_sq`` per block (dbpca).  Growing blocks can also follow the
theoretical schedule computed by ``theoretical_block_size``.

Orthonormalization is QR with a fixed sign convention, so trajectories
are reproducible bit-for-bit on a given backend.  State never holds
more than a few (d, k) buffers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .backend import kernels
from .errors import DegenerateBlockError, InvalidArgumentError, RankDeficiencyError
from .linalg import RANK_TOL, gaussian_matrix, qr_decompose
from .rng import RngState
from .streams import SparsePoint, SparseRows


class Algorithm(str, Enum):
    SPCA = "spca"
    ALECTON = "alecton"
    DBPCA = "dbpca"
    BPCA = "bpca"


SGD_ALGORITHMS = (Algorithm.SPCA, Algorithm.ALECTON)
BLOCK_ALGORITHMS = (Algorithm.DBPCA, Algorithm.BPCA)


@dataclass(frozen=True)
class ScheduleParams:
    """Inputs of the theoretical growing-block schedule.

    ``lam`` and ``lam_bar`` are the k-th and (k+1)-th covariance
    eigenvalues, ``delta0`` the total failure probability budget,
    ``cbar`` the initialization constant and ``chernoff_c`` the
    concentration constant scaling every block.
    """

    lam: float
    lam_bar: float
    d: int
    k: int
    delta0: float
    chernoff_c: float
    cbar: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lam) and self.lam > 0.0):
            raise InvalidArgumentError("ScheduleParams: lam must be positive and finite")
        if not (math.isfinite(self.lam_bar) and self.lam_bar >= 0.0):
            raise InvalidArgumentError("ScheduleParams: lam_bar must be nonnegative and finite")
        if self.lam <= self.lam_bar:
            raise InvalidArgumentError("ScheduleParams: need lam > lam_bar")
        if self.k < 1 or self.d < self.k:
            raise InvalidArgumentError("ScheduleParams: need d >= k >= 1")
        if not 0.0 < self.delta0 < 1.0:
            raise InvalidArgumentError("ScheduleParams: delta0 must be in (0, 1)")
        if self.chernoff_c <= 0.0:
            raise InvalidArgumentError("ScheduleParams: chernoff_c must be positive")
        if self.cbar <= 0.0:
            raise InvalidArgumentError("ScheduleParams: cbar must be positive")

    def derived(self) -> tuple[float, float, float, float]:
        """(lam_tilde, gamma, delta, eps0) implied by the parameters."""
        lam_tilde = max(self.lam_bar, self.lam / 4.0)
        gamma = (lam_tilde / self.lam) ** 0.25
        delta = (self.lam - lam_tilde) / 4.0
        eps0 = math.sqrt(self.cbar / (self.k * self.d))
        return lam_tilde, gamma, delta, eps0


def theoretical_block_size(i: int, params: ScheduleParams) -> int:
    """Length |I_i| of the i-th theoretical block (i is one-based).

    With eps_j = eps0 * gamma**j and beta_i = min(gamma / sqrt(1 +
    eps_{i-1}**2), gamma * eps_{i-1}), the block length is

        ceil( (chernoff_c / (delta * beta_i))**2 * ln(d / delta_i) )

    where delta_i = delta0 / (2 i**2) splits the failure budget.
    """
    if i < 1:
        raise InvalidArgumentError("theoretical_block_size: block index must be >= 1")
    _, gamma, delta, eps0 = params.derived()
    eps_prev = eps0 * gamma ** (i - 1)
    beta = min(gamma / math.sqrt(1.0 + eps_prev * eps_prev), gamma * eps_prev)
    delta_i = params.delta0 / (2.0 * i * i)
    value = (params.chernoff_c / (delta * beta)) ** 2 * math.log(params.d / delta_i)
    return int(math.ceil(value))


def bpca_block_from_corpus(n_points: int, d: int, L: float, log_base: float | None = None) -> int:
    """Fixed block length floor(N / T) with T = floor(L * log(d)) blocks.

    The logarithm is natural unless ``log_base`` overrides it.  Raises
    when the parameters yield no full block.
    """
    if n_points < 1:
        raise InvalidArgumentError("bpca_block_from_corpus: n_points must be >= 1")
    if d < 2:
        raise InvalidArgumentError("bpca_block_from_corpus: d must be >= 2")
    if not (math.isfinite(L) and L > 0.0):
        raise InvalidArgumentError("bpca_block_from_corpus: L must be positive")
    if log_base is None:
        log_d = math.log(d)
    else:
        if not (math.isfinite(log_base) and log_base > 1.0):
            raise InvalidArgumentError("bpca_block_from_corpus: log_base must be > 1")
        log_d = math.log(d) / math.log(log_base)
    n_blocks = int(math.floor(L * log_d))
    if n_blocks < 1:
        raise InvalidArgumentError(
            f"bpca_block_from_corpus: L={L} yields {n_blocks} blocks; need at least 1"
        )
    block = n_points // n_blocks
    if block < 1:
        raise InvalidArgumentError(
            f"bpca_block_from_corpus: {n_blocks} blocks exceed {n_points} points"
        )
    return block


@dataclass(frozen=True)
class EstimatorConfig:
    """Algorithm selection plus exactly its own hyperparameters.

    Fields not used by ``algorithm`` must stay None; this catches grid
    configuration mistakes early.  ``n0`` defaults to 0 for spca.
    """

    algorithm: Algorithm
    k: int
    c: float | None = None
    n0: int | None = None
    rate: float | None = None
    gamma_sq: float | None = None
    initial_block: int | None = None
    schedule: ScheduleParams | None = None
    block: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        if self.k < 1:
            raise InvalidArgumentError("EstimatorConfig: k must be >= 1")
        alg = self.algorithm
        allowed = {
            Algorithm.SPCA: ("c", "n0"),
            Algorithm.ALECTON: ("rate",),
            Algorithm.DBPCA: ("gamma_sq", "initial_block", "schedule"),
            Algorithm.BPCA: ("block",),
        }[alg]
        for name in ("c", "n0", "rate", "gamma_sq", "initial_block", "schedule", "block"):
            if name not in allowed and getattr(self, name) is not None:
                raise InvalidArgumentError(
                    f"EstimatorConfig: field {name!r} does not apply to {alg.value}"
                )
        if alg is Algorithm.SPCA:
            if self.c is None or not (math.isfinite(self.c) and self.c > 0.0):
                raise InvalidArgumentError("EstimatorConfig: spca requires c > 0")
            if self.n0 is None:
                object.__setattr__(self, "n0", 0)
            elif self.n0 < 0:
                raise InvalidArgumentError("EstimatorConfig: n0 must be >= 0")
        elif alg is Algorithm.ALECTON:
            if self.rate is None or not (math.isfinite(self.rate) and self.rate > 0.0):
                raise InvalidArgumentError("EstimatorConfig: alecton requires rate > 0")
        elif alg is Algorithm.DBPCA:
            if (self.gamma_sq is None) == (self.schedule is None):
                raise InvalidArgumentError(
                    "EstimatorConfig: dbpca requires exactly one of gamma_sq or schedule"
                )
            if self.gamma_sq is not None and not 0.0 < self.gamma_sq < 1.0:
                raise InvalidArgumentError("EstimatorConfig: gamma_sq must be in (0, 1)")
            if self.initial_block is not None:
                if self.schedule is not None:
                    raise InvalidArgumentError(
                        "EstimatorConfig: initial_block conflicts with a theoretical schedule"
                    )
                if self.initial_block < 1:
                    raise InvalidArgumentError("EstimatorConfig: initial_block must be >= 1")
        elif alg is Algorithm.BPCA:
            if self.block is None or self.block < 1:
                raise InvalidArgumentError("EstimatorConfig: bpca requires block >= 1")


class EstimatorState:
    """Mutable streaming state: the basis plus block bookkeeping.

    Attributes of interest: ``q`` the (d, k) orthonormal estimate, ``n``
    points consumed, ``block_index``/``block_fill``/``block_size`` for
    block methods (one-based index of the block being filled).
    """

    def __init__(self, config: EstimatorConfig, dim: int, q0: np.ndarray):
        self.config = config
        self.dim = dim
        self.k = config.k
        self.q = q0
        self.n = 0
        self.block_index = 1
        self.block_fill = 0
        self._r_work = np.empty((config.k, config.k), dtype=np.float64)
        self._s_work = np.empty((dim, config.k), dtype=np.float64)
        if config.algorithm in BLOCK_ALGORITHMS:
            self.s = np.zeros((dim, config.k), dtype=np.float64)
            self.block_size = _first_block_size(config)
        else:
            self.s = None
            self.block_size = 0


def _first_block_size(config: EstimatorConfig) -> int:
    if config.algorithm is Algorithm.BPCA:
        return int(config.block)  # type: ignore[arg-type]
    if config.schedule is not None:
        return theoretical_block_size(1, config.schedule)
    if config.initial_block is not None:
        return config.initial_block
    return 2 * config.k


def _grow_block_size(size: int, gamma_sq: float) -> int:
    # ceil(size / gamma_sq) in exact integer arithmetic on the float's
    # rational value, so schedules never drift by one step.
    num, den = gamma_sq.as_integer_ratio()
    return -((-size * den) // num)


def _next_block_size(state: EstimatorState) -> int:
    """Block length for ``state.block_index`` (already advanced)."""
    config = state.config
    if config.algorithm is Algorithm.BPCA:
        return state.block_size
    if config.schedule is not None:
        return theoretical_block_size(state.block_index, config.schedule)
    return _grow_block_size(state.block_size, config.gamma_sq)  # type: ignore[arg-type]


def block_sizes(config: EstimatorConfig, count: int) -> list[int]:
    """Planned lengths of the first ``count`` blocks of a block method."""
    if config.algorithm not in BLOCK_ALGORITHMS:
        raise InvalidArgumentError(
            f"block_sizes: {config.algorithm.value} does not use blocks"
        )
    if count < 1:
        raise InvalidArgumentError("block_sizes: count must be >= 1")
    if config.algorithm is Algorithm.BPCA:
        return [int(config.block)] * count  # type: ignore[arg-type]
    if config.schedule is not None:
        return [theoretical_block_size(i, config.schedule) for i in range(1, count + 1)]
    sizes = [_first_block_size(config)]
    for _ in range(count - 1):
        sizes.append(_grow_block_size(sizes[-1], config.gamma_sq))  # type: ignore[arg-type]
    return sizes


def init(config: EstimatorConfig, dim: int, seed: int = 0) -> EstimatorState:
    """Fresh state with Q0 = orth(G) for a seeded (d, k) Gaussian G."""
    if dim < config.k:
        raise InvalidArgumentError(f"init: dim ({dim}) must be >= k ({config.k})")
    g = gaussian_matrix(dim, config.k, RngState(seed))
    q0, _ = qr_decompose(g)
    return EstimatorState(config, dim, q0)


def current_basis(state: EstimatorState) -> np.ndarray:
    """A copy of the current orthonormal (d, k) estimate."""
    return state.q.copy()


def _as_dense_rows(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(1, -1)
    return np.ascontiguousarray(x)


def _sgd_consume(state: EstimatorState, chunk: np.ndarray | SparseRows, gammas: np.ndarray) -> None:
    k = kernels()
    if isinstance(chunk, SparseRows):
        code = k.sgd_chunk_csr(
            state.q,
            chunk.indptr,
            chunk.indices,
            chunk.values,
            gammas,
            RANK_TOL,
            state._s_work,
            state._r_work,
        )
    else:
        code = k.sgd_chunk_dense(state.q, chunk, gammas, RANK_TOL, state._s_work, state._r_work)
    code = int(code)
    if code != 0:
        state.n += code >> 8
        raise RankDeficiencyError((code & 0xFF) - 1)
    state.n += gammas.size


def _sgd_gammas(state: EstimatorState, m: int) -> np.ndarray:
    config = state.config
    if config.algorithm is Algorithm.SPCA:
        steps = np.arange(state.n + 1, state.n + m + 1, dtype=np.float64)
        return config.c / (config.n0 + steps)  # type: ignore[operator]
    return np.full(m, config.rate, dtype=np.float64)


def _require(state: EstimatorState, *algorithms: Algorithm) -> None:
    if state.config.algorithm not in algorithms:
        names = " or ".join(a.value for a in algorithms)
        raise InvalidArgumentError(
            f"update does not match configured algorithm {state.config.algorithm.value} (expected {names})"
        )


def _point_chunk(state: EstimatorState, x: np.ndarray | SparsePoint) -> np.ndarray | SparseRows:
    if isinstance(x, SparsePoint):
        if x.dim != state.dim:
            raise InvalidArgumentError(f"point dimension {x.dim} != estimator dimension {state.dim}")
        indptr = np.array([0, x.indices.size], dtype=np.int64)
        return SparseRows(indptr, np.asarray(x.indices, dtype=np.int64), np.asarray(x.values, dtype=np.float64), x.dim)
    rows = _as_dense_rows(x)
    if rows.shape != (1, state.dim):
        raise InvalidArgumentError(f"expected one point of dimension {state.dim}, got shape {np.asarray(x).shape}")
    return rows


def spca_update(state: EstimatorState, x: np.ndarray | SparsePoint) -> EstimatorState:
    """One decaying-rate step: gamma_n = c / (n0 + n) for the n-th point."""
    _require(state, Algorithm.SPCA)
    _sgd_consume(state, _point_chunk(state, x), _sgd_gammas(state, 1))
    return state


def alecton_update(state: EstimatorState, x: np.ndarray | SparsePoint) -> EstimatorState:
    """One fixed-rate stochastic gradient step."""
    _require(state, Algorithm.ALECTON)
    _sgd_consume(state, _point_chunk(state, x), _sgd_gammas(state, 1))
    return state


def block_update(state: EstimatorState, x: np.ndarray | SparsePoint) -> EstimatorState:
    """Accumulate one point; orthonormalizes when the block completes."""
    _require(state, Algorithm.DBPCA, Algorithm.BPCA)
    _block_consume(state, _point_chunk(state, x))
    return state


def _finalize_block(state: EstimatorState) -> None:
    code = kernels().qr_factor(state.s, state.q, state._r_work, RANK_TOL)
    if code != 0:
        raise DegenerateBlockError(state.block_index, code - 1)
    state.s[:] = 0.0
    state.block_fill = 0
    state.block_index += 1
    state.block_size = _next_block_size(state)


def _block_consume(state: EstimatorState, chunk: np.ndarray | SparseRows) -> None:
    k = kernels()
    sparse = isinstance(chunk, SparseRows)
    m = chunk.n_rows if sparse else chunk.shape[0]
    pos = 0
    while pos < m:
        take = min(state.block_size - state.block_fill, m - pos)
        weight = 1.0 / state.block_size
        if sparse:
            sub = chunk.row_slice(pos, pos + take)
            k.block_accum_csr(state.s, state.q, sub.indptr, sub.indices, sub.values, weight)
        else:
            k.block_accum_dense(state.s, state.q, chunk[pos : pos + take], weight)
        state.block_fill += take
        state.n += take
        pos += take
        if state.block_fill == state.block_size:
            _finalize_block(state)


def consume(state: EstimatorState, chunk: np.ndarray | SparseRows) -> EstimatorState:
    """Feed a chunk of points (dense (m, d) or sparse rows) in order."""
    if isinstance(chunk, SparseRows):
        if chunk.dim != state.dim:
            raise InvalidArgumentError(f"chunk dimension {chunk.dim} != estimator dimension {state.dim}")
        m = chunk.n_rows
    else:
        chunk = _as_dense_rows(chunk)
        if chunk.shape[1] != state.dim:
            raise InvalidArgumentError(f"chunk dimension {chunk.shape[1]} != estimator dimension {state.dim}")
        m = chunk.shape[0]
    if m == 0:
        return state
    if state.config.algorithm in SGD_ALGORITHMS:
        _sgd_consume(state, chunk, _sgd_gammas(state, m))
    else:
        _block_consume(state, chunk)
    return state


def replace_config(config: EstimatorConfig, **changes) -> EstimatorConfig:
    """dataclasses.replace that re-runs validation."""
    return replace(config, **changes)
