"""Data sources that feed the estimators one pass at a time.

Two backings exist.  A synthetic source draws from a discrete
distribution with a known covariance: component i is picked with
probability proportional to its eigenvalue and the emitted point is
``+/- r * v_i`` with a constant radius ``r = sqrt(sum(eigenvalues))``.
That makes ``E[x x^T]`` exactly ``V diag(eigenvalues) V^T``, so the true
subspace is available in closed form.  A dataset source streams a
bag-of-words corpus in a fresh uniformly random order on every pass.

Every emitted point satisfies ``sqrt(x . x) <= 1`` in float64 exactly:
direction rows and dataset points are rescaled at construction until the
computed norm is within bounds, so no per-sample cost is paid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .backend import kernels
from .errors import InvalidArgumentError, ParseError
from .rng import RngState, derive_seed

SUM_TOL = 1e-12


@dataclass(frozen=True)
class SyntheticSpec:
    """Spiked-covariance source description.

    ``eigenvalues`` lists all ``dim`` covariance eigenvalues, positive,
    nonincreasing, each at most 1, summing to at most 1.  When
    ``rotation_seed`` is None the eigenvectors are the coordinate axes;
    otherwise they form a seeded random rotation.
    """

    dim: int
    eigenvalues: tuple[float, ...]
    rotation_seed: int | None = None

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise InvalidArgumentError("SyntheticSpec: dim must be >= 1")
        ev = tuple(float(v) for v in self.eigenvalues)
        object.__setattr__(self, "eigenvalues", ev)
        if len(ev) != self.dim:
            raise InvalidArgumentError(
                f"SyntheticSpec: expected {self.dim} eigenvalues, got {len(ev)}"
            )
        for i, v in enumerate(ev):
            if not math.isfinite(v) or v <= 0.0 or v > 1.0:
                raise InvalidArgumentError(
                    f"SyntheticSpec: eigenvalue {i} must be in (0, 1], got {v}"
                )
            if i > 0 and v > ev[i - 1]:
                raise InvalidArgumentError("SyntheticSpec: eigenvalues must be nonincreasing")
        if math.fsum(ev) > 1.0 + SUM_TOL:
            raise InvalidArgumentError(
                f"SyntheticSpec: eigenvalues must sum to at most 1, got {math.fsum(ev)}"
            )


@dataclass(frozen=True)
class SparsePoint:
    """One sparse sample: sorted unique feature ids and their values."""

    indices: np.ndarray
    values: np.ndarray
    dim: int


@dataclass(frozen=True)
class SparseRows:
    """A run of sparse rows in CSR layout.

    ``indptr`` may be a window into a larger array, so its first entry
    need not be 0: row t occupies ``indices[indptr[t]:indptr[t+1]]``.
    """

    indptr: np.ndarray
    indices: np.ndarray
    values: np.ndarray
    dim: int

    @property
    def n_rows(self) -> int:
        return self.indptr.size - 1

    def row_slice(self, lo: int, hi: int) -> "SparseRows":
        return SparseRows(self.indptr[lo : hi + 1], self.indices, self.values, self.dim)


def _unit_norm_guard(row: np.ndarray) -> None:
    """Rescale ``row`` in place until sqrt(row . row) <= 1 holds in float64."""
    while True:
        nrm = math.sqrt(float(row @ row))
        if nrm <= 1.0:
            return
        row *= 1.0 / nrm


class _SyntheticModel:
    """Precomputed sampling tables for a SyntheticSpec."""

    def __init__(self, spec: SyntheticSpec):
        lam = np.asarray(spec.eigenvalues, dtype=np.float64)
        total = math.fsum(spec.eigenvalues)
        radius = math.sqrt(total)
        if spec.rotation_seed is None:
            v = np.eye(spec.dim)
        else:
            from .linalg import gaussian_matrix, qr_decompose

            g = gaussian_matrix(
                spec.dim, spec.dim, RngState(derive_seed("synthetic-rotation", spec.rotation_seed))
            )
            v, _ = qr_decompose(g)
        dirs = np.ascontiguousarray(v.T) * radius
        for i in range(spec.dim):
            _unit_norm_guard(dirs[i])
        cum = np.cumsum(lam) / total
        np.minimum(cum, 1.0, out=cum)
        cum[-1] = 1.0
        self.dirs = dirs
        self.cum_p = cum
        self.radius = radius
        self.basis = v


@lru_cache(maxsize=8)
def _model(spec: SyntheticSpec) -> _SyntheticModel:
    return _SyntheticModel(spec)


def synthetic_basis(spec: SyntheticSpec) -> np.ndarray:
    """The exact eigenvector matrix V of the source covariance (d, d)."""
    return _model(spec).basis.copy()


def sample_synthetic(spec: SyntheticSpec, rng: RngState) -> np.ndarray:
    """Draw one point, consuming two counter words from ``rng``."""
    m = _model(spec)
    out = np.empty((1, spec.dim), dtype=np.float64)
    start = rng.take(2)
    kernels().synthetic_fill(np.uint64(rng.seed), np.uint64(start), m.cum_p, m.dirs, out)
    return out[0]


class SyntheticStream:
    """Stream of synthetic draws; ``take`` returns dense (m, d) chunks."""

    def __init__(self, spec: SyntheticSpec, seed: int):
        self.spec = spec
        self.dim = spec.dim
        self.position = 0
        self._model = _model(spec)
        self._rng = RngState(seed)

    def take(self, m: int) -> np.ndarray:
        if m < 1:
            raise InvalidArgumentError("take: m must be >= 1")
        out = np.empty((m, self.dim), dtype=np.float64)
        start = self._rng.take(2 * m)
        kernels().synthetic_fill(
            np.uint64(self._rng.seed), np.uint64(start), self._model.cum_p, self._model.dirs, out
        )
        self.position += m
        return out


@dataclass
class BagOfWordsDataset:
    """A normalized sparse corpus in CSR layout.

    ``values`` hold counts scaled by the per-feature maximum (so each
    feature lies in [0, 1]) and then by ``1 / max(1, norm)`` per point,
    with a float-exact guard, so every row satisfies norm <= 1.
    """

    indptr: np.ndarray
    indices: np.ndarray
    values: np.ndarray
    dim: int
    n_points: int
    path: str = ""
    normalization: str = field(
        default="feature max-scaling to [0,1], then per-point scale 1/max(1, l2-norm)"
    )

    def point(self, i: int) -> SparsePoint:
        if not 0 <= i < self.n_points:
            raise InvalidArgumentError(f"point index {i} out of range 0..{self.n_points - 1}")
        lo, hi = int(self.indptr[i]), int(self.indptr[i + 1])
        return SparsePoint(self.indices[lo:hi], self.values[lo:hi], self.dim)

    def rows(self, lo: int, hi: int) -> SparseRows:
        return SparseRows(self.indptr[lo : hi + 1], self.indices, self.values, self.dim)

    def iter_chunks(self, size: int = 8192):
        """Sequential full pass in CSR chunks (used by reference solvers)."""
        for lo in range(0, self.n_points, size):
            yield self.rows(lo, min(lo + size, self.n_points))


def load_bag_of_words(path: str | Path) -> BagOfWordsDataset:
    """Parse the UCI bag-of-words format and normalize it for streaming.

    The file holds three integer header lines (documents D, vocabulary
    size W, entry count NNZ) followed by NNZ lines of one-based
    ``docID wordID count`` triples.  Malformed content raises ParseError
    with the offending one-based line number.
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().split("\n")

    def parse_int(lineno: int, text: str, what: str) -> int:
        try:
            return int(text.strip())
        except ValueError:
            raise ParseError(lineno, f"expected integer {what}, got {text.strip()!r}") from None

    if len(lines) < 3:
        raise ParseError(len(lines), "missing header: need three integer lines (D, W, NNZ)")
    n_docs = parse_int(1, lines[0], "document count")
    n_words = parse_int(2, lines[1], "vocabulary size")
    nnz = parse_int(3, lines[2], "entry count")
    if n_docs < 0 or n_words < 0 or nnz < 0:
        raise ParseError(1 if n_docs < 0 else (2 if n_words < 0 else 3), "header counts must be nonnegative")

    docs = np.empty(nnz, dtype=np.int64)
    words = np.empty(nnz, dtype=np.int64)
    cnts = np.empty(nnz, dtype=np.float64)
    for e in range(nnz):
        lineno = e + 4
        if lineno - 1 >= len(lines):
            raise ParseError(len(lines) + 1, f"unexpected end of file: expected {nnz} entries")
        parts = lines[lineno - 1].split()
        if len(parts) != 3:
            raise ParseError(lineno, f"expected 'docID wordID count', got {lines[lineno - 1]!r}")
        d_id = parse_int(lineno, parts[0], "docID")
        w_id = parse_int(lineno, parts[1], "wordID")
        count = parse_int(lineno, parts[2], "count")
        if not 1 <= d_id <= n_docs:
            raise ParseError(lineno, f"document id {d_id} out of range 1..{n_docs}")
        if not 1 <= w_id <= n_words:
            raise ParseError(lineno, f"word id {w_id} out of range 1..{n_words}")
        if count < 1:
            raise ParseError(lineno, f"count must be positive, got {count}")
        docs[e] = d_id - 1
        words[e] = w_id - 1
        cnts[e] = float(count)
    for extra in range(nnz + 3, len(lines)):
        if lines[extra].strip():
            raise ParseError(extra + 1, "unexpected content after the declared entries")

    order = np.lexsort((words, docs))
    docs, words, cnts = docs[order], words[order], cnts[order]
    if nnz > 1:
        dup = np.flatnonzero((np.diff(docs) == 0) & (np.diff(words) == 0))
        if dup.size:
            e = int(dup[0])
            src_line = int(max(order[e], order[e + 1])) + 4
            raise ParseError(
                src_line, f"duplicate entry for document {docs[e] + 1}, word {words[e] + 1}"
            )

    counts_per_doc = np.bincount(docs, minlength=n_docs) if nnz else np.zeros(n_docs, dtype=np.int64)
    indptr = np.zeros(n_docs + 1, dtype=np.int64)
    np.cumsum(counts_per_doc, out=indptr[1:])

    values = cnts.copy()
    if nnz:
        feature_max = np.zeros(n_words, dtype=np.float64)
        np.maximum.at(feature_max, words, cnts)
        values /= feature_max[words]
    for i in range(n_docs):
        lo, hi = int(indptr[i]), int(indptr[i + 1])
        if hi > lo:
            _unit_norm_guard(values[lo:hi])

    return BagOfWordsDataset(
        indptr=indptr,
        indices=words,
        values=values,
        dim=n_words,
        n_points=n_docs,
        path=str(path),
    )


class DatasetStream:
    """Stream over a corpus: a fresh uniform permutation every pass."""

    def __init__(self, dataset: BagOfWordsDataset, seed: int):
        if dataset.n_points == 0:
            raise InvalidArgumentError("cannot stream an empty dataset")
        self.dataset = dataset
        self.dim = dataset.dim
        self.position = 0
        self._rng = RngState(seed)
        self._perm = np.arange(dataset.n_points, dtype=np.int64)
        self._offset = 0
        self._reshuffle()

    def _reshuffle(self) -> None:
        draws = kernels().shuffle(
            np.uint64(self._rng.seed), np.uint64(self._rng.counter), self._perm
        )
        self._rng.counter += int(draws)
        self._offset = 0

    def take(self, m: int) -> SparseRows:
        if m < 1:
            raise InvalidArgumentError("take: m must be >= 1")
        n = self.dataset.n_points
        picked = np.empty(m, dtype=np.int64)
        filled = 0
        while filled < m:
            if self._offset == n:
                self._reshuffle()
            grab = min(m - filled, n - self._offset)
            picked[filled : filled + grab] = self._perm[self._offset : self._offset + grab]
            self._offset += grab
            filled += grab
        self.position += m
        return _gather_rows(self.dataset, picked)


def _gather_rows(ds: BagOfWordsDataset, rows: np.ndarray) -> SparseRows:
    counts = ds.indptr[rows + 1] - ds.indptr[rows]
    indptr = np.zeros(rows.size + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    total = int(indptr[-1])
    if total == 0:
        return SparseRows(indptr, np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64), ds.dim)
    src = (
        np.arange(total, dtype=np.int64)
        - np.repeat(indptr[:-1], counts)
        + np.repeat(ds.indptr[rows], counts)
    )
    return SparseRows(indptr, ds.indices[src], ds.values[src], ds.dim)


StreamSource = SyntheticStream | DatasetStream


def make_stream(backing: SyntheticSpec | BagOfWordsDataset, seed: int) -> StreamSource:
    """Open a stream over ``backing`` whose order is fixed by ``seed``."""
    if isinstance(backing, SyntheticSpec):
        return SyntheticStream(backing, seed)
    if isinstance(backing, BagOfWordsDataset):
        return DatasetStream(backing, seed)
    raise InvalidArgumentError(f"cannot stream from {type(backing).__name__}")
