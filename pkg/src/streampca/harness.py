"""Experiment harness: repeated trials, aggregation, and family comparisons.

A trial is one (algorithm configuration, seed) pair streamed to the last
checkpoint, with the spectral error recorded at every checkpoint.  Trial
seeds derive from ``(base_seed, config_id, trial_index)`` through a hash
chain, so results for one configuration never change when another is
added to the grid, and runs parallelize over trials without affecting
output.

Aggregation reports mean and standard error per checkpoint over the
trials that completed (failed trials are counted but excluded from the
statistics), picks each algorithm family's best configuration at the
designated checkpoints, and compares the best configurations pairwise
with Welch's t-test at the configured confidence.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import stdtr

from .errors import DegenerateBlockError, InvalidArgumentError, RankDeficiencyError
from .estimators import EstimatorConfig, consume, current_basis, init
from .metrics import ReferenceSubspace, analytic_reference, reference_oracle, spectral_error
from .rng import derive_seed
from .streams import BagOfWordsDataset, SyntheticSpec, make_stream

STATUS_OK = "ok"
STATUS_DEGENERATE = "degenerate-block"
STATUS_RANK_DEFICIENT = "rank-deficient"


@dataclass(frozen=True)
class ExperimentConfig:
    """A full benchmark description.

    ``grid`` maps configuration ids to estimator configurations, in
    presentation order.  ``table_checkpoints`` selects where best
    configurations and family comparisons are reported (defaults to the
    final checkpoint).
    """

    name: str
    source: SyntheticSpec | BagOfWordsDataset
    k: int
    total_points: int
    checkpoints: tuple[int, ...]
    trials: int
    base_seed: int
    grid: tuple[tuple[str, EstimatorConfig], ...]
    table_checkpoints: tuple[int, ...] = ()
    confidence: float = 0.95
    oracle_passes: int = 300
    oracle_seed: int = 0
    chunk_size: int = 4096

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise InvalidArgumentError("ExperimentConfig: trials must be >= 1")
        if not self.checkpoints:
            raise InvalidArgumentError("ExperimentConfig: need at least one checkpoint")
        cps = tuple(int(c) for c in self.checkpoints)
        for a, b in zip(cps, cps[1:]):
            if b <= a:
                raise InvalidArgumentError("ExperimentConfig: checkpoints must be strictly increasing")
        if cps[0] < 0:
            raise InvalidArgumentError("ExperimentConfig: checkpoints must be nonnegative")
        if cps[-1] > self.total_points:
            raise InvalidArgumentError(
                "ExperimentConfig: last checkpoint exceeds total_points"
            )
        object.__setattr__(self, "checkpoints", cps)
        if not self.grid:
            raise InvalidArgumentError("ExperimentConfig: the algorithm grid is empty")
        seen = set()
        for cid, cfg in self.grid:
            if cid in seen:
                raise InvalidArgumentError(f"ExperimentConfig: duplicate config id {cid!r}")
            seen.add(cid)
            if cfg.k != self.k:
                raise InvalidArgumentError(
                    f"ExperimentConfig: config {cid!r} has k={cfg.k}, experiment has k={self.k}"
                )
        table = tuple(int(c) for c in self.table_checkpoints) or (cps[-1],)
        for c in table:
            if c not in cps:
                raise InvalidArgumentError(
                    f"ExperimentConfig: table checkpoint {c} is not a checkpoint"
                )
        object.__setattr__(self, "table_checkpoints", table)
        if not 0.0 < self.confidence < 1.0:
            raise InvalidArgumentError("ExperimentConfig: confidence must be in (0, 1)")


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of one streamed trial.

    ``errors`` aligns with ``checkpoints``; entries after a failure are
    None and ``status`` says why ("ok", "degenerate-block",
    "rank-deficient").
    """

    config_id: str
    trial: int
    seed: int
    checkpoints: tuple[int, ...]
    errors: tuple[float | None, ...]
    status: str


@dataclass(frozen=True)
class SummaryCell:
    config_id: str
    checkpoint: int
    mean: float
    stderr: float
    count: int


@dataclass(frozen=True)
class BestEntry:
    checkpoint: int
    family: str
    config_id: str
    mean: float
    stderr: float
    count: int


@dataclass(frozen=True)
class Comparison:
    """Welch's t-test between two family-best configurations."""

    checkpoint: int
    family_a: str
    config_a: str
    family_b: str
    config_b: str
    mean_a: float
    mean_b: float
    t_stat: float
    dof: float
    p_value: float
    significant: bool


@dataclass
class ExperimentSummary:
    cells: tuple[SummaryCell, ...]
    best: tuple[BestEntry, ...]
    comparisons: tuple[Comparison, ...]
    failures: dict[str, int] = field(default_factory=dict)


def run_trial(
    cfg: EstimatorConfig,
    backing: SyntheticSpec | BagOfWordsDataset,
    ref: ReferenceSubspace,
    checkpoints: tuple[int, ...],
    seed: int,
    *,
    config_id: str = "",
    trial: int = 0,
    chunk_size: int = 4096,
) -> TrialRecord:
    """Stream one trial, recording the spectral error at each checkpoint.

    The trial seed splits into independent substreams for the estimator
    initialization and the stream order.  On a numerical failure the
    remaining checkpoints are left absent and the status records the
    failure kind.
    """
    cps = tuple(int(c) for c in checkpoints)
    for a, b in zip(cps, cps[1:]):
        if b <= a:
            raise InvalidArgumentError("run_trial: checkpoints must be strictly increasing")
    if cps and cps[0] < 0:
        raise InvalidArgumentError("run_trial: checkpoints must be nonnegative")
    if chunk_size < 1:
        raise InvalidArgumentError("run_trial: chunk_size must be >= 1")

    stream = make_stream(backing, derive_seed(seed, "order"))
    state = init(cfg, stream.dim, derive_seed(seed, "init"))
    errors: list[float | None] = []
    status = STATUS_OK
    try:
        for cp in cps:
            while stream.position < cp:
                m = min(chunk_size, cp - stream.position)
                consume(state, stream.take(m))
            errors.append(spectral_error(ref, current_basis(state)))
    except DegenerateBlockError:
        status = STATUS_DEGENERATE
    except RankDeficiencyError:
        status = STATUS_RANK_DEFICIENT
    errors.extend([None] * (len(cps) - len(errors)))
    return TrialRecord(config_id, trial, seed, cps, tuple(errors), status)


def welch_t(a: np.ndarray, b: np.ndarray) -> tuple[float, float, float]:
    """Welch's unequal-variance t-test: returns (t, dof, two-sided p)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na, nb = a.size, b.size
    if na < 2 or nb < 2:
        raise InvalidArgumentError("welch_t: need at least two observations per side")
    ma, mb = a.mean(), b.mean()
    va, vb = a.var(ddof=1), b.var(ddof=1)
    se2 = va / na + vb / nb
    if se2 == 0.0:
        return 0.0, float(na + nb - 2), 1.0
    t = (ma - mb) / math.sqrt(se2)
    dof = se2 * se2 / ((va / na) ** 2 / (na - 1) + (vb / nb) ** 2 / (nb - 1))
    p = 2.0 * float(stdtr(dof, -abs(t)))
    return float(t), float(dof), p


def family_of(cfg: EstimatorConfig) -> str:
    return cfg.algorithm.value


def _ok_errors(records: list[TrialRecord], cp_index: int) -> np.ndarray:
    vals = [r.errors[cp_index] for r in records if r.status == STATUS_OK]
    return np.array([v for v in vals if v is not None], dtype=np.float64)


def aggregate(
    records: list[TrialRecord] | tuple[TrialRecord, ...],
    grid: tuple[tuple[str, EstimatorConfig], ...],
    checkpoints: tuple[int, ...],
    table_checkpoints: tuple[int, ...],
    confidence: float = 0.95,
) -> ExperimentSummary:
    """Summarize trial records into per-checkpoint statistics and comparisons."""
    by_config: dict[str, list[TrialRecord]] = {cid: [] for cid, _ in grid}
    for rec in records:
        if rec.config_id not in by_config:
            raise InvalidArgumentError(f"aggregate: record for unknown config {rec.config_id!r}")
        by_config[rec.config_id].append(rec)

    cells = []
    failures: dict[str, int] = {}
    for cid, _cfg in grid:
        recs = by_config[cid]
        failures[cid] = sum(1 for r in recs if r.status != STATUS_OK)
        for ci, cp in enumerate(checkpoints):
            vals = _ok_errors(recs, ci)
            if vals.size == 0:
                continue
            mean = float(vals.mean())
            stderr = float(vals.std(ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else 0.0
            cells.append(SummaryCell(cid, cp, mean, stderr, int(vals.size)))

    cell_map = {(c.config_id, c.checkpoint): c for c in cells}
    families = {cid: family_of(cfg) for cid, cfg in grid}

    best = []
    for cp in table_checkpoints:
        chosen: dict[str, BestEntry] = {}
        for cid, _cfg in grid:
            cell = cell_map.get((cid, cp))
            if cell is None:
                continue
            fam = families[cid]
            cur = chosen.get(fam)
            if cur is None or cell.mean < cur.mean:
                chosen[fam] = BestEntry(cp, fam, cid, cell.mean, cell.stderr, cell.count)
        best.extend(chosen[f] for f in sorted(chosen))

    alpha = 1.0 - confidence
    comparisons = []
    for cp in table_checkpoints:
        at_cp = [e for e in best if e.checkpoint == cp]
        ci = checkpoints.index(cp)
        for i in range(len(at_cp)):
            for j in range(i + 1, len(at_cp)):
                ea, eb = at_cp[i], at_cp[j]
                va = _ok_errors(by_config[ea.config_id], ci)
                vb = _ok_errors(by_config[eb.config_id], ci)
                if va.size < 2 or vb.size < 2:
                    continue
                t, dof, p = welch_t(va, vb)
                comparisons.append(
                    Comparison(
                        cp, ea.family, ea.config_id, eb.family, eb.config_id,
                        ea.mean, eb.mean, t, dof, p, p < alpha,
                    )
                )

    return ExperimentSummary(
        cells=tuple(cells),
        best=tuple(best),
        comparisons=tuple(comparisons),
        failures=failures,
    )


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    reference: ReferenceSubspace
    records: tuple[TrialRecord, ...]
    summary: ExperimentSummary


def build_reference(config: ExperimentConfig) -> ReferenceSubspace:
    """Analytic subspace for synthetic sources, streaming oracle otherwise."""
    if isinstance(config.source, SyntheticSpec):
        return analytic_reference(config.source, config.k)
    return reference_oracle(
        config.source, config.k, max_passes=config.oracle_passes, seed=config.oracle_seed
    )


def run_experiment(config: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Run the whole grid: trials x configurations, optionally threaded.

    Results are identical for any thread count; kernels release the GIL
    so trials genuinely overlap on the compiled backend.
    """
    if threads < 1:
        raise InvalidArgumentError("run_experiment: threads must be >= 1")
    ref = build_reference(config)

    jobs = []
    for cid, cfg in config.grid:
        for trial in range(config.trials):
            seed = derive_seed(config.base_seed, cid, trial)
            jobs.append((cid, cfg, trial, seed))

    def run_one(job) -> TrialRecord:
        cid, cfg, trial, seed = job
        return run_trial(
            cfg,
            config.source,
            ref,
            config.checkpoints,
            seed,
            config_id=cid,
            trial=trial,
            chunk_size=config.chunk_size,
        )

    if threads == 1:
        records = [run_one(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(run_one, jobs))

    summary = aggregate(
        records, config.grid, config.checkpoints, config.table_checkpoints, config.confidence
    )
    return ExperimentResult(config, ref, tuple(records), summary)
