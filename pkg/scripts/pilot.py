"""Pre-build pilot for the desk-scale convergence benchmark.

Runs the full hyperparameter grids on the d=100, k=4 synthetic spec and
prints per-config statistics (mean, median, failures) at the first and
last checkpoints, the per-family best configurations, and the Welch
comparisons.  Used to confirm the spectrum and grids before freezing
them into the acceptance suite.
"""

from __future__ import annotations

import argparse
import statistics
import sys
import time

sys.path.insert(0, "src")

from streampca.estimators import EstimatorConfig
from streampca.harness import ExperimentConfig, run_experiment
from streampca.streams import SyntheticSpec

HEAD = (0.12, 0.10, 0.08, 0.06, 0.03)
TAIL = 0.006
DIM = 100
K = 4
TOTAL = 200_000
CHECKPOINTS = (1_000, 10_000, 100_000, 200_000)
DBPCA_INITIAL = 200


def build_config(trials: int, base_seed: int) -> ExperimentConfig:
    eigenvalues = HEAD + (TAIL,) * (DIM - len(HEAD))
    spec = SyntheticSpec(dim=DIM, eigenvalues=eigenvalues, rotation_seed=2024)
    grid = []
    for c in (1.0, 10.0, 100.0):
        grid.append((f"spca-c{c:g}", EstimatorConfig(algorithm="spca", k=K, c=c)))
    for rate in (0.001, 0.01, 0.1):
        grid.append((f"alecton-r{rate:g}", EstimatorConfig(algorithm="alecton", k=K, rate=rate)))
    for gsq in (0.6, 0.7, 0.8, 0.9):
        grid.append(
            (
                f"dbpca-g{gsq:g}",
                EstimatorConfig(algorithm="dbpca", k=K, gamma_sq=gsq, initial_block=DBPCA_INITIAL),
            )
        )
    from streampca.estimators import bpca_block_from_corpus

    for L in (1.0, 5.0, 25.0, 125.0):
        blk = bpca_block_from_corpus(TOTAL, DIM, L)
        grid.append((f"bpca-L{L:g}", EstimatorConfig(algorithm="bpca", k=K, block=blk)))
    return ExperimentConfig(
        name="pilot",
        source=spec,
        k=K,
        total_points=TOTAL,
        checkpoints=CHECKPOINTS,
        trials=trials,
        base_seed=base_seed,
        grid=tuple(grid),
        table_checkpoints=(TOTAL,),
    )


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--base-seed", type=int, default=20240901)
    ap.add_argument("--threads", type=int, default=8)
    args = ap.parse_args()

    cfg = build_config(args.trials, args.base_seed)
    t0 = time.time()
    result = run_experiment(cfg, threads=args.threads)
    elapsed = time.time() - t0
    print(f"ran {len(result.records)} trials in {elapsed:.1f}s\n")

    print(
        f"{'config':<16} {'fail':>4} {'med@1e3':>11} {'med@1e4':>11} {'med@1e5':>11} "
        f"{'med@2e5':>11} {'mean@2e5':>11} {'max@2e5':>11}"
    )
    for cid, _ in cfg.grid:
        recs = [r for r in result.records if r.config_id == cid]
        fails = sum(1 for r in recs if r.status != "ok")
        ok = [r for r in recs if r.status == "ok"]
        meds = []
        for j in range(len(CHECKPOINTS)):
            vals = [r.errors[j] for r in ok if r.errors[j] is not None]
            meds.append(statistics.median(vals) if vals else float("nan"))
        e3 = [r.errors[3] for r in ok if r.errors[3] is not None]
        mean3 = statistics.fmean(e3) if e3 else float("nan")
        mx3 = max(e3) if e3 else float("nan")
        print(
            f"{cid:<16} {fails:>4} {meds[0]:11.3e} {meds[1]:11.3e} {meds[2]:11.3e} "
            f"{meds[3]:11.3e} {mean3:11.3e} {mx3:11.3e}"
        )

    print("\nbest per family @2e5:")
    for b in result.summary.best:
        print(f"  {b.family:<8} {b.config_id:<16} mean={b.mean:.3e} stderr={b.stderr:.3e} n={b.count}")

    print("\ncomparisons @2e5:")
    for c in result.summary.comparisons:
        print(
            f"  {c.config_a} vs {c.config_b}: mean {c.mean_a:.3e} vs {c.mean_b:.3e} "
            f"t={c.t_stat:+.2f} dof={c.dof:.1f} p={c.p_value:.2e} sig={c.significant}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
