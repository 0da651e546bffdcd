"""Command-line interface.

Subcommands:

* ``run``   execute an experiment config and write CSVs, a manifest and
            an SVG plot into the output directory
* ``plot``  re-render the SVG from an existing summary.csv
* ``bench`` compare the compiled and fallback kernel backends

Exit codes: 0 success, 2 configuration or schema violations (the message
names the offending field), 3 dataset I/O failures.  Outputs contain no
timestamps; re-running the same config over the same data writes
byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__, backend
from .config import describe_source, load_experiment
from .errors import ConfigError, ParseError
from .harness import ExperimentResult, run_experiment
from .svgplot import Series, render_chart

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3

TRIALS_HEADER = ("config_id", "trial", "seed", "checkpoint", "error", "status")
SUMMARY_HEADER = ("config_id", "checkpoint", "mean", "stderr", "count")
BEST_HEADER = ("checkpoint", "family", "config_id", "mean", "stderr", "count")
COMPARISONS_HEADER = (
    "checkpoint",
    "family_a",
    "config_a",
    "family_b",
    "config_b",
    "mean_a",
    "mean_b",
    "t_stat",
    "dof",
    "p_value",
    "significant",
)


def _fnum(v: float) -> str:
    return repr(float(v))


def _open_csv(path: Path):
    fh = open(path, "w", encoding="utf-8", newline="")
    return fh, csv.writer(fh, lineterminator="\n")


def write_outputs(result: ExperimentResult, out_dir: Path, make_plot: bool) -> list[str]:
    """Write all artifacts for a finished experiment; returns their names."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    fh, w = _open_csv(out_dir / "trials.csv")
    with fh:
        w.writerow(TRIALS_HEADER)
        for rec in result.records:
            for cp, err in zip(rec.checkpoints, rec.errors):
                w.writerow(
                    (
                        rec.config_id,
                        rec.trial,
                        rec.seed,
                        cp,
                        "" if err is None else _fnum(err),
                        rec.status,
                    )
                )
    written.append("trials.csv")

    fh, w = _open_csv(out_dir / "summary.csv")
    with fh:
        w.writerow(SUMMARY_HEADER)
        for cell in result.summary.cells:
            w.writerow((cell.config_id, cell.checkpoint, _fnum(cell.mean), _fnum(cell.stderr), cell.count))
    written.append("summary.csv")

    fh, w = _open_csv(out_dir / "best.csv")
    with fh:
        w.writerow(BEST_HEADER)
        for b in result.summary.best:
            w.writerow((b.checkpoint, b.family, b.config_id, _fnum(b.mean), _fnum(b.stderr), b.count))
    written.append("best.csv")

    fh, w = _open_csv(out_dir / "comparisons.csv")
    with fh:
        w.writerow(COMPARISONS_HEADER)
        for c in result.summary.comparisons:
            w.writerow(
                (
                    c.checkpoint,
                    c.family_a,
                    c.config_a,
                    c.family_b,
                    c.config_b,
                    _fnum(c.mean_a),
                    _fnum(c.mean_b),
                    _fnum(c.t_stat),
                    _fnum(c.dof),
                    _fnum(c.p_value),
                    "true" if c.significant else "false",
                )
            )
    written.append("comparisons.csv")

    if make_plot:
        svg = render_summary_svg(result)
        (out_dir / "summary.svg").write_text(svg, encoding="utf-8")
        written.append("summary.svg")

    manifest = build_manifest(result, written)
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    written.append("manifest.json")
    return written


def render_summary_svg(result: ExperimentResult) -> str:
    series = []
    order = [cid for cid, _ in result.config.grid]
    for cid in order:
        cells = [c for c in result.summary.cells if c.config_id == cid]
        if not cells:
            continue
        cells.sort(key=lambda c: c.checkpoint)
        series.append(
            Series(
                label=cid,
                xs=tuple(float(c.checkpoint) for c in cells),
                ys=tuple(c.mean for c in cells),
                errs=tuple(c.stderr for c in cells),
            )
        )
    return render_chart(
        series,
        title=result.config.name,
        xlabel="points seen",
        ylabel="spectral error",
    )


def build_manifest(result: ExperimentResult, artifacts: list[str]) -> dict:
    cfg = result.config
    algorithms = []
    for cid, est in cfg.grid:
        entry = {"id": cid, "algorithm": est.algorithm.value, "k": est.k}
        for name in ("c", "n0", "rate", "gamma_sq", "initial_block", "block"):
            v = getattr(est, name)
            if v is not None:
                entry[name] = v
        if est.schedule is not None:
            entry["schedule"] = asdict(est.schedule)
        algorithms.append(entry)
    return {
        "tool": {"name": "streampca", "version": __version__},
        "backend": backend.backend_name(),
        "rng": "splitmix64 counters; box-muller normals; fisher-yates orders",
        "experiment": {
            "name": cfg.name,
            "k": cfg.k,
            "total_points": cfg.total_points,
            "checkpoints": list(cfg.checkpoints),
            "table_checkpoints": list(cfg.table_checkpoints),
            "trials": cfg.trials,
            "base_seed": cfg.base_seed,
            "confidence": cfg.confidence,
            "chunk_size": cfg.chunk_size,
            "source": describe_source(cfg.source),
            "algorithms": algorithms,
        },
        "reference": {
            "provenance": result.reference.provenance,
            "eigenvalues": [float(v) for v in result.reference.eigenvalues],
            "oracle_passes": cfg.oracle_passes,
            "oracle_seed": cfg.oracle_seed,
        },
        "seed_derivation": "trial seed = chain(base_seed, config_id, trial); "
        "substreams 'init' and 'order' derive from it",
        "artifacts": artifacts,
    }


def cmd_run(args: argparse.Namespace) -> int:
    try:
        config = load_experiment(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ParseError as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return EXIT_DATA

    result = run_experiment(config, threads=args.threads)
    written = write_outputs(result, Path(args.out), make_plot=not args.no_plots)
    failures = sum(result.summary.failures.values())
    print(f"wrote {', '.join(written)} to {args.out}")
    if failures:
        detail = ", ".join(f"{cid}: {n}" for cid, n in result.summary.failures.items() if n)
        print(f"failed trials: {failures} ({detail})")
    return EXIT_OK


def read_summary_csv(path: Path) -> list[Series]:
    """Load summary.csv rows back into plot series (config order = first appearance)."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            rows = list(reader)
    except OSError as exc:
        raise ConfigError("", f"cannot read {path}: {exc}") from exc
    if not rows or tuple(rows[0]) != SUMMARY_HEADER:
        raise ConfigError("", f"{path}: expected header {','.join(SUMMARY_HEADER)}")
    if len(rows) == 1:
        raise ConfigError("", f"{path}: no data rows to plot")
    order: list[str] = []
    data: dict[str, list[tuple[float, float, float]]] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(SUMMARY_HEADER):
            raise ConfigError("", f"{path}: line {lineno}: expected {len(SUMMARY_HEADER)} columns")
        cid = row[0]
        try:
            cp, mean, stderr = float(row[1]), float(row[2]), float(row[3])
        except ValueError:
            raise ConfigError("", f"{path}: line {lineno}: non-numeric value") from None
        if cid not in data:
            data[cid] = []
            order.append(cid)
        data[cid].append((cp, mean, stderr))
    series = []
    for cid in order:
        pts = sorted(data[cid])
        series.append(
            Series(
                label=cid,
                xs=tuple(p[0] for p in pts),
                ys=tuple(p[1] for p in pts),
                errs=tuple(p[2] for p in pts),
            )
        )
    return series


def cmd_plot(args: argparse.Namespace) -> int:
    try:
        series = read_summary_csv(Path(args.summary))
    except ConfigError as exc:
        print(f"plot error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    svg = render_chart(series, title=args.title, xlabel="points seen", ylabel="spectral error")
    Path(args.out).write_text(svg, encoding="utf-8")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    from .bench import format_rows, run_bench

    rows = run_bench(d=args.d, k=args.k, steps=args.steps, repeat=args.repeat)
    print(f"backends available: {', '.join(backend.available_backends())}")
    print(format_rows(rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="streampca",
        description="Benchmark memory-restricted streaming PCA estimators.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment configuration")
    p_run.add_argument("--config", required=True, help="path to the JSON experiment config")
    p_run.add_argument("--out", required=True, help="output directory for artifacts")
    p_run.add_argument(
        "--threads",
        type=int,
        default=int(os.environ.get("STREAMPCA_THREADS", "1")),
        help="worker threads for trials (default: STREAMPCA_THREADS or 1)",
    )
    p_run.add_argument("--no-plots", action="store_true", help="skip SVG rendering")
    p_run.set_defaults(func=cmd_run)

    p_plot = sub.add_parser("plot", help="render an SVG from a summary.csv")
    p_plot.add_argument("--summary", required=True, help="path to summary.csv")
    p_plot.add_argument("--out", required=True, help="output SVG path")
    p_plot.add_argument("--title", default="spectral error", help="chart title")
    p_plot.set_defaults(func=cmd_plot)

    p_bench = sub.add_parser("bench", help="compare kernel backends")
    p_bench.add_argument("--d", type=int, default=200, help="ambient dimension")
    p_bench.add_argument("--k", type=int, default=8, help="subspace dimension")
    p_bench.add_argument("--steps", type=int, default=5000, help="streamed points per kernel case")
    p_bench.add_argument("--repeat", type=int, default=3, help="timing repetitions (best-of)")
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
