"""JSON experiment configuration: strict parsing with field-path errors.

Unknown keys are rejected everywhere, and every violation raises
ConfigError carrying the dotted path of the offending field (e.g.
``algorithms[2].gamma_sq``) so command-line users see exactly what to
fix.  Parsing resolves derived quantities up front: eigenvalue
shorthands expand to full spectra and corpus-derived block lengths are
fixed numbers by the time an ExperimentConfig exists.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

from .errors import ConfigError, InvalidArgumentError
from .estimators import (
    Algorithm,
    EstimatorConfig,
    ScheduleParams,
    bpca_block_from_corpus,
)
from .harness import ExperimentConfig
from .streams import BagOfWordsDataset, SyntheticSpec, load_bag_of_words


def _require_keys(obj: dict, path: str, required: tuple[str, ...], optional: tuple[str, ...]) -> None:
    for key in obj:
        if key not in required and key not in optional:
            raise ConfigError(_join(path, key), "unknown field")
    for key in required:
        if key not in obj:
            raise ConfigError(_join(path, key), "missing required field")


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def _as_int(obj: Any, path: str, minimum: int | None = None) -> int:
    if isinstance(obj, bool) or not isinstance(obj, int):
        raise ConfigError(path, f"expected an integer, got {obj!r}")
    if minimum is not None and obj < minimum:
        raise ConfigError(path, f"must be >= {minimum}, got {obj}")
    return obj


def _as_number(obj: Any, path: str) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise ConfigError(path, f"expected a number, got {obj!r}")
    v = float(obj)
    if not math.isfinite(v):
        raise ConfigError(path, "must be finite")
    return v


def _as_str(obj: Any, path: str) -> str:
    if not isinstance(obj, str) or not obj:
        raise ConfigError(path, f"expected a nonempty string, got {obj!r}")
    return obj


def _parse_eigenvalues(obj: Any, dim: int, path: str) -> tuple[float, ...]:
    if isinstance(obj, list):
        return tuple(_as_number(v, f"{path}[{i}]") for i, v in enumerate(obj))
    if isinstance(obj, dict):
        _require_keys(obj, path, ("head", "tail_value"), ())
        head_obj = obj["head"]
        if not isinstance(head_obj, list) or not head_obj:
            raise ConfigError(_join(path, "head"), "expected a nonempty list of numbers")
        head = [_as_number(v, f"{path}.head[{i}]") for i, v in enumerate(head_obj)]
        tail = _as_number(obj["tail_value"], _join(path, "tail_value"))
        if len(head) > dim:
            raise ConfigError(_join(path, "head"), f"has {len(head)} entries but dim is {dim}")
        return tuple(head) + (tail,) * (dim - len(head))
    raise ConfigError(path, "expected a list of numbers or {head, tail_value}")


def parse_source(obj: Any, path: str, base_dir: Path) -> SyntheticSpec | BagOfWordsDataset:
    """Parse the ``source`` section; dataset loading happens in the caller."""
    if not isinstance(obj, dict):
        raise ConfigError(path, "expected an object")
    kind = _as_str(obj.get("type", ""), _join(path, "type"))
    if kind == "synthetic":
        _require_keys(obj, path, ("type", "dim", "eigenvalues"), ("rotation_seed",))
        dim = _as_int(obj["dim"], _join(path, "dim"), minimum=1)
        ev = _parse_eigenvalues(obj["eigenvalues"], dim, _join(path, "eigenvalues"))
        rot = obj.get("rotation_seed")
        if rot is not None:
            rot = _as_int(rot, _join(path, "rotation_seed"))
        try:
            return SyntheticSpec(dim=dim, eigenvalues=ev, rotation_seed=rot)
        except InvalidArgumentError as exc:
            raise ConfigError(_join(path, "eigenvalues"), str(exc)) from exc
    if kind == "dataset":
        _require_keys(obj, path, ("type", "path"), ())
        rel = _as_str(obj["path"], _join(path, "path"))
        p = Path(rel)
        if not p.is_absolute():
            p = base_dir / p
        return load_bag_of_words(p)
    raise ConfigError(_join(path, "type"), f"expected 'synthetic' or 'dataset', got {kind!r}")


_ALG_FIELDS: dict[Algorithm, tuple[tuple[str, ...], tuple[str, ...]]] = {
    Algorithm.SPCA: (("c",), ("n0",)),
    Algorithm.ALECTON: (("rate",), ()),
    Algorithm.DBPCA: ((), ("gamma_sq", "initial_block", "schedule")),
    Algorithm.BPCA: ((), ("block", "L", "log_base")),
}


def _parse_schedule(obj: Any, path: str) -> ScheduleParams:
    if not isinstance(obj, dict):
        raise ConfigError(path, "expected an object")
    _require_keys(
        obj, path, ("lam", "lam_bar", "d", "k", "delta0", "chernoff_c"), ("cbar",)
    )
    kwargs = dict(
        lam=_as_number(obj["lam"], _join(path, "lam")),
        lam_bar=_as_number(obj["lam_bar"], _join(path, "lam_bar")),
        d=_as_int(obj["d"], _join(path, "d"), minimum=1),
        k=_as_int(obj["k"], _join(path, "k"), minimum=1),
        delta0=_as_number(obj["delta0"], _join(path, "delta0")),
        chernoff_c=_as_number(obj["chernoff_c"], _join(path, "chernoff_c")),
    )
    if "cbar" in obj:
        kwargs["cbar"] = _as_number(obj["cbar"], _join(path, "cbar"))
    try:
        return ScheduleParams(**kwargs)
    except InvalidArgumentError as exc:
        raise ConfigError(path, str(exc)) from exc


def parse_algorithm(obj: Any, k: int, n_points: int, dim: int, path: str) -> tuple[str, EstimatorConfig]:
    """Parse one grid entry into (config id, estimator configuration)."""
    if not isinstance(obj, dict):
        raise ConfigError(path, "expected an object")
    cid = _as_str(obj.get("id", ""), _join(path, "id"))
    name = _as_str(obj.get("algorithm", ""), _join(path, "algorithm"))
    try:
        alg = Algorithm(name)
    except ValueError:
        raise ConfigError(
            _join(path, "algorithm"),
            f"unknown algorithm {name!r}, expected one of {[a.value for a in Algorithm]}",
        ) from None
    required, optional = _ALG_FIELDS[alg]
    _require_keys(obj, path, ("id", "algorithm") + required, optional)

    kwargs: dict[str, Any] = {"algorithm": alg, "k": k}
    if alg is Algorithm.SPCA:
        kwargs["c"] = _as_number(obj["c"], _join(path, "c"))
        if "n0" in obj:
            kwargs["n0"] = _as_int(obj["n0"], _join(path, "n0"), minimum=0)
    elif alg is Algorithm.ALECTON:
        kwargs["rate"] = _as_number(obj["rate"], _join(path, "rate"))
    elif alg is Algorithm.DBPCA:
        if ("gamma_sq" in obj) == ("schedule" in obj):
            raise ConfigError(path, "dbpca requires exactly one of gamma_sq or schedule")
        if "gamma_sq" in obj:
            kwargs["gamma_sq"] = _as_number(obj["gamma_sq"], _join(path, "gamma_sq"))
        if "initial_block" in obj:
            kwargs["initial_block"] = _as_int(obj["initial_block"], _join(path, "initial_block"), minimum=1)
        if "schedule" in obj:
            kwargs["schedule"] = _parse_schedule(obj["schedule"], _join(path, "schedule"))
    elif alg is Algorithm.BPCA:
        if ("block" in obj) == ("L" in obj):
            raise ConfigError(path, "bpca requires exactly one of block or L")
        if "log_base" in obj and "L" not in obj:
            raise ConfigError(_join(path, "log_base"), "only applies together with L")
        if "block" in obj:
            kwargs["block"] = _as_int(obj["block"], _join(path, "block"), minimum=1)
        else:
            L = _as_number(obj["L"], _join(path, "L"))
            base = _as_number(obj["log_base"], _join(path, "log_base")) if "log_base" in obj else None
            try:
                kwargs["block"] = bpca_block_from_corpus(n_points, dim, L, log_base=base)
            except InvalidArgumentError as exc:
                raise ConfigError(_join(path, "L"), str(exc)) from exc
    try:
        return cid, EstimatorConfig(**kwargs)
    except InvalidArgumentError as exc:
        raise ConfigError(path, str(exc)) from exc


def parse_experiment(obj: Any, base_dir: Path) -> ExperimentConfig:
    """Parse a full experiment configuration object."""
    if not isinstance(obj, dict):
        raise ConfigError("", "top level: expected an object")
    _require_keys(
        obj,
        "",
        ("name", "k", "total_points", "checkpoints", "trials", "base_seed", "source", "algorithms"),
        ("table_checkpoints", "confidence", "oracle", "chunk_size"),
    )
    name = _as_str(obj["name"], "name")
    k = _as_int(obj["k"], "k", minimum=1)
    total = _as_int(obj["total_points"], "total_points", minimum=1)
    trials = _as_int(obj["trials"], "trials", minimum=1)
    base_seed = _as_int(obj["base_seed"], "base_seed", minimum=0)

    cp_obj = obj["checkpoints"]
    if not isinstance(cp_obj, list) or not cp_obj:
        raise ConfigError("checkpoints", "expected a nonempty list of integers")
    checkpoints = tuple(_as_int(v, f"checkpoints[{i}]", minimum=0) for i, v in enumerate(cp_obj))

    source = parse_source(obj["source"], "source", base_dir)
    if isinstance(source, SyntheticSpec):
        dim, n_points = source.dim, total
    else:
        dim, n_points = source.dim, source.n_points
    if k > dim:
        raise ConfigError("k", f"k={k} exceeds source dimension {dim}")

    alg_obj = obj["algorithms"]
    if not isinstance(alg_obj, list) or not alg_obj:
        raise ConfigError("algorithms", "expected a nonempty list")
    grid = tuple(
        parse_algorithm(entry, k, n_points, dim, f"algorithms[{i}]")
        for i, entry in enumerate(alg_obj)
    )

    table: tuple[int, ...] = ()
    if "table_checkpoints" in obj:
        tc = obj["table_checkpoints"]
        if not isinstance(tc, list) or not tc:
            raise ConfigError("table_checkpoints", "expected a nonempty list of integers")
        table = tuple(_as_int(v, f"table_checkpoints[{i}]", minimum=0) for i, v in enumerate(tc))

    kwargs: dict[str, Any] = {}
    if "confidence" in obj:
        kwargs["confidence"] = _as_number(obj["confidence"], "confidence")
    if "chunk_size" in obj:
        kwargs["chunk_size"] = _as_int(obj["chunk_size"], "chunk_size", minimum=1)
    if "oracle" in obj:
        oc = obj["oracle"]
        if not isinstance(oc, dict):
            raise ConfigError("oracle", "expected an object")
        _require_keys(oc, "oracle", (), ("passes", "seed"))
        if "passes" in oc:
            kwargs["oracle_passes"] = _as_int(oc["passes"], "oracle.passes", minimum=1)
        if "seed" in oc:
            kwargs["oracle_seed"] = _as_int(oc["seed"], "oracle.seed", minimum=0)

    try:
        return ExperimentConfig(
            name=name,
            source=source,
            k=k,
            total_points=total,
            checkpoints=checkpoints,
            trials=trials,
            base_seed=base_seed,
            grid=grid,
            table_checkpoints=table,
            **kwargs,
        )
    except InvalidArgumentError as exc:
        raise ConfigError("", str(exc)) from exc


def load_experiment(path: str | Path) -> ExperimentConfig:
    """Read and parse an experiment configuration file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("", f"cannot read config file {path}: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON in {path}: {exc}") from exc
    return parse_experiment(obj, path.parent)


def describe_source(source: SyntheticSpec | BagOfWordsDataset) -> dict[str, Any]:
    """Source metadata echoed into run manifests."""
    if isinstance(source, SyntheticSpec):
        return {
            "type": "synthetic",
            "dim": source.dim,
            "eigenvalues": list(source.eigenvalues),
            "rotation_seed": source.rotation_seed,
        }
    return {
        "type": "dataset",
        "path": source.path,
        "dim": source.dim,
        "n_points": source.n_points,
        "nnz": int(source.values.size),
        "normalization": source.normalization,
    }
