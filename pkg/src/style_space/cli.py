"""Command-line interface.

Subcommands: ``gen-synth``, ``reps``, ``schedule``, ``plot``, ``validate``.
Every file-producing command also writes ``<out>.manifest.json`` recording
the resolved configuration, SHA-256 digests of all inputs and outputs, and
the seeds in play, so identical invocations are provably byte-identical.

Exit codes: 0 success, 1 data or algorithm failure, 2 usage error.
Diagnostics go to stderr; machine-readable output goes to files or stdout.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .cluster_stats import fit_model, mahalanobis
from .dataset import (
    DatasetError,
    LabeledEmbeddingSet,
    SyntheticCategory,
    SyntheticSpec,
    generate_synthetic,
    load_csv,
    load_jsonl,
    partition,
    serialize_jsonl,
    validate,
)
from .interpolation import (
    IntensitySchedule,
    InterpolationConfig,
    linear_schedule,
    sa_i2i_schedule,
)
from .projection import build_scene, emit_plot, pca_fit
from .representative import (
    Representative,
    SolverConfig,
    i2i_representative,
    mean_representative,
)


class UsageConflictError(Exception):
    """Flag combination that argparse alone cannot reject."""


def _fail(message: str) -> None:
    print(f"error: {message}", file=sys.stderr)


def _note(message: str) -> None:
    print(message, file=sys.stderr)


def _write_atomic(path: Path, data: bytes) -> None:
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _json_bytes(doc) -> bytes:
    return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8")


def _emit_manifest(
    command: str,
    out_path: Path,
    config: dict,
    inputs: list[Path],
    seeds: dict[str, int],
) -> None:
    manifest = {
        "command": command,
        "version": __version__,
        "config": config,
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": {str(out_path): _sha256(out_path)},
        "seeds": seeds,
    }
    _write_atomic(Path(str(out_path) + ".manifest.json"), _json_bytes(manifest))


def _load_dataset(path: Path) -> LabeledEmbeddingSet:
    if path.suffix.lower() == ".csv":
        return load_csv(path)
    return load_jsonl(path)


# ---------------------------------------------------------------------------
# subcommand handlers


def _inline_spec(args) -> SyntheticSpec:
    if args.clusters < 1:
        raise UsageConflictError(f"--clusters must be >= 1, got {args.clusters}")
    if args.clusters > args.dim:
        raise UsageConflictError(
            f"inline mode places centroids on coordinate axes; needs --clusters <= --dim "
            f"({args.clusters} > {args.dim})"
        )
    labels = ["neutral"] + [f"emotion_{i:02d}" for i in range(1, args.clusters)]
    scale = args.separation / math.sqrt(2.0)  # pairwise centroid distance == separation
    categories = []
    for i, label in enumerate(labels):
        mean = np.zeros(args.dim)
        mean[i] = scale
        categories.append(
            SyntheticCategory(
                label=label,
                mean=mean,
                std=np.full(args.dim, args.spread),
                count=args.n,
            )
        )
    return SyntheticSpec(categories=tuple(categories), dim=args.dim, seed=args.seed)


def _cmd_gen_synth(args) -> int:
    inline_given = args.clusters is not None or args.dim is not None or args.n is not None
    if args.spec is not None and inline_given:
        raise UsageConflictError("--spec conflicts with inline --clusters/--dim/--n")
    if args.spec is None and not (
        args.clusters is not None and args.dim is not None and args.n is not None
    ):
        raise UsageConflictError("provide --spec FILE or all of --clusters, --dim, --n")
    inputs: list[Path] = []
    if args.spec is not None:
        spec_path = Path(args.spec)
        try:
            doc = json.loads(spec_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise DatasetError(f"{spec_path}: invalid JSON ({exc.msg})") from exc
        spec = SyntheticSpec.from_dict(doc)
        inputs.append(spec_path)
    else:
        spec = _inline_spec(args)
    dataset = generate_synthetic(spec)
    out = Path(args.out)
    _write_atomic(out, serialize_jsonl(dataset).encode("utf-8"))
    config = {
        "spec": args.spec,
        "clusters": args.clusters,
        "dim": args.dim,
        "n": args.n,
        "separation": args.separation,
        "spread": args.spread,
        "out": str(out),
    }
    _emit_manifest("gen-synth", out, config, inputs, {"dataset": spec.seed})
    _note(f"wrote {len(dataset)} records to {out}")
    return 0


def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        refine=not args.no_refine,
        split_mode=getattr(args, "split_mode", False),
        shrinkage=args.shrinkage,
        boundary_quantile=args.boundary_quantile,
    )


def _cmd_reps(args) -> int:
    in_path = Path(args.input)
    dataset = _load_dataset(in_path)
    report = validate(dataset, min_per_category=1, neutral_label=args.neutral)
    if report.invalid_ids:
        _fail(f"records with non-finite weights: {', '.join(report.invalid_ids)}")
        return 1
    clusters = partition(dataset)
    reps: list[Representative] = []
    if args.method == "mean":
        for label, cluster in clusters.items():
            model = fit_model(cluster)
            reps.append(mean_representative(cluster, model))
    else:
        cfg = _solver_config(args)
        if len(clusters) == 2:
            _note(
                "warning: only 2 categories present; the single rival cluster "
                "serves as both the closest and farthest category"
            )
        for label in clusters:
            reps.append(i2i_representative(dataset, label, cfg))
    out = Path(args.out)
    _write_atomic(out, _json_bytes([rep.to_dict() for rep in reps]))
    config = {
        "input": str(in_path),
        "method": args.method,
        "refine": not args.no_refine,
        "split_mode": args.split_mode,
        "shrinkage": args.shrinkage,
        "boundary_quantile": args.boundary_quantile,
        "neutral": args.neutral,
        "out": str(out),
    }
    _emit_manifest("reps", out, config, [in_path], {})
    _note(f"wrote {len(reps)} representatives to {out}")
    return 0


def _parse_ts(raw: str) -> list[float]:
    try:
        return [float(tok) for tok in raw.split(",") if tok.strip() != ""]
    except ValueError:
        raise UsageConflictError(f"--ts must be a comma-separated float list, got {raw!r}") from None


def _cmd_schedule(args) -> int:
    if args.method == "linear" and args.levels is not None:
        raise UsageConflictError("--levels applies only to --method sa-i2i")
    if args.method == "sa-i2i" and args.ts is not None:
        raise UsageConflictError("--ts applies only to --method linear")
    in_path = Path(args.input)
    dataset = _load_dataset(in_path)
    solver_cfg = SolverConfig(
        refine=not args.no_refine,
        shrinkage=args.shrinkage,
        boundary_quantile=args.boundary_quantile,
    )
    if args.method == "linear":
        ts = _parse_ts(args.ts if args.ts is not None else "0,0.2,0.4,0.6,0.8,1")
        schedule = linear_schedule(
            dataset, args.emotion, ts, solver_cfg, neutral_label=args.neutral
        )
    else:
        cfg = InterpolationConfig(
            f_kind=args.f_kind,
            granularity=args.levels if args.levels is not None else 4,
            pair_cap=args.pair_cap,
            seed=args.seed,
            neutral_label=args.neutral,
        )
        schedule = sa_i2i_schedule(dataset, args.emotion, cfg, solver_cfg)
    out = Path(args.out)
    _write_atomic(out, _json_bytes(schedule.to_dict()))
    config = {
        "input": str(in_path),
        "emotion": args.emotion,
        "neutral": args.neutral,
        "method": args.method,
        "levels": args.levels,
        "ts": args.ts,
        "f_kind": args.f_kind,
        "pair_cap": args.pair_cap,
        "refine": not args.no_refine,
        "shrinkage": args.shrinkage,
        "boundary_quantile": args.boundary_quantile,
        "out": str(out),
    }
    _emit_manifest("schedule", out, config, [in_path], {"subsample": args.seed})
    _note(f"wrote {len(schedule.levels)}-level {args.method} schedule to {out}")
    return 0


def _cmd_plot(args) -> int:
    in_path = Path(args.input)
    dataset = _load_dataset(in_path)
    proj = pca_fit(dataset)
    inputs = [in_path]
    representatives = None
    if args.reps is not None:
        reps_path = Path(args.reps)
        docs = json.loads(reps_path.read_text(encoding="utf-8"))
        representatives = [Representative.from_dict(doc) for doc in docs]
        for rep in representatives:
            if rep.vector.size != dataset.dim:
                raise ValueError(
                    f"{reps_path}: representative {rep.label!r} has dimension "
                    f"{rep.vector.size}, dataset has {dataset.dim}"
                )
        inputs.append(reps_path)
    schedule = None
    if args.schedule is not None:
        sched_path = Path(args.schedule)
        schedule = IntensitySchedule.from_dict(
            json.loads(sched_path.read_text(encoding="utf-8"))
        )
        if schedule.levels[0].vector.size != dataset.dim:
            raise ValueError(
                f"{sched_path}: schedule dimension {schedule.levels[0].vector.size} "
                f"does not match dataset dimension {dataset.dim}"
            )
        inputs.append(sched_path)
    scene = build_scene(proj, dataset, representatives, schedule)
    out = Path(args.out)
    _write_atomic(out, emit_plot(scene, args.format))
    config = {
        "input": str(in_path),
        "reps": args.reps,
        "schedule": args.schedule,
        "format": args.format,
        "out": str(out),
    }
    _emit_manifest("plot", out, config, inputs, {})
    _note(f"wrote {args.format} plot ({scene.point_count()} points) to {out}")
    return 0


def _cmd_validate(args) -> int:
    try:
        dataset = _load_dataset(Path(args.input))
    except (DatasetError, OSError) as exc:
        _fail(str(exc))
        return 2
    report = validate(
        dataset, min_per_category=args.min_per_category, neutral_label=args.neutral
    )
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return 0 if report.schedulable else 1


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="style-space",
        description=(
            "Representative vector selection and emotion-intensity schedules "
            "for labeled style-embedding weight clusters."
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-synth", help="generate a deterministic synthetic dataset")
    p.add_argument("--spec", help="JSON synthetic-spec file")
    p.add_argument("--clusters", type=int, help="inline mode: number of categories")
    p.add_argument("--dim", type=int, help="inline mode: vector dimension")
    p.add_argument("--n", type=int, help="inline mode: vectors per category")
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument(
        "--separation",
        type=float,
        default=3.0,
        help="inline mode: pairwise centroid distance (default 3.0)",
    )
    p.add_argument(
        "--spread",
        type=float,
        default=1.0,
        help="inline mode: per-dimension standard deviation (default 1.0)",
    )
    p.add_argument("--out", required=True, help="output JSONL path")
    p.set_defaults(handler=_cmd_gen_synth)

    p = sub.add_parser("reps", help="compute per-category representative vectors")
    p.add_argument("--input", required=True, help="dataset path (.jsonl or .csv)")
    p.add_argument("--method", required=True, choices=("mean", "i2i"))
    p.add_argument("--no-refine", action="store_true", help="skip the simplex ascent stage")
    p.add_argument(
        "--split-mode",
        action="store_true",
        help="average two separately maximized rival ratios instead of their joint half-sum",
    )
    p.add_argument("--shrinkage", type=float, default=0.1)
    p.add_argument("--boundary-quantile", type=float, default=1.0)
    p.add_argument("--neutral", default="neutral", help="neutral category label")
    p.add_argument("--out", required=True, help="output JSON path")
    p.set_defaults(handler=_cmd_reps)

    p = sub.add_parser("schedule", help="build an intensity schedule toward an emotion")
    p.add_argument("--input", required=True, help="dataset path (.jsonl or .csv)")
    p.add_argument("--emotion", required=True, help="target emotion label")
    p.add_argument("--neutral", default="neutral", help="neutral category label")
    p.add_argument("--method", required=True, choices=("linear", "sa-i2i"))
    p.add_argument("--levels", type=int, help="sa-i2i only: number of levels (default 4)")
    p.add_argument(
        "--ts", help="linear only: comma-separated intensities (default 0,0.2,0.4,0.6,0.8,1)"
    )
    p.add_argument("--f-kind", choices=("identity", "square", "cube"), default="square")
    p.add_argument("--pair-cap", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0, help="subsampling seed (default 0)")
    p.add_argument("--no-refine", action="store_true")
    p.add_argument("--shrinkage", type=float, default=0.1)
    p.add_argument("--boundary-quantile", type=float, default=1.0)
    p.add_argument("--out", required=True, help="output JSON path")
    p.set_defaults(handler=_cmd_schedule)

    p = sub.add_parser("plot", help="project everything to 2-D and render svg/csv")
    p.add_argument("--input", required=True, help="dataset path (.jsonl or .csv)")
    p.add_argument("--reps", help="representatives JSON from the reps command")
    p.add_argument("--schedule", help="schedule JSON from the schedule command")
    p.add_argument("--format", required=True, choices=("svg", "csv"))
    p.add_argument("--out", required=True, help="output path")
    p.set_defaults(handler=_cmd_plot)

    p = sub.add_parser("validate", help="check a dataset and print a JSON report")
    p.add_argument("--input", required=True, help="dataset path (.jsonl or .csv)")
    p.add_argument("--min-per-category", type=int, default=1)
    p.add_argument("--neutral", default="neutral", help="neutral category label")
    p.set_defaults(handler=_cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage to stderr
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except UsageConflictError as exc:
        _fail(str(exc))
        return 2
    except (DatasetError, ValueError) as exc:
        _fail(str(exc))
        return 1
    except OSError as exc:
        _fail(str(exc))
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
