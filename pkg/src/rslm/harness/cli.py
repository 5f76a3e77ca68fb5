"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 stage failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from ..configs import RunConfig, run_config_from_dict
from ..errors import ConfigError, IntegrityError, TrainingDiverged
from .ablation import render_table, run_ablation
from .pipeline import (
    StageFailure,
    default_out_root,
    ensure_dataset,
    ensure_index,
    ensure_stats,
    ensure_student,
    ensure_teacher,
    run_pipeline,
)

_STAGE_PREFIXES = {
    "gen-data": ("gen-data",),
    "train-vlm": ("gen-data", "train-vlm"),
    "train-student": ("gen-data", "train-vlm", "train-student"),
    "build-index": ("gen-data", "train-vlm", "train-student", "build-index"),
    "train-detector": (
        "gen-data",
        "train-vlm",
        "train-student",
        "train-detector",
    ),
    "evaluate": (
        "gen-data",
        "train-vlm",
        "train-student",
        "build-index",
        "train-detector",
        "evaluate",
    ),
}


def _log(msg):
    print(msg, flush=True)


def _load_config(args) -> RunConfig:
    if args.config:
        cfg = run_config_from_dict(json.loads(Path(args.config).read_text()))
    else:
        cfg = RunConfig()
    if args.out:
        cfg = dataclasses.replace(cfg, out_dir=args.out)
    if not cfg.out_dir:
        cfg = dataclasses.replace(cfg, out_dir=default_out_root())
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, global_seed=args.seed)
    variant = getattr(args, "variant", None)
    if variant:
        if args.command == "train-student":
            cfg = dataclasses.replace(
                cfg, student=dataclasses.replace(cfg.student, variant=variant)
            )
        else:
            cfg = dataclasses.replace(
                cfg, detector=dataclasses.replace(cfg.detector, variant=variant)
            )
    return cfg


def _pipeline_command(cfg: RunConfig, command: str) -> int:
    stages = _STAGE_PREFIXES[command]
    if command == "train-detector" and cfg.detector.variant in ("baseline", "from_scratch"):
        stages = tuple(s for s in stages if s not in ("train-vlm", "train-student"))
    run_dir = run_pipeline(dataclasses.replace(cfg, stages=stages), log=_log)
    _log(f"run directory: {run_dir}")
    return 0


def _query_command(cfg: RunConfig, args) -> int:
    out_root = Path(cfg.out_dir)
    data = ensure_dataset(cfg, out_root, _log)
    stats = ensure_stats(cfg, data, out_root, _log)
    teacher = ensure_teacher(cfg, data, out_root, _log)
    student = ensure_student(cfg, data, teacher, stats, out_root, _log)
    index = ensure_index(cfg, data, student, out_root, _log)

    from ..retrieval.index import load_index, query_text
    from ..teacher.model import load_teacher

    result = query_text(load_index(index.dir), load_teacher(teacher.dir), args.text, args.k)
    print(
        json.dumps(
            {
                "query": result.query,
                "results": [{"frame_id": fid, "score": score} for fid, score in result.ranked],
                "truncated": result.truncated,
            },
            indent=2,
        )
    )
    return 0


def _serve_command(cfg: RunConfig, args) -> int:
    out_root = Path(cfg.out_dir)
    data = ensure_dataset(cfg, out_root, _log)
    stats = ensure_stats(cfg, data, out_root, _log)
    teacher = ensure_teacher(cfg, data, out_root, _log)
    student = ensure_student(cfg, data, teacher, stats, out_root, _log)
    index = ensure_index(cfg, data, student, out_root, _log)

    import uvicorn

    from ..retrieval.service import create_app

    app = create_app(index.dir, teacher.dir, data.dir)
    _log(f"serving on port {args.port}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _ablation_command(cfg: RunConfig, args) -> int:
    seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
    report = run_ablation(cfg, seeds, log=_log)
    print(render_table(report))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rslm", description=__doc__)
    parser.add_argument("--config", help="path to a JSON run configuration")
    parser.add_argument("--out", help="output root (default $RSLM_OUT or ./out)")
    parser.add_argument("--seed", type=int, default=None, help="global seed override")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("gen-data", "train-vlm", "build-index", "evaluate"):
        sub.add_parser(name)
    p = sub.add_parser("train-student")
    p.add_argument("--variant", choices=("cnn", "fpn"))
    p = sub.add_parser("train-detector")
    p.add_argument(
        "--variant",
        choices=(
            "baseline",
            "frozen_enc",
            "finetuned_enc",
            "only_frozen_enc",
            "only_finetuned_enc",
            "from_scratch",
        ),
    )
    p = sub.add_parser("query")
    p.add_argument("--text", required=True)
    p.add_argument("--k", type=int, default=10)
    p = sub.add_parser("ablation")
    p.add_argument("--seeds", default="0,1,2")
    p = sub.add_parser("serve")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        if args.command in _STAGE_PREFIXES:
            return _pipeline_command(cfg, args.command)
        if args.command == "query":
            return _query_command(cfg, args)
        if args.command == "serve":
            return _serve_command(cfg, args)
        if args.command == "ablation":
            return _ablation_command(cfg, args)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, json.JSONDecodeError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (StageFailure, TrainingDiverged, IntegrityError) as exc:
        print(f"stage failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
