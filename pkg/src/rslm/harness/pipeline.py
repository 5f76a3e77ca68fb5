"""Experiment orchestration: content-addressed stages with idempotent skips.

Every stage writes into `<out>/<stage>/<hash16>/` where the hash covers the
stage's own config plus the hashes of its inputs, so ablation variants
share the expensive data/teacher/student artifacts. A `stage.json` marker
records config and artifact hashes; consuming stages verify the artifacts
they read and refuse to run on tampered inputs.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from ..configs import EvalConfig, GridConfig, RunConfig, StudentConfig
from ..dataset import FrameDataset, build_dataset, dataset_config_hash
from ..detector.decode import decode_detections
from ..detector.model import DetectorModel, load_detector, save_detector
from ..detector.targets import carlike_centers, detection_targets
from ..detector.train import train_detector
from ..errors import ConfigError, IntegrityError, TrainingDiverged
from ..hashing import config_hash, mix_seed, read_json, sha256_file, write_json
from ..metrics import evaluate_detection_run
from ..retrieval.index import (
    CATEGORY_QUERIES,
    build_index,
    load_index,
    query_text,
    save_index,
    topk_precision,
)
from ..student.models import StudentModel, build_student, load_student, save_student
from ..student.train import train_student
from ..student.view import PlaneStats, compute_plane_stats, spectrum_to_planes, standardize_planes
from ..teacher.model import load_teacher, save_teacher
from ..teacher.train import in_batch_accuracy, train_teacher

_RANDOM_STUDENT_SALT = 0xF5


class StageFailure(RuntimeError):
    def __init__(self, stage, cause):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class StageResult:
    name: str
    dir: Path
    config_hash: str

    def marker(self) -> dict:
        return read_json(self.dir / "stage.json")

    def verify(self, *relpaths) -> None:
        recorded = self.marker()["artifacts"]
        for rel in relpaths:
            if rel not in recorded:
                raise IntegrityError(f"{self.name}: artifact {rel!r} not recorded")
            actual = sha256_file(self.dir / rel)
            if actual != recorded[rel]:
                raise IntegrityError(
                    f"{self.name}: hash mismatch for {rel!r} "
                    f"(expected {recorded[rel][:12]}, found {actual[:12]})"
                )


def _stage_dir(out_root, stage, h) -> Path:
    return Path(out_root) / stage / h[:16]


def _cached(stage_dir: Path, h: str) -> bool:
    marker = stage_dir / "stage.json"
    if not marker.exists():
        return False
    try:
        return read_json(marker)["config_hash"] == h
    except (json.JSONDecodeError, KeyError):
        return False


def _finish(stage_dir: Path, stage: str, h: str, artifact_relpaths, inputs=None) -> None:
    artifacts = {rel: sha256_file(stage_dir / rel) for rel in artifact_relpaths}
    write_json(
        stage_dir / "stage.json",
        {"stage": stage, "config_hash": h, "inputs": inputs or {}, "artifacts": artifacts},
    )


def ensure_dataset(cfg: RunConfig, out_root, log=None) -> StageResult:
    h = dataset_config_hash(cfg.data, cfg.radar, cfg.global_seed)
    d = _stage_dir(out_root, "data", h)
    if not _cached(d, h):
        if log:
            log(f"generating dataset ({cfg.data.n_frames} frames) -> {d}")
        d.mkdir(parents=True, exist_ok=True)
        build_dataset(cfg.data, cfg.radar, cfg.global_seed, d, log=log)
        _finish(d, "data", h, ["manifest.json"])
    return StageResult("data", d, h)


def ensure_stats(cfg: RunConfig, data: StageResult, out_root, log=None) -> StageResult:
    h = config_hash({"data": data.config_hash, "what": "plane-stats"})
    d = _stage_dir(out_root, "stats", h)
    if not _cached(d, h):
        data.verify("manifest.json")
        dataset = FrameDataset(data.dir)
        stats = compute_plane_stats(
            spectrum_to_planes(f.spectrum()) for f in dataset.frames("train")
        )
        d.mkdir(parents=True, exist_ok=True)
        write_json(d / "stats.json", stats.to_dict())
        _finish(d, "stats", h, ["stats.json"], inputs={"data": data.config_hash})
    return StageResult("stats", d, h)


def load_stats(stats_stage: StageResult) -> PlaneStats:
    return PlaneStats.from_dict(read_json(stats_stage.dir / "stats.json"))


def ensure_teacher(cfg: RunConfig, data: StageResult, out_root, log=None) -> StageResult:
    h = config_hash(
        {
            "teacher": dataclasses.asdict(cfg.teacher),
            "data": data.config_hash,
            "seed": cfg.global_seed,
        }
    )
    d = _stage_dir(out_root, "teacher", h)
    if not _cached(d, h):
        data.verify("manifest.json")
        if log:
            log(f"training teacher -> {d}")
        dataset = FrameDataset(data.dir)
        model = train_teacher(dataset, cfg.teacher, cfg.global_seed, log=log)
        val_acc = in_batch_accuracy(
            model, dataset.frames("val"), batch_size=cfg.teacher.eval_batch
        )
        save_teacher(model, d)
        write_json(d / "eval.json", {"val_in_batch_top1": val_acc})
        _finish(
            d,
            "teacher",
            h,
            ["params.bin", "meta.json", "eval.json"],
            inputs={"data": data.config_hash},
        )
    return StageResult("teacher", d, h)


def ensure_student(
    cfg: RunConfig, data: StageResult, teacher: StageResult, stats: StageResult, out_root, log=None
) -> StageResult:
    h = config_hash(
        {
            "student": dataclasses.asdict(cfg.student),
            "teacher": teacher.config_hash,
            "data": data.config_hash,
            "seed": cfg.global_seed,
        }
    )
    d = _stage_dir(out_root, "student", h)
    if not _cached(d, h):
        teacher.verify("params.bin", "meta.json")
        if log:
            log(f"distilling student ({cfg.student.variant}) -> {d}")
        dataset = FrameDataset(data.dir)
        teacher_model = load_teacher(teacher.dir)
        model, curves = train_student(
            dataset,
            teacher_model,
            cfg.student,
            dataset.radar_config(),
            cfg.global_seed,
            stats=load_stats(stats),
            log=log,
        )
        save_student(model, d, train_curves=curves)
        _finish(
            d,
            "student",
            h,
            ["params.bin", "meta.json"],
            inputs={"data": data.config_hash, "teacher": teacher.config_hash},
        )
    return StageResult("student", d, h)


def ensure_index(
    cfg: RunConfig, data: StageResult, student: StageResult, out_root, log=None
) -> StageResult:
    h = config_hash(
        {
            "student": student.config_hash,
            "data": data.config_hash,
            "split": cfg.eval.index_split,
        }
    )
    d = _stage_dir(out_root, "index", h)
    if not _cached(d, h):
        student.verify("params.bin", "meta.json")
        if log:
            log(f"building index over split {cfg.eval.index_split!r} -> {d}")
        dataset = FrameDataset(data.dir)
        student_model = load_student(student.dir)
        frames = dataset.frames(cfg.eval.index_split)
        spectra = [f.spectrum() for f in frames]
        index = build_index(frames, student_model, spectra)
        save_index(index, d)
        _finish(
            d,
            "index",
            h,
            ["embeddings.bin", "index_meta.json"],
            inputs={"data": data.config_hash, "student": student.config_hash},
        )
    return StageResult("index", d, h)


def _load_split_views(dataset: FrameDataset, split: str, stats: PlaneStats, limit=0):
    frames = dataset.frames(split)
    if limit:
        frames = frames[:limit]
    views = np.stack(
        [standardize_planes(spectrum_to_planes(f.spectrum()), stats) for f in frames]
    )
    return frames, views


def _random_student(cfg: RunConfig, dataset: FrameDataset, stats, embed_dim, seed) -> StudentModel:
    model = build_student(
        StudentConfig(
            variant=cfg.student.variant,
            epochs=cfg.student.epochs,
            batch_size=cfg.student.batch_size,
            lr=cfg.student.lr,
            patience=cfg.student.patience,
        ),
        dataset.radar_config(),
        mode="range_doppler",
        embed_dim=embed_dim,
        seed=mix_seed(seed, _RANDOM_STUDENT_SALT),
    )
    model.stats = stats
    return model


def ensure_detector(
    cfg: RunConfig,
    data: StageResult,
    stats: StageResult,
    out_root,
    variant=None,
    student: StageResult | None = None,
    det_seed=None,
    log=None,
) -> StageResult:
    variant = variant or cfg.detector.variant
    det_seed = cfg.global_seed if det_seed is None else det_seed
    needs_student = variant != "baseline"
    uses_distilled = variant not in ("baseline", "from_scratch")
    if uses_distilled and student is None:
        raise ConfigError(
            f"detector variant {variant!r} needs the train-student stage enabled"
        )
    ident = {
        "detector": dataclasses.asdict(cfg.detector),
        "variant": variant,
        "data": data.config_hash,
        "seed": det_seed,
        "student": student.config_hash if (student and uses_distilled) else None,
        "student_cfg": dataclasses.asdict(cfg.student) if needs_student else None,
    }
    h = config_hash(ident)
    d = _stage_dir(out_root, "detector", h)
    if not _cached(d, h):
        data.verify("manifest.json")
        if log:
            log(f"training detector [{variant}] seed {det_seed} -> {d}")
        dataset = FrameDataset(data.dir)
        plane_stats = load_stats(stats)
        frames, views = _load_split_views(
            dataset, "train", plane_stats, cfg.detector.max_train_frames
        )
        grid = dataset.data_config().grid
        targets = [detection_targets(f.ground_truth(), grid) for f in frames]

        student_model = None
        if uses_distilled:
            student.verify("params.bin", "meta.json")
            student_model = load_student(student.dir)
        elif variant == "from_scratch":
            embed_dim = cfg.teacher.embed_dim
            student_model = _random_student(cfg, dataset, plane_stats, embed_dim, det_seed)

        model, train_log = train_detector(
            views,
            targets,
            cfg.detector,
            variant,
            grid,
            student=student_model,
            seed=det_seed,
            log=log,
        )
        save_detector(model, d, extra_meta={"det_seed": det_seed})
        with open(d / "train_log.jsonl", "w") as f:
            for entry in train_log:
                f.write(json.dumps(entry, sort_keys=True) + "\n")
        artifacts = ["params.bin", "meta.json", "train_log.jsonl"]
        if model.student is not None:
            artifacts += ["student/params.bin", "student/meta.json"]
        _finish(d, "detector", h, artifacts, inputs={"data": data.config_hash})
    return StageResult("detector", d, h)


def evaluate_detector_on_split(
    detector: DetectorModel,
    dataset: FrameDataset,
    stats: PlaneStats,
    eval_cfg: EvalConfig,
    split="test",
):
    frames, views = _load_split_views(dataset, split, stats)
    grid = detector.grid
    x = torch.from_numpy(views)
    emb = None
    if detector.needs_embedding:
        from ..student.models import encode_views_batched

        emb = encode_views_batched(detector.student, x)
    detector.net.eval()
    frame_preds, frame_gts, pred_masks, gt_masks = [], [], [], []
    with torch.no_grad():
        for start in range(0, len(frames), 32):
            xb = x[start : start + 32]
            eb = emb[start : start + 32] if emb is not None else None
            y_class, y_reg, y_seg = detector.net(xb, eb)
            for b in range(xb.shape[0]):
                out = (y_class[b].numpy(), y_reg[b].numpy(), y_seg[b].numpy())
                dets = decode_detections(
                    out, grid, eval_cfg.decode_score_thresh, nms_radius_cells=2
                )
                gt = frames[start + b].ground_truth()
                frame_preds.append(dets)
                frame_gts.append(carlike_centers(gt))
                pred_masks.append(out[2] >= 0.5)
                gt_masks.append(gt.y_seg.astype(bool))
    return evaluate_detection_run(frame_preds, frame_gts, pred_masks, gt_masks, eval_cfg)


def evaluate_retrieval(index_dir, teacher_dir, data: StageResult, eval_cfg: EvalConfig) -> dict:
    index = load_index(index_dir)
    teacher = load_teacher(teacher_dir)
    dataset = FrameDataset(data.dir)
    presence = {fid: set(dataset.frame(fid).ground_truth().presence) for fid in index.frame_ids}
    k = min(eval_cfg.retrieval_k, len(index))
    per_category = {}
    for category, query in sorted(CATEGORY_QUERIES.items()):
        result = query_text(index, teacher, query, k)
        per_category[category] = topk_precision(result, presence, category, k)
    mean = sum(per_category.values()) / len(per_category)
    return {
        "k": k,
        "queries": dict(sorted(CATEGORY_QUERIES.items())),
        "per_category": per_category,
        "mean_topk_precision": mean,
    }


def ensure_eval(
    cfg: RunConfig,
    data: StageResult,
    stats: StageResult,
    detector: StageResult | None,
    index: StageResult | None,
    teacher: StageResult | None,
    out_root,
    log=None,
) -> StageResult:
    h = config_hash(
        {
            "eval": dataclasses.asdict(cfg.eval),
            "detector": detector.config_hash if detector else None,
            "index": index.config_hash if index else None,
            "data": data.config_hash,
        }
    )
    d = _stage_dir(out_root, "eval", h)
    if not _cached(d, h):
        if log:
            log(f"evaluating -> {d}")
        d.mkdir(parents=True, exist_ok=True)
        dataset = FrameDataset(data.dir)
        metrics = {}
        if detector is not None:
            detector.verify("params.bin", "meta.json")
            model = load_detector(detector.dir)
            metrics["detection"] = evaluate_detector_on_split(
                model, dataset, load_stats(stats), cfg.eval, split="test"
            )
            metrics["detection"]["variant"] = model.variant
            from .plots import emit_plots

            emit_plots(model, dataset, load_stats(stats), d / "plots", max_frames=4)
        if index is not None and teacher is not None:
            index.verify("embeddings.bin", "index_meta.json")
            metrics["retrieval"] = evaluate_retrieval(index.dir, teacher.dir, data, cfg.eval)
        write_json(d / "metrics.json", metrics)
        _finish(d, "eval", h, ["metrics.json"], inputs={"data": data.config_hash})
    return StageResult("eval", d, h)


def run_pipeline(cfg: RunConfig, log=None) -> Path:
    """Execute the enabled stages in order; returns the run directory."""
    out_root = Path(cfg.out_dir or default_out_root())
    run_hash = cfg.hash()
    run_dir = out_root / "runs" / run_hash[:16]
    run_dir.mkdir(parents=True, exist_ok=True)
    stage_records = {}
    current = None
    try:
        current = "gen-data"
        data = ensure_dataset(cfg, out_root, log)
        stats = ensure_stats(cfg, data, out_root, log)
        stage_records["gen-data"] = data
        teacher = student = index = detector = evaluation = None
        if "train-vlm" in cfg.stages:
            current = "train-vlm"
            teacher = ensure_teacher(cfg, data, out_root, log)
            stage_records["train-vlm"] = teacher
        if "train-student" in cfg.stages:
            current = "train-student"
            if teacher is None:
                raise ConfigError("train-student requires the train-vlm stage")
            student = ensure_student(cfg, data, teacher, stats, out_root, log)
            stage_records["train-student"] = student
        if "build-index" in cfg.stages:
            current = "build-index"
            if student is None:
                raise ConfigError("build-index requires the train-student stage")
            index = ensure_index(cfg, data, student, out_root, log)
            stage_records["build-index"] = index
        if "train-detector" in cfg.stages:
            current = "train-detector"
            detector = ensure_detector(
                cfg,
                data,
                stats,
                out_root,
                student=student if cfg.detector.variant not in ("baseline", "from_scratch") else None,
                log=log,
            )
            stage_records["train-detector"] = detector
        if "evaluate" in cfg.stages:
            current = "evaluate"
            evaluation = ensure_eval(
                cfg, data, stats, detector, index, teacher, out_root, log
            )
            stage_records["evaluate"] = evaluation
    except (IntegrityError, TrainingDiverged, OSError) as exc:
        write_json(
            run_dir / "failure.json",
            {"stage": current, "error": type(exc).__name__, "detail": str(exc)},
        )
        raise StageFailure(current, exc) from exc

    write_json(
        run_dir / "manifest.json",
        {
            "run_hash": run_hash,
            "config": cfg.identity_dict(),
            "stages": {
                name: {"dir": str(res.dir), "config_hash": res.config_hash}
                for name, res in stage_records.items()
            },
        },
    )
    return run_dir


def default_out_root() -> str:
    import os

    return os.environ.get("RSLM_OUT", "out")
