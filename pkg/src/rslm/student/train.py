"""Distillation: train a spectra encoder to match frozen teacher image
embeddings, with early stopping on validation matching loss."""

from __future__ import annotations

import numpy as np
import torch

from ..configs import RadarConfig, StudentConfig
from ..errors import TrainingDiverged
from ..hashing import mix_seed
from ..teacher.model import TeacherModel
from .loss import matching_loss
from .models import StudentModel, build_student, encode_views_batched
from .view import PlaneStats, compute_plane_stats, spectrum_to_planes, standardize_planes

_TRAIN_SALT = 0x57D


def load_views(frames, stats: PlaneStats | None = None):
    """Plane views for a list of frames; standardized when stats are given."""
    views = []
    for f in frames:
        planes = spectrum_to_planes(f.spectrum())
        views.append(standardize_planes(planes, stats) if stats is not None else planes)
    return np.stack(views) if views else np.zeros((0,))


def teacher_image_embeddings(teacher: TeacherModel, frames, batch=64) -> np.ndarray:
    images = np.stack([f.camera() for f in frames]).astype(np.float32)
    tensor = torch.from_numpy(images.transpose(0, 3, 1, 2))
    teacher.net.eval()
    outs = []
    with torch.no_grad():
        for start in range(0, len(frames), batch):
            outs.append(teacher.net.embed_images(tensor[start : start + batch]))
    return torch.cat(outs).numpy().astype(np.float32)


def constant_predictor_mse(train_embs: np.ndarray, eval_embs: np.ndarray) -> float:
    """MSE of predicting the per-dimension training-mean embedding everywhere."""
    mean = train_embs.mean(axis=0, keepdims=True)
    return float(((eval_embs - mean) ** 2).mean())


def train_student(
    dataset,
    teacher: TeacherModel,
    cfg: StudentConfig,
    radar_cfg: RadarConfig,
    seed: int,
    mode: str = "range_doppler",
    stats: PlaneStats | None = None,
    log=None,
) -> tuple:
    """Returns (frozen StudentModel, curves dict)."""
    if not teacher.frozen:
        raise TrainingDiverged("teacher must be frozen before distillation")
    teacher_hash_before = teacher.current_hash()

    train_frames = dataset.frames("train")
    val_frames = dataset.frames("val")
    raw_train = [spectrum_to_planes(f.spectrum()) for f in train_frames]
    if stats is None:
        stats = compute_plane_stats(raw_train)
    x_train = torch.from_numpy(
        np.stack([standardize_planes(p, stats) for p in raw_train])
    )
    del raw_train
    x_val = torch.from_numpy(load_views(val_frames, stats)) if val_frames else None

    y_train = torch.from_numpy(teacher_image_embeddings(teacher, train_frames))
    y_val = (
        torch.from_numpy(teacher_image_embeddings(teacher, val_frames))
        if val_frames
        else None
    )

    model = build_student(
        cfg, radar_cfg, mode=mode, embed_dim=teacher.embed_dim, seed=mix_seed(seed, _TRAIN_SALT)
    )
    model.stats = stats
    model.teacher_hash = teacher.frozen_hash

    curves = {"train": [], "val": []}
    if cfg.epochs == 0:
        model.freeze()
        return model, curves

    rng = np.random.default_rng(mix_seed(seed, _TRAIN_SALT, 1))
    optimizer = torch.optim.Adam(model.net.parameters(), lr=cfg.lr)
    best_val = float("inf")
    best_state = None
    bad_epochs = 0
    n = x_train.shape[0]
    for epoch in range(cfg.epochs):
        model.net.train()
        order = rng.permutation(n)
        epoch_losses = []
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            pred = model.net(x_train[idx])
            loss = matching_loss(pred, y_train[idx])
            if not torch.isfinite(loss):
                raise TrainingDiverged(
                    "non-finite student loss",
                    diagnostics={
                        "epoch": epoch,
                        "batch_start": int(start),
                        "frame_ids": [train_frames[i].frame_id for i in idx],
                    },
                )
            optimizer.zero_grad(set_to_none=True)
            loss.backward()
            optimizer.step()
            epoch_losses.append(float(loss.detach()))
        curves["train"].append(float(np.mean(epoch_losses)))

        if x_val is not None and len(val_frames):
            val_pred = encode_views_batched(model, x_val)
            val_loss = float(matching_loss(val_pred, y_val))
            curves["val"].append(val_loss)
            if log:
                log(
                    f"student epoch {epoch + 1}/{cfg.epochs} "
                    f"train {curves['train'][-1]:.5f} val {val_loss:.5f}"
                )
            if val_loss < best_val - 1e-7:
                best_val = val_loss
                best_state = {k: v.clone() for k, v in model.net.state_dict().items()}
                bad_epochs = 0
            else:
                bad_epochs += 1
                if bad_epochs > cfg.patience:
                    break

    if best_state is not None:
        model.net.load_state_dict(best_state)
    model.freeze()
    if teacher.current_hash() != teacher_hash_before:
        raise TrainingDiverged("teacher parameters changed during distillation")
    return model, curves
