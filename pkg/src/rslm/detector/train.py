"""Detector training over the six ablation variants.

Variant rules: the baseline never sees embeddings; `frozen_enc` and
`only_frozen_enc` consume cached embeddings from the frozen student;
`finetuned_enc` and `only_finetuned_enc` keep the student frozen until the
last `finetune_last_epochs` epochs; `from_scratch` trains a randomly
initialized encoder of the same architecture throughout.
"""

from __future__ import annotations

import numpy as np
import torch

from ..configs import DetectorConfig, GridConfig
from ..errors import ConfigError, TrainingDiverged
from ..hashing import mix_seed
from ..student.models import StudentModel, encode_views_batched
from .losses import total_loss
from .model import DetectorModel, build_detector

_TRAIN_SALT = 0xDE7


def _unfreeze_epoch(variant: str, cfg: DetectorConfig):
    if variant in ("frozen_enc", "only_frozen_enc"):
        return None  # never trained
    if variant in ("finetuned_enc", "only_finetuned_enc"):
        return max(cfg.epochs - cfg.finetune_last_epochs, 0)
    if variant == "from_scratch":
        return 0
    return None


def train_detector(
    views: np.ndarray,
    targets: list,
    cfg: DetectorConfig,
    variant: str,
    grid: GridConfig,
    student: StudentModel | None = None,
    mode: str = "range_doppler",
    seed: int = 0,
    log=None,
) -> tuple:
    """Returns (DetectorModel, train_log: list of per-epoch dicts)."""
    if variant != "baseline" and student is None:
        raise ConfigError(f"variant {variant!r} requires a student encoder")
    n, in_planes, rows, cols = views.shape
    model = build_detector(
        variant,
        grid,
        in_planes,
        rows,
        cols,
        embed_dim=student.embed_dim if student else 64,
        mode=mode,
        student=student,
        seed=mix_seed(seed, _TRAIN_SALT),
    )
    student = model.student  # finetuned variants own a private copy

    x = torch.from_numpy(views)
    y_class = torch.from_numpy(np.stack([t["y_class"] for t in targets]))
    y_reg = torch.from_numpy(np.stack([t["y_reg"] for t in targets]))
    y_seg = torch.from_numpy(np.stack([t["y_seg"] for t in targets]))

    unfreeze_at = _unfreeze_epoch(variant, cfg)
    cached_emb = None
    if model.needs_embedding:
        cached_emb = encode_views_batched(student, x)

    params = list(model.net.parameters())
    optimizer = torch.optim.Adam(params, lr=cfg.lr)
    student_in_optimizer = False

    rng = np.random.default_rng(mix_seed(seed, _TRAIN_SALT, 1))
    train_log = []
    for epoch in range(cfg.epochs):
        student_trainable = unfreeze_at is not None and epoch >= unfreeze_at
        if student_trainable and not student_in_optimizer:
            for p in student.net.parameters():
                p.requires_grad_(True)
            optimizer.add_param_group({"params": list(student.net.parameters())})
            student_in_optimizer = True
        model.net.train()
        if student is not None:
            student.net.train(mode=student_trainable)

        order = rng.permutation(n)
        epoch_losses = []
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            xb = x[idx]
            emb = None
            if model.needs_embedding:
                emb = student.net(xb) if student_trainable else cached_emb[idx]
            out = model.net(xb, emb)
            tgt = {"y_class": y_class[idx], "y_reg": y_reg[idx], "y_seg": y_seg[idx]}
            loss = total_loss(out, tgt, cfg.loss) / len(idx)
            if not torch.isfinite(loss):
                raise TrainingDiverged(
                    "non-finite detector loss",
                    diagnostics={"variant": variant, "epoch": epoch, "batch_start": int(start)},
                )
            optimizer.zero_grad(set_to_none=True)
            loss.backward()
            optimizer.step()
            epoch_losses.append(float(loss.detach()))
        if student_trainable:
            # Embeddings moved this epoch; refresh the cache used for logging/eval.
            cached_emb = encode_views_batched(student, x)
        entry = {
            "epoch": epoch,
            "train_loss": float(np.mean(epoch_losses)) if epoch_losses else 0.0,
            "student_hash": student.current_hash() if student else None,
            "student_trainable": bool(student_trainable),
        }
        train_log.append(entry)
        if log:
            log(f"detector[{variant}] epoch {epoch + 1}/{cfg.epochs} loss {entry['train_loss']:.3f}")

    model.net.eval()
    if student is not None:
        student.net.eval()
    return model, train_log
