"""Contrastive training of the teacher on (camera, caption) pairs."""

from __future__ import annotations

import numpy as np
import torch

from ..configs import TeacherConfig
from ..errors import TrainingDiverged
from ..hashing import mix_seed
from .loss import info_nce, safe_normalize
from .model import TeacherModel, build_teacher
from .tokenizer import tokenize

_TRAIN_SALT = 0xBA7C4


def pad_token_batch(token_lists, device=None):
    """Pad variable-length token id lists into (ids, mask) tensors."""
    max_len = max((len(t) for t in token_lists), default=0) or 1
    ids = torch.zeros(len(token_lists), max_len, dtype=torch.long, device=device)
    mask = torch.zeros(len(token_lists), max_len, device=device)
    for row, toks in enumerate(token_lists):
        if toks:
            ids[row, : len(toks)] = torch.tensor(toks, dtype=torch.long)
            mask[row, : len(toks)] = 1.0
    return ids, mask


def load_training_arrays(frames, image_size=64):
    """Images as one float32 tensor plus tokenized captions per frame."""
    images = np.stack([f.camera() for f in frames]).astype(np.float32)
    images = torch.from_numpy(images.transpose(0, 3, 1, 2))
    captions = [[tokenize(c.text) for c in f.captions()] for f in frames]
    return images, captions


def train_teacher(dataset, cfg: TeacherConfig, seed: int, log=None) -> TeacherModel:
    """Minimize the contrastive loss over minibatches of (camera, random caption).

    Returns a frozen model carrying its parameter hash and loss curve."""
    frames = dataset.frames("train")
    if len(frames) < 2:
        raise TrainingDiverged("need at least 2 training frames with captions")
    model = build_teacher(cfg, mix_seed(seed, _TRAIN_SALT))
    if cfg.epochs == 0:
        return model.freeze()

    images, captions = load_training_arrays(frames)
    n = len(frames)
    rng = np.random.default_rng(mix_seed(seed, _TRAIN_SALT, 1))
    optimizer = torch.optim.Adam(model.net.parameters(), lr=cfg.lr)
    scheduler = torch.optim.lr_scheduler.CosineAnnealingLR(optimizer, T_max=cfg.epochs)
    model.net.train()
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        cap_choice = rng.integers(0, [max(len(captions[i]), 1) for i in order])
        epoch_losses = []
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            if len(idx) < 2:
                continue
            img_batch = images[idx]
            tok_batch = [
                captions[i][cap_choice[start + k]] if captions[i] else []
                for k, i in enumerate(idx)
            ]
            ids, mask = pad_token_batch(tok_batch)
            img_emb = model.net.embed_images(img_batch)
            txt_emb = model.net.embed_token_batch(ids, mask)
            loss = info_nce(img_emb, txt_emb, model.net.temperature)
            if not torch.isfinite(loss):
                raise TrainingDiverged(
                    "non-finite teacher loss",
                    diagnostics={
                        "epoch": epoch,
                        "batch_start": int(start),
                        "frame_ids": [frames[i].frame_id for i in idx],
                    },
                )
            optimizer.zero_grad(set_to_none=True)
            loss.backward()
            optimizer.step()
            epoch_losses.append(float(loss.detach()))
        scheduler.step()
        model.train_curve.append(float(np.mean(epoch_losses)))
        if log:
            log(f"teacher epoch {epoch + 1}/{cfg.epochs} loss {model.train_curve[-1]:.4f}")
    return model.freeze()


def in_batch_accuracy(model: TeacherModel, frames, batch_size=64, caption_index=0) -> float:
    """Top-1 text->image retrieval accuracy over consecutive full batches,
    using each frame's canonical caption."""
    model.net.eval()
    hits, total = 0, 0
    for start in range(0, len(frames) - batch_size + 1, batch_size):
        chunk = frames[start : start + batch_size]
        images = np.stack([f.camera() for f in chunk]).astype(np.float32)
        img_t = torch.from_numpy(images.transpose(0, 3, 1, 2))
        toks = [tokenize(f.captions()[caption_index].text) for f in chunk]
        ids, mask = pad_token_batch(toks)
        with torch.no_grad():
            img_emb = safe_normalize(model.net.embed_images(img_t))
            txt_emb = safe_normalize(model.net.embed_token_batch(ids, mask))
            pred = (txt_emb @ img_emb.T).argmax(dim=1)
        hits += int((pred == torch.arange(batch_size)).sum())
        total += batch_size
    return hits / total if total else 0.0
