"""Miniature contrastive vision-language teacher.

Image side: three stride-2 conv blocks, global average pool, linear to the
embedding dimension. Text side: hashed token embedding table, mean pool,
two-layer perceptron. A learnable log inverse temperature scales the
similarity logits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn as nn

from ..checkpoints import load_meta, load_state, param_hash, save_checkpoint
from ..configs import TeacherConfig
from ..errors import InputError


class TeacherNet(nn.Module):
    def __init__(self, embed_dim=64, vocab_size=4096, init_temperature=0.07, image_size=64):
        super().__init__()
        # Fixed coordinate planes restore absolute position under the
        # global average pool (captions carry left/right and near/far words).
        ys, xs = torch.meshgrid(
            torch.linspace(-1.0, 1.0, image_size),
            torch.linspace(-1.0, 1.0, image_size),
            indexing="ij",
        )
        self.register_buffer("coords", torch.stack([ys, xs]).unsqueeze(0))
        self.image_encoder = nn.Sequential(
            nn.Conv2d(5, 32, 3, stride=2, padding=1),
            nn.ReLU(),
            nn.Conv2d(32, 64, 3, stride=2, padding=1),
            nn.ReLU(),
            nn.Conv2d(64, 128, 3, stride=2, padding=1),
            nn.ReLU(),
        )
        self.image_proj = nn.Linear(128, embed_dim)
        self.token_table = nn.Embedding(vocab_size, embed_dim)
        self.text_mlp = nn.Sequential(
            nn.Linear(embed_dim, 4 * embed_dim),
            nn.ReLU(),
            nn.Linear(4 * embed_dim, embed_dim),
        )
        self.log_inv_temp = nn.Parameter(torch.tensor(math.log(1.0 / init_temperature)))
        self.embed_dim = embed_dim
        self.vocab_size = vocab_size
        self.image_size = image_size

    @property
    def temperature(self) -> torch.Tensor:
        return torch.exp(-self.log_inv_temp)

    def embed_images(self, images: torch.Tensor) -> torch.Tensor:
        coords = self.coords.expand(images.shape[0], -1, -1, -1).to(images.dtype)
        feats = self.image_encoder(torch.cat([images, coords], dim=1)).mean(dim=(2, 3))
        return self.image_proj(feats)

    def embed_token_batch(self, ids: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        """Mean-pool hashed token embeddings; all-padding rows pool to zero."""
        emb = self.token_table(ids) * mask.unsqueeze(-1)
        counts = mask.sum(dim=1, keepdim=True).clamp(min=1.0)
        pooled = emb.sum(dim=1) / counts
        return self.text_mlp(pooled)


@dataclass
class TeacherModel:
    net: TeacherNet
    cfg: TeacherConfig
    seed: int = 0
    frozen: bool = False
    frozen_hash: str = ""
    train_curve: list = field(default_factory=list)

    @property
    def embed_dim(self) -> int:
        return self.net.embed_dim

    @property
    def temperature(self) -> float:
        return float(self.net.temperature.detach())

    def freeze(self) -> "TeacherModel":
        self.net.eval()
        for p in self.net.parameters():
            p.requires_grad_(False)
        self.frozen = True
        self.frozen_hash = param_hash(self.net)
        return self

    def current_hash(self) -> str:
        return param_hash(self.net)


def build_teacher(cfg: TeacherConfig, seed: int) -> TeacherModel:
    torch.manual_seed(seed)
    net = TeacherNet(cfg.embed_dim, cfg.vocab_size, cfg.init_temperature)
    return TeacherModel(net=net, cfg=cfg, seed=seed)


def _image_to_tensor(img: np.ndarray, size: int) -> torch.Tensor:
    if img.ndim != 3 or img.shape != (size, size, 3):
        raise InputError(f"expected image of shape ({size}, {size}, 3), got {img.shape}")
    return torch.from_numpy(np.ascontiguousarray(img.transpose(2, 0, 1))).float()


def encode_image(model: TeacherModel, img: np.ndarray) -> np.ndarray:
    x = _image_to_tensor(img, model.net.image_size).unsqueeze(0)
    with torch.no_grad():
        model.net.eval()
        emb = model.net.embed_images(x)[0]
    return emb.numpy().astype(np.float32)


def encode_text(model: TeacherModel, tokens: list) -> np.ndarray:
    for t in tokens:
        if not (0 <= t < model.net.vocab_size):
            raise InputError(f"token id {t} outside vocabulary")
    if tokens:
        ids = torch.tensor([tokens], dtype=torch.long)
        mask = torch.ones(1, len(tokens))
    else:
        ids = torch.zeros(1, 1, dtype=torch.long)
        mask = torch.zeros(1, 1)
    with torch.no_grad():
        model.net.eval()
        emb = model.net.embed_token_batch(ids, mask)[0]
    return emb.numpy().astype(np.float32)


def save_teacher(model: TeacherModel, out_dir) -> None:
    meta = {
        "kind": "teacher",
        "embed_dim": model.net.embed_dim,
        "vocab_size": model.net.vocab_size,
        "temperature": model.temperature,
        "seed": model.seed,
        "param_hash": model.frozen_hash or param_hash(model.net),
        "train_curve": model.train_curve,
        "cfg": {
            "embed_dim": model.cfg.embed_dim,
            "vocab_size": model.cfg.vocab_size,
            "epochs": model.cfg.epochs,
            "batch_size": model.cfg.batch_size,
            "lr": model.cfg.lr,
            "init_temperature": model.cfg.init_temperature,
            "eval_batch": model.cfg.eval_batch,
        },
    }
    save_checkpoint(out_dir, model.net, meta)


def load_teacher(ckpt_dir) -> TeacherModel:
    meta = load_meta(ckpt_dir)
    cfg = TeacherConfig(**meta["cfg"])
    net = TeacherNet(cfg.embed_dim, cfg.vocab_size, cfg.init_temperature)
    net.load_state_dict(load_state(ckpt_dir))
    model = TeacherModel(net=net, cfg=cfg, seed=meta["seed"], train_curve=meta["train_curve"])
    model.freeze()
    if model.frozen_hash != meta["param_hash"]:
        from ..errors import IntegrityError

        raise IntegrityError(
            f"teacher checkpoint hash mismatch: {model.frozen_hash} != {meta['param_hash']}"
        )
    return model
