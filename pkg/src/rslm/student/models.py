"""Spectra encoders distilled against the teacher's image embeddings.

Two variants share the input geometry: a plain three-stage CNN and a
feature-pyramid encoder whose fused finest map feeds the embedding head.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from ..checkpoints import load_meta, load_state, param_hash, save_checkpoint
from ..configs import RadarConfig, StudentConfig
from ..errors import ConfigError, InputError
from .view import PlaneStats


class ResidualBlock(nn.Module):
    def __init__(self, channels):
        super().__init__()
        self.conv = nn.Conv2d(channels, channels, 3, padding=1)
        self.bn = nn.BatchNorm2d(channels)

    def forward(self, x):
        return torch.relu(x + self.bn(self.conv(x)))


def _down_stage(cin, cout):
    return nn.Sequential(
        nn.Conv2d(cin, cout, 3, stride=2, padding=1),
        nn.BatchNorm2d(cout),
        nn.ReLU(),
        ResidualBlock(cout),
    )


class CnnEncoder(nn.Module):
    """conv16->32->64->128 (stride 2, BN, ReLU), GAP, linear, layer norm."""

    def __init__(self, in_planes, embed_dim=64):
        super().__init__()

        def block(cin, cout):
            return nn.Sequential(
                nn.Conv2d(cin, cout, 3, stride=2, padding=1),
                nn.BatchNorm2d(cout),
                nn.ReLU(),
            )

        self.blocks = nn.Sequential(block(in_planes, 32), block(32, 64), block(64, 128))
        self.fc = nn.Linear(128, embed_dim)
        self.ln = nn.LayerNorm(embed_dim)

    def forward(self, x):
        feats = self.blocks(x).mean(dim=(2, 3))
        return self.ln(self.fc(feats))


class FpnEncoder(nn.Module):
    """MIMO pre-encoder, two stride-2 residual stages (32->64->128 channels),
    top-down lateral fusion to 64-channel maps, then a 3x3 conv to 32,
    global average pool and a linear head."""

    def __init__(self, in_planes, embed_dim=64):
        super().__init__()
        self.pre = nn.Conv2d(in_planes, 32, 1)
        self.stage1 = _down_stage(32, 64)
        self.stage2 = _down_stage(64, 128)
        self.lat0 = nn.Conv2d(32, 64, 1)
        self.lat1 = nn.Conv2d(64, 64, 1)
        self.lat2 = nn.Conv2d(128, 64, 1)
        self.out_conv = nn.Conv2d(64, 32, 3, padding=1)
        self.fc = nn.Linear(32, embed_dim)

    def pyramid(self, x):
        c0 = self.pre(x)
        c1 = self.stage1(c0)
        c2 = self.stage2(c1)
        return c0, c1, c2

    def forward(self, x):
        c0, c1, c2 = self.pyramid(x)
        p2 = self.lat2(c2)
        p1 = self.lat1(c1) + F.interpolate(p2, scale_factor=2, mode="nearest")
        p0 = self.lat0(c0) + F.interpolate(p1, scale_factor=2, mode="nearest")
        feats = torch.relu(self.out_conv(p0)).mean(dim=(2, 3))
        return self.fc(feats)


@dataclass
class StudentModel:
    variant: str
    net: nn.Module
    mode: str
    in_planes: int
    rows: int
    cols: int
    embed_dim: int
    stats: PlaneStats | None = None
    teacher_hash: str = ""
    frozen: bool = False

    def current_hash(self) -> str:
        return param_hash(self.net)

    def freeze(self) -> "StudentModel":
        self.net.eval()
        for p in self.net.parameters():
            p.requires_grad_(False)
        self.frozen = True
        return self

    def check_view(self, view) -> None:
        if tuple(view.shape[-3:]) != (self.in_planes, self.rows, self.cols):
            raise InputError(
                f"view shape {tuple(view.shape[-3:])} does not match model geometry "
                f"({self.in_planes}, {self.rows}, {self.cols})"
            )


def geometry_for_mode(radar_cfg: RadarConfig, mode: str):
    if mode == "range_doppler":
        return radar_cfg.n_range, radar_cfg.n_doppler
    if mode == "range_azimuth":
        return radar_cfg.n_range, radar_cfg.n_azimuth_bins
    raise ConfigError(f"unknown spectrum mode {mode!r}")


def build_student(
    cfg: StudentConfig,
    radar_cfg: RadarConfig,
    mode: str = "range_doppler",
    embed_dim: int = 64,
    seed: int = 0,
) -> StudentModel:
    rows, cols = geometry_for_mode(radar_cfg, mode)
    in_planes = 2 * radar_cfg.n_channels
    torch.manual_seed(seed)
    if cfg.variant == "cnn":
        net = CnnEncoder(in_planes, embed_dim)
    else:
        net = FpnEncoder(in_planes, embed_dim)
    return StudentModel(
        variant=cfg.variant,
        net=net,
        mode=mode,
        in_planes=in_planes,
        rows=rows,
        cols=cols,
        embed_dim=embed_dim,
    )


def encode_spectrum(model: StudentModel, view: np.ndarray) -> np.ndarray:
    model.check_view(view)
    x = torch.from_numpy(np.ascontiguousarray(view)).float().unsqueeze(0)
    model.net.eval()
    with torch.no_grad():
        emb = model.net(x)[0]
    return emb.numpy().astype(np.float32)


def encode_views_batched(model: StudentModel, views: torch.Tensor, batch=32) -> torch.Tensor:
    model.net.eval()
    outs = []
    with torch.no_grad():
        for start in range(0, views.shape[0], batch):
            outs.append(model.net(views[start : start + batch]))
    return torch.cat(outs) if outs else torch.zeros(0, model.embed_dim)


def save_student(model: StudentModel, out_dir, train_curves=None) -> None:
    meta = {
        "kind": "student",
        "variant": model.variant,
        "mode": model.mode,
        "in_planes": model.in_planes,
        "rows": model.rows,
        "cols": model.cols,
        "embed_dim": model.embed_dim,
        "teacher_hash": model.teacher_hash,
        "param_hash": param_hash(model.net),
        "stats": model.stats.to_dict() if model.stats else None,
        "train_curves": train_curves or {},
    }
    save_checkpoint(out_dir, model.net, meta)


def load_student(ckpt_dir) -> StudentModel:
    meta = load_meta(ckpt_dir)
    in_planes = meta["in_planes"]
    if meta["variant"] == "cnn":
        net = CnnEncoder(in_planes, meta["embed_dim"])
    else:
        net = FpnEncoder(in_planes, meta["embed_dim"])
    net.load_state_dict(load_state(ckpt_dir))
    model = StudentModel(
        variant=meta["variant"],
        net=net,
        mode=meta["mode"],
        in_planes=in_planes,
        rows=meta["rows"],
        cols=meta["cols"],
        embed_dim=meta["embed_dim"],
        stats=PlaneStats.from_dict(meta["stats"]) if meta["stats"] else None,
        teacher_hash=meta["teacher_hash"],
    )
    model.freeze()
    if model.current_hash() != meta["param_hash"]:
        from ..errors import IntegrityError

        raise IntegrityError("student checkpoint hash mismatch")
    return model
