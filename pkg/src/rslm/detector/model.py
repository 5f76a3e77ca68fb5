"""Detection + free-space segmentation network with optional embedding
injection.

The backbone mirrors the student pyramid (MIMO pre-encoder, stride-2
residual stages) and fuses laterals at stride 4. A learned linear map then
converts the (channel x Doppler) content of each range row into azimuth
columns, which both heads share. An adapter branch can project a spectra
embedding onto the fused map; the `only_*` variants drop the backbone and
run on the adapter features alone.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from ..checkpoints import load_meta, load_state, param_hash, save_checkpoint
from ..configs import DETECTOR_VARIANTS, GridConfig
from ..errors import ConfigError, InputError
from ..student.models import ResidualBlock, StudentModel, _down_stage

_PROB_EPS = 1e-7
_ADAPTER_HW = 16
_FUSED_CH = 64


@dataclass
class DetectionOutput:
    y_class: torch.Tensor  # (R', A') probabilities in (0, 1)
    y_reg: torch.Tensor  # (2, R', A') offsets (range m, azimuth deg)
    y_seg: torch.Tensor  # (Rs, As) probabilities in (0, 1)


class RadarDetectorNet(nn.Module):
    def __init__(
        self,
        in_planes: int,
        rows: int,
        cols: int,
        grid_nr: int = 64,
        grid_na: int = 64,
        embed_dim: int = 64,
        with_backbone: bool = True,
        with_adapter: bool = True,
    ):
        super().__init__()
        if rows % 4 or cols % 4:
            raise ConfigError("input geometry must be divisible by 4")
        if grid_nr % (rows // 4):
            raise ConfigError("detection grid rows must be a multiple of rows/4")
        self.rows, self.cols = rows, cols
        self.grid_nr, self.grid_na = grid_nr, grid_na
        self.fused_hw = (rows // 4, cols // 4)
        self.with_backbone = with_backbone
        self.with_adapter = with_adapter

        if with_backbone:
            self.pre = nn.Conv2d(in_planes, 32, 1)
            self.stage1 = _down_stage(32, 64)
            self.stage2 = _down_stage(64, 128)
            self.stage3 = _down_stage(128, 192)
            self.lat2 = nn.Conv2d(128, _FUSED_CH, 1)
            self.lat3 = nn.Conv2d(192, _FUSED_CH, 1)
        if with_adapter:
            self.adapter = nn.Linear(embed_dim, _FUSED_CH * _ADAPTER_HW * _ADAPTER_HW)

        mix_ch = 32
        self.mix = nn.Conv2d(_FUSED_CH, mix_ch, 1)
        ra_ch = 16
        self.ra_ch = ra_ch
        self.range_angle = nn.Linear(mix_ch * self.fused_hw[1], ra_ch * grid_na)
        self.head = nn.Sequential(
            nn.Conv2d(ra_ch, 32, 3, padding=1), nn.BatchNorm2d(32), nn.ReLU(), ResidualBlock(32)
        )
        self.cls_head = nn.Conv2d(32, 1, 3, padding=1)
        self.reg_head = nn.Conv2d(32, 2, 3, padding=1)
        self.seg_head = nn.Sequential(
            nn.Conv2d(32, 16, 3, padding=1), nn.ReLU(), nn.Conv2d(16, 1, 3, padding=1)
        )
        # Rare-positive prior keeps early focal loss stable.
        nn.init.constant_(self.cls_head.bias, -4.0)

    def backbone_features(self, x):
        c1 = self.stage1(self.pre(x))
        c2 = self.stage2(c1)
        c3 = self.stage3(c2)
        return self.lat2(c2) + F.interpolate(self.lat3(c3), scale_factor=2, mode="nearest")

    def adapter_map(self, emb):
        flat = self.adapter(emb)
        fmap = flat.view(-1, _FUSED_CH, _ADAPTER_HW, _ADAPTER_HW)
        return F.interpolate(fmap, size=self.fused_hw, mode="nearest")

    def forward(self, x, emb=None):
        if self.with_backbone:
            fused = self.backbone_features(x)
            if self.with_adapter and emb is not None:
                fused = fused + self.adapter_map(emb)
        else:
            if emb is None:
                raise ConfigError("backbone-free variant requires a student embedding")
            fused = self.adapter_map(emb)
        g = torch.relu(self.mix(fused))  # (B, 32, R/4, C/4)
        b, ch, fr, fc = g.shape
        g = g.permute(0, 2, 1, 3).reshape(b, fr, ch * fc)
        g = self.range_angle(g).view(b, fr, self.ra_ch, self.grid_na).permute(0, 2, 1, 3)
        if fr != self.grid_nr:
            g = F.interpolate(g, size=(self.grid_nr, self.grid_na), mode="nearest")
        h = self.head(g)
        cls_logits = self.cls_head(h)[:, 0]
        reg = self.reg_head(h)
        seg_logits = self.seg_head(h)[:, 0]
        y_class = torch.sigmoid(cls_logits).clamp(_PROB_EPS, 1.0 - _PROB_EPS)
        y_seg = torch.sigmoid(seg_logits).clamp(_PROB_EPS, 1.0 - _PROB_EPS)
        return y_class, reg, y_seg


@dataclass
class DetectorModel:
    variant: str
    net: RadarDetectorNet
    grid: GridConfig
    mode: str
    in_planes: int
    rows: int
    cols: int
    embed_dim: int
    student: StudentModel | None = None

    def current_hash(self) -> str:
        return param_hash(self.net)

    @property
    def needs_embedding(self) -> bool:
        return self.variant != "baseline"


def build_detector(
    variant: str,
    grid: GridConfig,
    in_planes: int,
    rows: int,
    cols: int,
    embed_dim: int = 64,
    mode: str = "range_doppler",
    student: StudentModel | None = None,
    seed: int = 0,
) -> DetectorModel:
    if variant not in DETECTOR_VARIANTS:
        raise ConfigError(f"unknown detector variant {variant!r}")
    if variant != "baseline" and student is None:
        raise ConfigError(f"variant {variant!r} requires a student encoder")
    torch.manual_seed(seed)
    net = RadarDetectorNet(
        in_planes,
        rows,
        cols,
        grid_nr=grid.n_range,
        grid_na=grid.n_azimuth,
        embed_dim=embed_dim,
        with_backbone=not variant.startswith("only_"),
        with_adapter=variant != "baseline",
    )
    if variant in ("finetuned_enc", "only_finetuned_enc") and student is not None:
        student = copy.deepcopy(student)  # the original stays frozen for other consumers
    return DetectorModel(
        variant=variant,
        net=net,
        grid=grid,
        mode=mode,
        in_planes=in_planes,
        rows=rows,
        cols=cols,
        embed_dim=embed_dim,
        student=student,
    )


def adapter_apply(net: RadarDetectorNet, embedding) -> torch.Tensor:
    """Project an embedding through the adapter branch onto the fused map shape."""
    if not net.with_adapter:
        raise ConfigError("model has no adapter branch")
    emb = torch.as_tensor(np.asarray(embedding), dtype=torch.float32)
    single = emb.ndim == 1
    if single:
        emb = emb.unsqueeze(0)
    out = net.adapter_map(emb)
    return out[0] if single else out


def forward(model: DetectorModel, view, student_emb=None) -> DetectionOutput:
    """Single-frame forward pass; `student_emb` is ignored by the baseline."""
    x = torch.as_tensor(np.asarray(view), dtype=torch.float32)
    if tuple(x.shape) != (model.in_planes, model.rows, model.cols):
        raise InputError(
            f"view shape {tuple(x.shape)} does not match detector geometry "
            f"({model.in_planes}, {model.rows}, {model.cols})"
        )
    emb = None
    if model.needs_embedding:
        if student_emb is None:
            raise ConfigError(f"variant {model.variant!r} requires a student embedding")
        emb = torch.as_tensor(np.asarray(student_emb), dtype=torch.float32).unsqueeze(0)
    model.net.eval()
    with torch.no_grad():
        y_class, y_reg, y_seg = model.net(x.unsqueeze(0), emb)
    return DetectionOutput(y_class=y_class[0], y_reg=y_reg[0], y_seg=y_seg[0])


def save_detector(model: DetectorModel, out_dir, extra_meta=None) -> None:
    meta = {
        "kind": "detector",
        "variant": model.variant,
        "mode": model.mode,
        "in_planes": model.in_planes,
        "rows": model.rows,
        "cols": model.cols,
        "embed_dim": model.embed_dim,
        "grid": {
            "n_range": model.grid.n_range,
            "n_azimuth": model.grid.n_azimuth,
            "range_extent_m": model.grid.range_extent_m,
            "fov_deg": model.grid.fov_deg,
            "seg_n_range": model.grid.seg_n_range,
            "seg_n_azimuth": model.grid.seg_n_azimuth,
        },
        "param_hash": param_hash(model.net),
        "student_hash": model.student.current_hash() if model.student else None,
    }
    meta.update(extra_meta or {})
    save_checkpoint(out_dir, model.net, meta)
    if model.student is not None:
        from ..student.models import save_student

        save_student(model.student, str(out_dir) + "/student")


def load_detector(ckpt_dir, student: StudentModel | None = None) -> DetectorModel:
    from pathlib import Path

    meta = load_meta(ckpt_dir)
    grid = GridConfig(**meta["grid"])
    if student is None and meta["student_hash"]:
        from ..student.models import load_student

        student = load_student(Path(ckpt_dir) / "student")
    net = RadarDetectorNet(
        meta["in_planes"],
        meta["rows"],
        meta["cols"],
        grid_nr=grid.n_range,
        grid_na=grid.n_azimuth,
        embed_dim=meta["embed_dim"],
        with_backbone=not meta["variant"].startswith("only_"),
        with_adapter=meta["variant"] != "baseline",
    )
    net.load_state_dict(load_state(ckpt_dir))
    net.eval()
    model = DetectorModel(
        variant=meta["variant"],
        net=net,
        grid=grid,
        mode=meta["mode"],
        in_planes=meta["in_planes"],
        rows=meta["rows"],
        cols=meta["cols"],
        embed_dim=meta["embed_dim"],
        student=student,
    )
    if model.current_hash() != meta["param_hash"]:
        from ..errors import IntegrityError

        raise IntegrityError("detector checkpoint hash mismatch")
    return model
