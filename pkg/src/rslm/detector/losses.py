"""Detection and segmentation losses.

Detection: focal loss summed over the class grid plus a smooth-L1 term on
regression offsets, masked to positive cells. Segmentation: binary cross
entropy summed over all cells. Total: detection + seg_weight * segmentation.
Predictions are probabilities already clamped away from {0, 1}.
"""

from __future__ import annotations

import torch

from ..configs import LossConfig
from ..errors import InputError


def _as_tensor(x):
    return x if torch.is_tensor(x) else torch.as_tensor(x, dtype=torch.float32)


def focal_sum(y_true, p_pred, alpha: float, gamma: float) -> torch.Tensor:
    """Focal loss summed over all cells; alpha weights positives."""
    y = _as_tensor(y_true).to(p_pred.dtype if torch.is_tensor(p_pred) else torch.float32)
    p = _as_tensor(p_pred)
    if y.shape != p.shape:
        raise InputError(f"class grids differ: {tuple(y.shape)} vs {tuple(p.shape)}")
    pos = alpha * (1.0 - p) ** gamma * (-torch.log(p))
    neg = (1.0 - alpha) * p**gamma * (-torch.log(1.0 - p))
    return torch.where(y > 0.5, pos, neg).sum()


def smooth_l1(x) -> torch.Tensor:
    """Elementwise smooth-L1 with transition at 1, summed."""
    x = _as_tensor(x)
    absx = x.abs()
    return torch.where(absx < 1.0, 0.5 * x * x, absx - 0.5).sum()


def detection_loss(out, targets, cfg: LossConfig) -> torch.Tensor:
    y_class = _as_tensor(targets["y_class"])
    y_reg = _as_tensor(targets["y_reg"])
    p = _as_tensor(out.y_class if hasattr(out, "y_class") else out[0])
    reg = _as_tensor(out.y_reg if hasattr(out, "y_reg") else out[1])
    if y_reg.shape != reg.shape:
        raise InputError(f"regression grids differ: {tuple(y_reg.shape)} vs {tuple(reg.shape)}")
    focal = focal_sum(y_class, p, cfg.focal_alpha, cfg.focal_gamma)
    mask = (y_class > 0.5).to(reg.dtype)
    # Mask has no channel axis; broadcast over the two offset components.
    diff = (y_reg - reg) * mask.unsqueeze(-3)
    return focal + cfg.reg_weight * smooth_l1(diff)


def segmentation_loss(out, targets) -> torch.Tensor:
    y = _as_tensor(targets["y_seg"])
    p = _as_tensor(out.y_seg if hasattr(out, "y_seg") else out[2])
    if y.shape != p.shape:
        raise InputError(f"seg grids differ: {tuple(y.shape)} vs {tuple(p.shape)}")
    y = y.to(p.dtype)
    return (-(y * torch.log(p) + (1.0 - y) * torch.log(1.0 - p))).sum()


def total_loss(out, targets, cfg: LossConfig) -> torch.Tensor:
    return detection_loss(out, targets, cfg) + cfg.seg_weight * segmentation_loss(out, targets)
