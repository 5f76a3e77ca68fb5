"""Cartesian bird's-eye renders of ground-truth vs predicted free space:
red = ground truth only, green = prediction only, yellow = agreement."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch
from PIL import Image

from ..configs import GridConfig

COLOR_BG = (20, 20, 24)
COLOR_GT_ONLY = (220, 40, 40)
COLOR_PRED_ONLY = (40, 200, 60)
COLOR_BOTH = (235, 220, 60)


def freespace_overlay(gt_mask: np.ndarray, pred_mask: np.ndarray, grid: GridConfig, size=256):
    """Rasterize two polar masks into one Cartesian BEV image (no anti-aliasing)."""
    extent = grid.range_extent_m
    rows = np.arange(size)[:, None] + 0.5
    cols = np.arange(size)[None, :] + 0.5
    x = (cols / size) * 2.0 * extent - extent
    y = (1.0 - rows / size) * extent
    r = np.hypot(x, y)
    az = np.degrees(np.arctan2(x, y))
    nr, na = gt_mask.shape
    valid = (r < extent) & (np.abs(az) <= grid.fov_deg / 2.0)
    ri = np.clip((r / extent * nr).astype(int), 0, nr - 1)
    ai = np.clip(((az + grid.fov_deg / 2.0) / grid.fov_deg * na).astype(int), 0, na - 1)

    img = np.empty((size, size, 3), dtype=np.uint8)
    img[:] = COLOR_BG
    gt = np.zeros((size, size), dtype=bool)
    pred = np.zeros((size, size), dtype=bool)
    gt[valid] = gt_mask[ri[valid], ai[valid]]
    pred[valid] = pred_mask[ri[valid], ai[valid]]
    img[gt & ~pred] = COLOR_GT_ONLY
    img[pred & ~gt] = COLOR_PRED_ONLY
    img[gt & pred] = COLOR_BOTH
    return img


def emit_plots(detector, dataset, stats, out_dir, max_frames=4, split="test") -> list:
    """Write one overlay PNG per sample; deterministic bytes for a fixed run."""
    from ..student.models import encode_views_batched
    from ..student.view import spectrum_to_planes, standardize_planes

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    frames = dataset.frames(split)[:max_frames]
    written = []
    for frame in frames:
        view = standardize_planes(spectrum_to_planes(frame.spectrum()), stats)
        x = torch.from_numpy(view).unsqueeze(0)
        emb = None
        if detector.needs_embedding:
            emb = encode_views_batched(detector.student, x)
        detector.net.eval()
        with torch.no_grad():
            _, _, y_seg = detector.net(x, emb)
        gt = frame.ground_truth()
        img = freespace_overlay(
            gt.y_seg.astype(bool), y_seg[0].numpy() >= 0.5, detector.grid
        )
        path = out / f"freespace_{frame.frame_id}.png"
        Image.fromarray(img, mode="RGB").save(path, format="PNG")
        written.append(path)
    return written
