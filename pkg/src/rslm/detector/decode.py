"""Peak decoding: class-grid local maxima to continuous detections."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..configs import GridConfig
from ..datagen.groundtruth import cell_center
from ..errors import InputError


@dataclass(frozen=True)
class Detection:
    range_m: float
    azimuth_deg: float
    score: float


def decode_detections(out, grid: GridConfig, score_thresh: float, nms_radius_cells: int):
    """Local maxima of the class grid above threshold, greedily suppressed
    within a Chebyshev radius; coordinates are cell centers plus offsets."""
    if not (0.0 < score_thresh < 1.0):
        raise InputError("score_thresh must lie in (0, 1)")
    if nms_radius_cells < 1:
        raise InputError("nms_radius_cells must be >= 1")
    p = np.asarray(out.y_class if hasattr(out, "y_class") else out[0], dtype=np.float64)
    reg = np.asarray(out.y_reg if hasattr(out, "y_reg") else out[1], dtype=np.float64)
    nr, na = p.shape

    padded = np.full((nr + 2, na + 2), -np.inf)
    padded[1:-1, 1:-1] = p
    local_max = np.ones_like(p, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            local_max &= p >= padded[1 + di : 1 + di + nr, 1 + dj : 1 + dj + na]
    candidates = np.argwhere(local_max & (p > score_thresh))
    order = sorted(range(len(candidates)), key=lambda k: (-p[tuple(candidates[k])], k))

    detections = []
    suppressed = np.zeros_like(p, dtype=bool)
    for k in order:
        i, j = map(int, candidates[k])
        if suppressed[i, j]:
            continue
        lo_i, hi_i = max(i - nms_radius_cells, 0), min(i + nms_radius_cells + 1, nr)
        lo_j, hi_j = max(j - nms_radius_cells, 0), min(j + nms_radius_cells + 1, na)
        suppressed[lo_i:hi_i, lo_j:hi_j] = True
        cr, ca = cell_center(i, j, grid)
        r = float(np.clip(cr + reg[0, i, j], 0.1, grid.range_extent_m - 1e-6))
        az = float(np.clip(ca + reg[1, i, j], -grid.fov_deg / 2, grid.fov_deg / 2))
        detections.append(Detection(range_m=r, azimuth_deg=az, score=float(p[i, j])))
    detections.sort(key=lambda d: -d.score)
    return detections
