"""Training targets: detection is single-category over car-like objects;
pedestrians and cyclists stay in the spectrum as clutter."""

from __future__ import annotations

import numpy as np

from ..configs import GridConfig
from ..datagen.groundtruth import GroundTruth, cell_center, object_cell

CARLIKE = ("car", "truck")


def detection_targets(gt: GroundTruth, grid: GridConfig, categories=CARLIKE) -> dict:
    y_class = np.zeros((grid.n_range, grid.n_azimuth), dtype=np.float32)
    y_reg = np.zeros((2, grid.n_range, grid.n_azimuth), dtype=np.float32)
    for category, r, az in gt.centers:
        if category not in categories:
            continue
        i, j = object_cell(r, az, grid)
        y_class[i, j] = 1.0
        cr, ca = cell_center(i, j, grid)
        y_reg[0, i, j] = r - cr
        y_reg[1, i, j] = az - ca
    return {
        "y_class": y_class,
        "y_reg": y_reg,
        "y_seg": gt.y_seg.astype(np.float32),
    }


def carlike_centers(gt: GroundTruth, categories=CARLIKE) -> list:
    return [(r, az) for category, r, az in gt.centers if category in categories]
