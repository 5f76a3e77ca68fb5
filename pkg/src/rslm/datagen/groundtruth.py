"""Coarse-grid ground truth: one-hot object cells, sub-cell offsets, and
the downsampled free-space mask."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..configs import GridConfig
from ..errors import InputError
from .scene import Scene


@dataclass
class GroundTruth:
    # (category, range_m, azimuth_deg) per object.
    centers: list
    y_class: np.ndarray  # (n_range, n_azimuth) uint8
    y_reg: np.ndarray  # (2, n_range, n_azimuth) float32; valid where y_class == 1
    y_seg: np.ndarray  # (seg_n_range, seg_n_azimuth) uint8
    presence: list  # sorted category names present in the frame

    def to_dict(self) -> dict:
        cells = np.argwhere(self.y_class == 1)
        return {
            "centers": [[c, float(r), float(a)] for c, r, a in self.centers],
            "grid_shape": list(self.y_class.shape),
            "cells": [
                {
                    "cell": [int(i), int(j)],
                    "offset": [float(self.y_reg[0, i, j]), float(self.y_reg[1, i, j])],
                }
                for i, j in cells
            ],
            "y_seg": ["".join("1" if v else "0" for v in row) for row in self.y_seg],
            "presence": list(self.presence),
        }

    @staticmethod
    def from_dict(d: dict) -> "GroundTruth":
        nr, na = d["grid_shape"]
        y_class = np.zeros((nr, na), dtype=np.uint8)
        y_reg = np.zeros((2, nr, na), dtype=np.float32)
        for cell in d["cells"]:
            i, j = cell["cell"]
            y_class[i, j] = 1
            y_reg[0, i, j], y_reg[1, i, j] = cell["offset"]
        y_seg = np.array([[ch == "1" for ch in row] for row in d["y_seg"]], dtype=np.uint8)
        return GroundTruth(
            centers=[(c, r, a) for c, r, a in d["centers"]],
            y_class=y_class,
            y_reg=y_reg,
            y_seg=y_seg,
            presence=list(d["presence"]),
        )


def object_cell(range_m: float, azimuth_deg: float, grid: GridConfig) -> tuple:
    i = int(np.floor(range_m / grid.cell_range_m))
    j = int(np.floor((azimuth_deg + grid.fov_deg / 2.0) / grid.cell_azimuth_deg))
    if not (0 <= i < grid.n_range and 0 <= j < grid.n_azimuth):
        raise InputError(
            f"object at ({range_m} m, {azimuth_deg} deg) falls outside the detection grid"
        )
    return i, j


def cell_center(i: int, j: int, grid: GridConfig) -> tuple:
    return (
        (i + 0.5) * grid.cell_range_m,
        -grid.fov_deg / 2.0 + (j + 0.5) * grid.cell_azimuth_deg,
    )


def downsample_majority(mask: np.ndarray, out_rows: int, out_cols: int) -> np.ndarray:
    """Majority-vote downsample; ties count as free."""
    nr, na = mask.shape
    if nr % out_rows or na % out_cols:
        raise InputError("mask shape not divisible by target grid")
    blocks = mask.reshape(out_rows, nr // out_rows, out_cols, na // out_cols)
    return (blocks.mean(axis=(1, 3)) >= 0.5).astype(np.uint8)


def derive_ground_truth(scene: Scene, grid: GridConfig) -> GroundTruth:
    y_class = np.zeros((grid.n_range, grid.n_azimuth), dtype=np.uint8)
    y_reg = np.zeros((2, grid.n_range, grid.n_azimuth), dtype=np.float32)
    centers = []
    for obj in scene.objects:
        i, j = object_cell(obj.range_m, obj.azimuth_deg, grid)
        if y_class[i, j]:
            raise InputError(f"two objects share detection cell ({i}, {j})")
        y_class[i, j] = 1
        cr, ca = cell_center(i, j, grid)
        y_reg[0, i, j] = obj.range_m - cr
        y_reg[1, i, j] = obj.azimuth_deg - ca
        centers.append((obj.category, obj.range_m, obj.azimuth_deg))
    y_seg = downsample_majority(scene.freespace, grid.seg_n_range, grid.seg_n_azimuth)
    presence = sorted({obj.category for obj in scene.objects})
    return GroundTruth(centers, y_class, y_reg, y_seg, presence)


def decode_cells(y_class: np.ndarray, y_reg: np.ndarray, grid: GridConfig) -> list:
    """Invert the encoding: continuous (range, azimuth) per marked cell."""
    out = []
    for i, j in np.argwhere(y_class == 1):
        cr, ca = cell_center(int(i), int(j), grid)
        out.append((cr + float(y_reg[0, i, j]), ca + float(y_reg[1, i, j])))
    return out
