"""Spectrum views: complex channels split into real/imag planes and
standardized with training-split statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InputError
from ..radar.synth import Spectrum


@dataclass
class PlaneStats:
    mean: np.ndarray  # (2C,)
    std: np.ndarray  # (2C,)

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @staticmethod
    def from_dict(d: dict) -> "PlaneStats":
        return PlaneStats(np.asarray(d["mean"], float), np.asarray(d["std"], float))


def spectrum_to_planes(spectrum: Spectrum) -> np.ndarray:
    """(rows, cols, C) complex -> (2C, rows, cols) float32, planes interleaved
    as re(ch0), im(ch0), re(ch1), ..."""
    data = spectrum.data
    if data.ndim != 3:
        raise InputError(f"spectrum data must be 3-D, got {data.shape}")
    rows, cols, ch = data.shape
    planes = np.empty((2 * ch, rows, cols), dtype=np.float32)
    planes[0::2] = np.moveaxis(data.real, 2, 0)
    planes[1::2] = np.moveaxis(data.imag, 2, 0)
    return planes


def compute_plane_stats(plane_arrays) -> PlaneStats:
    """Per-plane mean/std accumulated in float64 over an iterable of views."""
    total = None
    total_sq = None
    count = 0
    n_planes = None
    for planes in plane_arrays:
        p = planes.astype(np.float64)
        if n_planes is None:
            n_planes = p.shape[0]
            total = np.zeros(n_planes)
            total_sq = np.zeros(n_planes)
        elif p.shape[0] != n_planes:
            raise InputError("inconsistent plane counts across frames")
        total += p.sum(axis=(1, 2))
        total_sq += (p**2).sum(axis=(1, 2))
        count += p.shape[1] * p.shape[2]
    if count == 0:
        raise InputError("no frames supplied for statistics")
    mean = total / count
    var = np.maximum(total_sq / count - mean**2, 0.0)
    std = np.maximum(np.sqrt(var), 1e-12)
    return PlaneStats(mean=mean, std=std)


def to_view(spectrum: Spectrum, stats: PlaneStats) -> np.ndarray:
    planes = spectrum_to_planes(spectrum)
    return standardize_planes(planes, stats)


def standardize_planes(planes: np.ndarray, stats: PlaneStats) -> np.ndarray:
    if planes.shape[0] != stats.mean.shape[0]:
        raise InputError(
            f"stats cover {stats.mean.shape[0]} planes but view has {planes.shape[0]}"
        )
    mean = stats.mean.astype(np.float32)[:, None, None]
    std = stats.std.astype(np.float32)[:, None, None]
    return (planes - mean) / std


def invert_view(view: np.ndarray, stats: PlaneStats) -> np.ndarray:
    if view.shape[0] != stats.mean.shape[0]:
        raise InputError("stats/plane mismatch")
    mean = stats.mean.astype(np.float32)[:, None, None]
    std = stats.std.astype(np.float32)[:, None, None]
    return view * std + mean
