"""Bird's-eye camera proxy: a small polar raster standing in for the RGB
image paired with each spectrum."""

from __future__ import annotations

import numpy as np

from ..errors import InputError
from .scene import Scene

BACKGROUND_COLOR = (0.08, 0.08, 0.10)
ROAD_COLOR = (0.35, 0.35, 0.38)
CATEGORY_COLORS = {
    "car": (0.90, 0.20, 0.20),
    "truck": (0.20, 0.40, 0.90),
    "pedestrian": (0.95, 0.85, 0.10),
    "cyclist": (0.20, 0.85, 0.30),
}
# Disc radius in pixels; proportional to physical footprint.
CATEGORY_RADIUS_PX = {"car": 2.8, "truck": 3.5, "pedestrian": 1.0, "cyclist": 1.5}


def render_camera_proxy(scene: Scene, size: int = 64) -> np.ndarray:
    """Render a (size, size, 3) float image in [0, 1]: rows are range bins,
    columns azimuth bins, free space in road color, objects as filled discs."""
    if scene.freespace is None:
        raise InputError("scene has no freespace grid")
    img = np.empty((size, size, 3), dtype=np.float64)
    img[:] = BACKGROUND_COLOR

    # Majority-vote downsample of the native freespace grid onto the image raster.
    nr, na = scene.freespace.shape
    if nr % size or na % size:
        raise InputError("freespace grid not divisible by image size")
    fr, fa = nr // size, na // size
    blocks = scene.freespace.reshape(size, fr, size, fa).mean(axis=(1, 3))
    img[blocks >= 0.5] = ROAD_COLOR

    rows = np.arange(size)[:, None]
    cols = np.arange(size)[None, :]
    # Draw far objects first so near ones paint on top.
    for obj in sorted(scene.objects, key=lambda o: (-o.range_m, o.azimuth_deg)):
        r_px = obj.range_m / scene.range_extent_m * size
        c_px = (obj.azimuth_deg + scene.fov_deg / 2.0) / scene.fov_deg * size
        radius = CATEGORY_RADIUS_PX[obj.category]
        mask = (rows + 0.5 - r_px) ** 2 + (cols + 0.5 - c_px) ** 2 <= radius**2
        img[mask] = CATEGORY_COLORS[obj.category]
    return img
