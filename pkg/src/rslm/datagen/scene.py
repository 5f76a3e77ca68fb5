"""Synthetic automotive scene model.

A scene is a set of point-like road users in polar coordinates plus a
polar occupancy grid of drivable free space. Layouts bias the category
mix, speeds and ranges; free space is the layout's drivable region minus
object footprints and the radar shadows they cast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..configs import (
    AZIMUTH_MAX_DEG,
    CATEGORIES,
    LAYOUTS,
    MAX_SPEED,
    MIN_OBJECT_SEPARATION_M,
    RANGE_MAX_M,
    RANGE_MIN_M,
    DataConfig,
)
from ..errors import ConfigError, InputError

# Physical footprint radius (m) used for occupancy and shadowing.
FOOTPRINT_M = {"car": 2.2, "truck": 3.2, "pedestrian": 0.6, "cyclist": 0.9}

# Layout-specific generation bounds.
_LAYOUT = {
    "open_road": {
        "count": (1, 3),
        "range": (5.0, 88.0),
        "free_range_m": 90.0,
        "category_probs": {"car": 0.7, "truck": 0.3},
        "speed": {"car": (5.0, 12.0), "truck": (5.0, 11.0)},
    },
    "urban_street": {
        "count": (1, 6),
        "range": (2.0, 65.0),
        "free_range_m": 70.0,
        "category_probs": {"car": 0.4, "pedestrian": 0.25, "cyclist": 0.25, "truck": 0.1},
        "speed": {
            "car": (1.0, 6.0),
            "truck": (1.0, 6.0),
            "pedestrian": (0.2, 2.5),
            "cyclist": (1.0, 6.5),
        },
    },
    "parking_lot": {
        "count": (2, 6),
        "range": (2.0, 50.0),
        "free_range_m": 55.0,
        "category_probs": {"car": 0.85, "truck": 0.1, "pedestrian": 0.05},
        "speed": {"car": (0.0, 0.8), "truck": (0.0, 0.8), "pedestrian": (0.0, 0.8)},
    },
}

_RCS_RANGE = {
    "car": (12.0, 18.0),
    "truck": (22.0, 28.0),
    "pedestrian": (-8.0, -2.0),
    "cyclist": (0.0, 5.0),
}

# Keep sampled azimuths strictly inside the grid so binning never overflows.
_AZIMUTH_SAMPLE_MAX = 58.0

# Minimum Chebyshev distance between object cells on the detection grid;
# keeps every object recoverable under peak decoding with NMS radius 2.
_MIN_CELL_SEPARATION = 3


@dataclass(frozen=True)
class SceneObject:
    category: str
    range_m: float
    azimuth_deg: float
    radial_velocity_mps: float
    rcs_dbsm: float

    def to_dict(self) -> dict:
        return {
            "category": self.category,
            "range_m": self.range_m,
            "azimuth_deg": self.azimuth_deg,
            "radial_velocity_mps": self.radial_velocity_mps,
            "rcs_dbsm": self.rcs_dbsm,
        }


@dataclass
class Scene:
    frame_id: str
    seed: int
    layout: str
    objects: list = field(default_factory=list)
    # True = drivable free space; shape (freespace_n_range, freespace_n_azimuth),
    # rows span [0, range_extent_m), columns span [-fov/2, fov/2).
    freespace: np.ndarray = None
    range_extent_m: float = 102.4
    fov_deg: float = 120.0

    def to_dict(self) -> dict:
        return {
            "frame_id": self.frame_id,
            "seed": self.seed,
            "layout": self.layout,
            "objects": [o.to_dict() for o in self.objects],
            "range_extent_m": self.range_extent_m,
            "fov_deg": self.fov_deg,
            "freespace": pack_bool_grid(self.freespace),
        }

    @staticmethod
    def from_dict(d: dict) -> "Scene":
        return Scene(
            frame_id=d["frame_id"],
            seed=d["seed"],
            layout=d["layout"],
            objects=[SceneObject(**o) for o in d["objects"]],
            freespace=unpack_bool_grid(d["freespace"]),
            range_extent_m=d["range_extent_m"],
            fov_deg=d["fov_deg"],
        )


def pack_bool_grid(grid: np.ndarray) -> list:
    return ["".join("1" if v else "0" for v in row) for row in grid]


def unpack_bool_grid(rows: list) -> np.ndarray:
    return np.array([[c == "1" for c in row] for row in rows], dtype=bool)


def polar_to_xy(range_m, azimuth_deg):
    az = np.radians(azimuth_deg)
    return range_m * np.sin(az), range_m * np.cos(az)


def cartesian_distance(a: SceneObject, b: SceneObject) -> float:
    ax, ay = polar_to_xy(a.range_m, a.azimuth_deg)
    bx, by = polar_to_xy(b.range_m, b.azimuth_deg)
    return math.hypot(ax - bx, ay - by)


def detection_cell(range_m, azimuth_deg, grid) -> tuple:
    """Coarse detection-grid cell of a polar position."""
    i = int(range_m / grid.cell_range_m)
    j = int((azimuth_deg + grid.fov_deg / 2.0) / grid.cell_azimuth_deg)
    return i, j


def _freespace_cell(range_m, azimuth_deg, n_range, n_azimuth, range_extent, fov):
    i = min(int(range_m / (range_extent / n_range)), n_range - 1)
    j = min(int((azimuth_deg + fov / 2.0) / (fov / n_azimuth)), n_azimuth - 1)
    return i, j


def _build_freespace(layout, objects, cfg: DataConfig, radar_extent_m=102.4, fov_deg=120.0):
    nr, na = cfg.freespace_n_range, cfg.freespace_n_azimuth
    dr = radar_extent_m / nr
    daz = fov_deg / na
    r_centers = (np.arange(nr) + 0.5) * dr
    az_centers = -fov_deg / 2.0 + (np.arange(na) + 0.5) * daz

    free = np.zeros((nr, na), dtype=bool)
    free[r_centers < _LAYOUT[layout]["free_range_m"], :] = True

    if objects:
        r_grid = r_centers[:, None]
        az_grid = az_centers[None, :]
        for obj in objects:
            radius = FOOTPRINT_M[obj.category]
            d2 = (
                r_grid**2
                + obj.range_m**2
                - 2.0 * r_grid * obj.range_m * np.cos(np.radians(az_grid - obj.azimuth_deg))
            )
            free[d2 <= radius**2] = False
            # Radar shadow: occluded cells behind the object.
            half_width = math.degrees(math.asin(min(radius / obj.range_m, 0.999)))
            shadow = (r_grid[:, 0] > obj.range_m)[:, None] & (
                np.abs(az_grid - obj.azimuth_deg) <= half_width
            )
            free[shadow] = False
            i, j = _freespace_cell(obj.range_m, obj.azimuth_deg, nr, na, radar_extent_m, fov_deg)
            free[i, j] = False
    return free


def generate_scene(seed: int, cfg: DataConfig, frame_id: str | None = None) -> Scene:
    """Deterministically sample a Scene; identical (seed, cfg) yields identical output."""
    if not isinstance(cfg, DataConfig):
        raise ConfigError("generate_scene requires a DataConfig")
    rng = np.random.default_rng(seed)
    layout = LAYOUTS[int(rng.integers(0, len(LAYOUTS)))]
    spec = _LAYOUT[layout]

    lo = min(max(spec["count"][0], cfg.min_objects), cfg.max_objects)
    hi = max(min(spec["count"][1], cfg.max_objects), cfg.min_objects)
    count = int(rng.integers(lo, hi + 1))

    grid = cfg.grid
    cats = sorted(spec["category_probs"])
    probs = np.array([spec["category_probs"][c] for c in cats])
    probs = probs / probs.sum()

    objects: list[SceneObject] = []
    used_cells = set()
    for _ in range(count):
        for _attempt in range(500):
            category = cats[int(rng.choice(len(cats), p=probs))]
            r = float(rng.uniform(*spec["range"]))
            az = float(rng.uniform(-_AZIMUTH_SAMPLE_MAX, _AZIMUTH_SAMPLE_MAX))
            lo_v, hi_v = spec["speed"][category]
            speed = float(rng.uniform(lo_v, min(hi_v, MAX_SPEED[category])))
            v = speed if rng.random() < 0.5 else -speed
            rcs = float(rng.uniform(*_RCS_RANGE[category]))
            candidate = SceneObject(category, r, az, v, rcs)
            cell = detection_cell(r, az, grid)
            if any(
                max(abs(cell[0] - c[0]), abs(cell[1] - c[1])) < _MIN_CELL_SEPARATION
                for c in used_cells
            ):
                continue
            if all(
                cartesian_distance(candidate, o) > MIN_OBJECT_SEPARATION_M for o in objects
            ):
                objects.append(candidate)
                used_cells.add(cell)
                break
        else:
            raise RuntimeError("could not place object after 500 attempts")

    objects.sort(key=lambda o: (o.range_m, o.azimuth_deg))
    freespace = _build_freespace(layout, objects, cfg)
    return Scene(
        frame_id=frame_id if frame_id is not None else f"{seed & 0xFFFFFFFF:08x}",
        seed=seed,
        layout=layout,
        objects=objects,
        freespace=freespace,
    )


def validate_scene(scene: Scene, cfg: DataConfig | None = None) -> None:
    """Raise InputError on any violated Scene/SceneObject invariant."""
    if scene.layout not in LAYOUTS:
        raise InputError(f"unknown layout {scene.layout!r}")
    if len(scene.objects) > 6:
        raise InputError("more than 6 objects")
    for o in scene.objects:
        if o.category not in CATEGORIES:
            raise InputError(f"unknown category {o.category!r}")
        if not (RANGE_MIN_M <= o.range_m <= RANGE_MAX_M):
            raise InputError(f"range {o.range_m} outside [1, 100]")
        if not (-AZIMUTH_MAX_DEG <= o.azimuth_deg <= AZIMUTH_MAX_DEG):
            raise InputError(f"azimuth {o.azimuth_deg} outside [-60, 60]")
        if abs(o.radial_velocity_mps) > 12.0:
            raise InputError(f"speed {o.radial_velocity_mps} exceeds 12 m/s")
        if abs(o.radial_velocity_mps) > MAX_SPEED[o.category]:
            raise InputError(f"{o.category} speed exceeds {MAX_SPEED[o.category]} m/s")
    for i, a in enumerate(scene.objects):
        for b in scene.objects[i + 1 :]:
            if cartesian_distance(a, b) <= MIN_OBJECT_SEPARATION_M:
                raise InputError("objects closer than 2.0 m")
    if scene.freespace is None or scene.freespace.ndim != 2:
        raise InputError("freespace grid missing or not 2-D")
    nr, na = scene.freespace.shape
    for o in scene.objects:
        i, j = _freespace_cell(
            o.range_m, o.azimuth_deg, nr, na, scene.range_extent_m, scene.fov_deg
        )
        if scene.freespace[i, j]:
            raise InputError("freespace cell containing an object center is marked free")
