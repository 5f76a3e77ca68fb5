"""Configuration dataclasses for every pipeline stage.

A run is identified by the hash of its canonical config serialization;
`out_dir` and stage toggles are excluded from identity so the same
experiment relocated on disk reuses its cached artifacts.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from .errors import ConfigError
from .hashing import config_hash

CATEGORIES = ("car", "pedestrian", "cyclist", "truck")
LAYOUTS = ("open_road", "urban_street", "parking_lot")
DETECTOR_VARIANTS = (
    "baseline",
    "frozen_enc",
    "finetuned_enc",
    "only_frozen_enc",
    "only_finetuned_enc",
    "from_scratch",
)

# Per-category velocity caps (m/s); scene-wide cap is 12.
MAX_SPEED = {"car": 12.0, "truck": 12.0, "pedestrian": 3.0, "cyclist": 8.0}

RANGE_MIN_M = 1.0
RANGE_MAX_M = 100.0
AZIMUTH_MAX_DEG = 60.0
MIN_OBJECT_SEPARATION_M = 2.0


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridConfig:
    """Coarse output grids: detection grid (R' x A') and segmentation grid."""

    n_range: int = 64
    n_azimuth: int = 64
    range_extent_m: float = 102.4
    fov_deg: float = 120.0
    seg_n_range: int = 64
    seg_n_azimuth: int = 64

    def __post_init__(self):
        for name in ("n_range", "n_azimuth", "seg_n_range", "seg_n_azimuth"):
            if getattr(self, name) < 1:
                raise ConfigError(f"grid.{name} must be >= 1")
        if self.range_extent_m <= RANGE_MAX_M:
            raise ConfigError("grid.range_extent_m must exceed the max object range")

    @property
    def cell_range_m(self) -> float:
        return self.range_extent_m / self.n_range

    @property
    def cell_azimuth_deg(self) -> float:
        return self.fov_deg / self.n_azimuth


@dataclass(frozen=True)
class DataConfig:
    n_frames: int = 2000
    min_objects: int = 0
    max_objects: int = 6
    captions_per_frame: int = 4
    image_size: int = 64
    # Native polar occupancy grid; must be an integer multiple of the seg grid.
    freespace_n_range: int = 128
    freespace_n_azimuth: int = 128
    grid: GridConfig = field(default_factory=GridConfig)

    def __post_init__(self):
        if self.n_frames < 1:
            raise ConfigError("data.n_frames must be >= 1")
        if self.min_objects > self.max_objects:
            raise ConfigError("data.min_objects exceeds max_objects")
        if not (0 <= self.min_objects and self.max_objects <= 6):
            raise ConfigError("data.object counts must lie in [0, 6]")
        if self.captions_per_frame < 1:
            raise ConfigError("data.captions_per_frame must be >= 1")
        if (
            self.freespace_n_range % self.grid.seg_n_range
            or self.freespace_n_azimuth % self.grid.seg_n_azimuth
        ):
            raise ConfigError("freespace grid must be a multiple of the seg grid")


@dataclass(frozen=True)
class RadarConfig:
    n_range: int = 128
    n_doppler: int = 64
    n_channels: int = 8
    n_azimuth_bins: int = 128
    range_res: float = 0.8
    doppler_res: float = 0.4
    antenna_spacing_ratio: float = 0.5
    noise_sigma: float = 0.5
    fov_deg: float = 120.0

    def __post_init__(self):
        for name in ("n_range", "n_doppler", "n_channels", "n_azimuth_bins"):
            if not _is_pow2(getattr(self, name)):
                raise ConfigError(f"radar.{name} must be a power of two")
        if self.range_res * self.n_range < RANGE_MAX_M:
            raise ConfigError("radar range extent smaller than max scene range")
        if self.doppler_res * self.n_doppler / 2.0 < 12.0:
            raise ConfigError("radar velocity extent smaller than max scene speed")
        if self.noise_sigma < 0:
            raise ConfigError("radar.noise_sigma must be >= 0")

    @property
    def max_range_m(self) -> float:
        return self.range_res * self.n_range

    @property
    def max_speed_mps(self) -> float:
        return self.doppler_res * self.n_doppler / 2.0


@dataclass(frozen=True)
class TeacherConfig:
    embed_dim: int = 64
    vocab_size: int = 4096
    epochs: int = 90
    batch_size: int = 64
    lr: float = 1e-3
    init_temperature: float = 0.07
    eval_batch: int = 64

    def __post_init__(self):
        if self.embed_dim < 1 or self.vocab_size < 1:
            raise ConfigError("teacher dims must be positive")
        if self.init_temperature <= 0:
            raise ConfigError("teacher.init_temperature must be > 0")
        if self.epochs < 0:
            raise ConfigError("teacher.epochs must be >= 0")


@dataclass(frozen=True)
class StudentConfig:
    variant: str = "fpn"
    epochs: int = 8
    batch_size: int = 16
    lr: float = 1e-3
    patience: int = 3

    def __post_init__(self):
        if self.variant not in ("cnn", "fpn"):
            raise ConfigError(f"unknown student variant {self.variant!r}")
        if self.epochs < 0:
            raise ConfigError("student.epochs must be >= 0")


@dataclass(frozen=True)
class LossConfig:
    seg_weight: float = 1.0
    reg_weight: float = 1.0
    focal_alpha: float = 0.25
    focal_gamma: float = 2.0

    def __post_init__(self):
        if self.seg_weight <= 0:
            raise ConfigError("loss.seg_weight must be > 0")
        if self.reg_weight <= 0:
            raise ConfigError("loss.reg_weight must be > 0")


@dataclass(frozen=True)
class DetectorConfig:
    variant: str = "frozen_enc"
    epochs: int = 14
    batch_size: int = 16
    lr: float = 1e-3
    finetune_last_epochs: int = 10
    max_train_frames: int = 0  # 0 = use the whole train split
    score_thresh: float = 0.5
    nms_radius_cells: int = 2
    loss: LossConfig = field(default_factory=LossConfig)

    def __post_init__(self):
        if self.variant not in DETECTOR_VARIANTS:
            raise ConfigError(f"unknown detector variant {self.variant!r}")
        if self.epochs < 0:
            raise ConfigError("detector.epochs must be >= 0")
        if not (0 < self.score_thresh < 1):
            raise ConfigError("detector.score_thresh must lie in (0, 1)")
        if self.nms_radius_cells < 1:
            raise ConfigError("detector.nms_radius_cells must be >= 1")


@dataclass(frozen=True)
class EvalConfig:
    dist_thresholds_m: tuple = (1.0, 2.0, 4.0)
    operating_score: float = 0.5
    retrieval_k: int = 10
    index_split: str = "test"
    decode_score_thresh: float = 0.05

    def __post_init__(self):
        if any(t <= 0 for t in self.dist_thresholds_m):
            raise ConfigError("eval.dist_thresholds_m must be positive")
        if self.index_split not in ("train", "val", "test", "all"):
            raise ConfigError(f"unknown index split {self.index_split!r}")
        if not (0 < self.decode_score_thresh < 1):
            raise ConfigError("eval.decode_score_thresh must lie in (0, 1)")


@dataclass(frozen=True)
class RunConfig:
    global_seed: int = 0
    data: DataConfig = field(default_factory=DataConfig)
    radar: RadarConfig = field(default_factory=RadarConfig)
    teacher: TeacherConfig = field(default_factory=TeacherConfig)
    student: StudentConfig = field(default_factory=StudentConfig)
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    out_dir: str = ""
    stages: tuple = (
        "gen-data",
        "train-vlm",
        "train-student",
        "build-index",
        "train-detector",
        "evaluate",
    )

    def identity_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("out_dir")
        d.pop("stages")
        return d

    def hash(self) -> str:
        return config_hash(self.identity_dict())


def _from_dict(cls, d: dict):
    if not isinstance(d, dict):
        raise ConfigError(f"expected object for {cls.__name__}, got {type(d).__name__}")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in d.items():
        if key not in fields:
            raise ConfigError(f"unknown {cls.__name__} field {key!r}")
        ftype = fields[key].type
        if key == "grid":
            value = _from_dict(GridConfig, value)
        elif key == "loss":
            value = _from_dict(LossConfig, value)
        elif isinstance(value, list):
            value = tuple(value)
        del ftype
        kwargs[key] = value
    return cls(**kwargs)


def run_config_from_dict(d: dict) -> RunConfig:
    d = dict(d)
    sub = {
        "data": DataConfig,
        "radar": RadarConfig,
        "teacher": TeacherConfig,
        "student": StudentConfig,
        "detector": DetectorConfig,
        "eval": EvalConfig,
    }
    kwargs = {}
    for key, value in d.items():
        if key in sub:
            kwargs[key] = _from_dict(sub[key], value)
        elif key == "stages":
            kwargs[key] = tuple(value)
        elif key in ("global_seed", "out_dir"):
            kwargs[key] = value
        else:
            raise ConfigError(f"unknown RunConfig field {key!r}")
    return RunConfig(**kwargs)
