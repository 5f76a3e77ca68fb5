"""On-disk dataset: one directory per frame plus a top-level manifest.

    frames/<id>/scene.json
    frames/<id>/caption_<k>.json
    frames/<id>/camera.png        8-bit RGB
    frames/<id>/gt.json
    frames/<id>/spectrum.rspc     binary spectrum (shared wire format)
    manifest.json                 config hash, seed, frame list, splits

Frame seeds are mixed from (global seed, frame index) so generation order
never affects content; split assignment hashes the frame index.
"""

from __future__ import annotations

import dataclasses
from pathlib import Path

import numpy as np
from PIL import Image

from .configs import DataConfig, RadarConfig
from .datagen.camera import render_camera_proxy
from .datagen.captions import Caption, generate_captions
from .datagen.groundtruth import GroundTruth, derive_ground_truth
from .datagen.scene import Scene, generate_scene
from .errors import FormatError
from .hashing import config_hash, mix_seed, read_json, splitmix64, write_json
from .radar.spectrum_io import read_spectrum, write_spectrum
from .radar.synth import synthesize_rd_spectrum

_SPLIT_SALT = 0x5EED5EED
_CAPTION_SALT = 1
_NOISE_SALT = 2

SPLITS = ("train", "val", "test")


def split_of_index(index: int) -> str:
    bucket = splitmix64(index ^ _SPLIT_SALT) % 100
    if bucket < 70:
        return "train"
    if bucket < 85:
        return "val"
    return "test"


def dataset_config_hash(data_cfg: DataConfig, radar_cfg: RadarConfig, global_seed: int) -> str:
    return config_hash(
        {
            "data": dataclasses.asdict(data_cfg),
            "radar": dataclasses.asdict(radar_cfg),
            "global_seed": global_seed,
        }
    )


def frame_id_for_index(index: int) -> str:
    return f"{index:06d}"


def generate_frame(data_cfg: DataConfig, radar_cfg: RadarConfig, global_seed: int, index: int):
    """Produce all per-frame artifacts in memory."""
    frame_seed = mix_seed(global_seed, index)
    scene = generate_scene(frame_seed, data_cfg, frame_id=frame_id_for_index(index))
    camera = render_camera_proxy(scene, data_cfg.image_size)
    captions = generate_captions(
        scene, data_cfg.captions_per_frame, seed=mix_seed(frame_seed, _CAPTION_SALT)
    )
    gt = derive_ground_truth(scene, data_cfg.grid)
    spectrum = synthesize_rd_spectrum(scene, radar_cfg, seed=mix_seed(frame_seed, _NOISE_SALT))
    return scene, camera, captions, gt, spectrum


def build_dataset(
    data_cfg: DataConfig, radar_cfg: RadarConfig, global_seed: int, out_dir, log=None
) -> Path:
    out = Path(out_dir)
    frames_dir = out / "frames"
    frames_dir.mkdir(parents=True, exist_ok=True)
    ids = []
    for index in range(data_cfg.n_frames):
        scene, camera, captions, gt, spectrum = generate_frame(
            data_cfg, radar_cfg, global_seed, index
        )
        fdir = frames_dir / scene.frame_id
        fdir.mkdir(exist_ok=True)
        write_json(fdir / "scene.json", scene.to_dict())
        for k, cap in enumerate(captions):
            write_json(fdir / f"caption_{k}.json", cap.to_dict())
        save_camera_png(camera, fdir / "camera.png")
        write_json(fdir / "gt.json", gt.to_dict())
        write_spectrum(spectrum, fdir / "spectrum.rspc")
        ids.append(scene.frame_id)
        if log and (index + 1) % 250 == 0:
            log(f"generated {index + 1}/{data_cfg.n_frames} frames")
    splits = {s: [] for s in SPLITS}
    for index, fid in enumerate(ids):
        splits[split_of_index(index)].append(fid)
    manifest = {
        "config_hash": dataset_config_hash(data_cfg, radar_cfg, global_seed),
        "global_seed": global_seed,
        "n_frames": data_cfg.n_frames,
        "captions_per_frame": data_cfg.captions_per_frame,
        "frames": ids,
        "splits": splits,
        "spectrum_mode": "range_doppler",
        "data": dataclasses.asdict(data_cfg),
        "radar": dataclasses.asdict(radar_cfg),
        "normalization": "per-plane standardization with train-split statistics",
    }
    write_json(out / "manifest.json", manifest)
    return out


def save_camera_png(camera: np.ndarray, path) -> None:
    arr = np.clip(np.round(camera * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(arr, mode="RGB").save(path, format="PNG")


def load_camera_png(path) -> np.ndarray:
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.float32)
    return arr / 255.0


class Frame:
    """Lazy accessor for one frame directory."""

    def __init__(self, root: Path, frame_id: str):
        self.frame_id = frame_id
        self.dir = Path(root) / "frames" / frame_id

    def scene(self) -> Scene:
        return Scene.from_dict(read_json(self.dir / "scene.json"))

    def camera(self) -> np.ndarray:
        return load_camera_png(self.dir / "camera.png")

    def captions(self) -> list:
        caps = []
        k = 0
        while (self.dir / f"caption_{k}.json").exists():
            d = read_json(self.dir / f"caption_{k}.json")
            caps.append(Caption(d["text"], d["frame_id"], d["template_id"]))
            k += 1
        return caps

    def ground_truth(self) -> GroundTruth:
        return GroundTruth.from_dict(read_json(self.dir / "gt.json"))

    def spectrum(self):
        return read_spectrum(self.dir / "spectrum.rspc", frame_id=self.frame_id)

    def spectrum_path(self) -> Path:
        return self.dir / "spectrum.rspc"


class FrameDataset:
    def __init__(self, root):
        self.root = Path(root)
        manifest_path = self.root / "manifest.json"
        if not manifest_path.exists():
            raise FormatError(f"no manifest.json under {self.root}")
        self.manifest = read_json(manifest_path)
        self.frame_ids = list(self.manifest["frames"])
        self.splits = {s: list(v) for s, v in self.manifest["splits"].items()}

    def __len__(self):
        return len(self.frame_ids)

    def frame(self, frame_id: str) -> Frame:
        return Frame(self.root, frame_id)

    def frames(self, split: str | None = None) -> list:
        ids = self.frame_ids if split in (None, "all") else self.splits[split]
        return [Frame(self.root, fid) for fid in ids]

    @property
    def config_hash(self) -> str:
        return self.manifest["config_hash"]

    def data_config(self) -> DataConfig:
        from .configs import run_config_from_dict  # noqa: F401  (shared parsing helpers)
        from .configs import _from_dict

        return _from_dict(DataConfig, self.manifest["data"])

    def radar_config(self) -> RadarConfig:
        from .configs import _from_dict

        return _from_dict(RadarConfig, self.manifest["radar"])
