import numpy as np

from rslm.configs import DataConfig, RadarConfig
from rslm.dataset import (
    FrameDataset,
    build_dataset,
    load_camera_png,
    save_camera_png,
    split_of_index,
)


def test_manifest_contents(tiny_dataset):
    m = tiny_dataset.manifest
    assert m["n_frames"] == 24
    assert len(m["frames"]) == 24
    assert set(m["splits"]) == {"train", "val", "test"}
    total = sum(len(v) for v in m["splits"].values())
    assert total == 24
    assert m["spectrum_mode"] == "range_doppler"
    assert m["config_hash"]


def test_split_assignment_is_frame_index_hash():
    assignments = [split_of_index(i) for i in range(1000)]
    frac_train = assignments.count("train") / 1000
    frac_val = assignments.count("val") / 1000
    assert 0.6 < frac_train < 0.8
    assert 0.08 < frac_val < 0.22
    # deterministic across calls
    assert assignments == [split_of_index(i) for i in range(1000)]


def test_frame_roundtrip(tiny_dataset):
    frame = tiny_dataset.frames()[0]
    scene = frame.scene()
    assert scene.frame_id == frame.frame_id
    gt = frame.ground_truth()
    assert gt.y_class.shape == (64, 64)
    caps = frame.captions()
    assert len(caps) == 4
    camera = frame.camera()
    assert camera.shape == (64, 64, 3)
    spectrum = frame.spectrum()
    assert spectrum.data.shape == (128, 64, 8)
    assert spectrum.frame_id == frame.frame_id


def test_camera_png_quantization(tmp_path):
    rng = np.random.default_rng(0)
    img = rng.uniform(size=(64, 64, 3))
    save_camera_png(img, tmp_path / "c.png")
    back = load_camera_png(tmp_path / "c.png")
    assert np.abs(back - img).max() <= 0.5 / 255 + 1e-6


def test_rebuild_is_byte_identical(tmp_path):
    cfg = DataConfig(n_frames=4)
    radar = RadarConfig(noise_sigma=0.5)
    a = tmp_path / "a"
    b = tmp_path / "b"
    build_dataset(cfg, radar, 7, a)
    build_dataset(cfg, radar, 7, b)
    for rel in [
        "manifest.json",
        "frames/000000/scene.json",
        "frames/000000/gt.json",
        "frames/000000/camera.png",
        "frames/000000/spectrum.rspc",
        "frames/000003/caption_0.json",
    ]:
        assert (a / rel).read_bytes() == (b / rel).read_bytes(), rel


def test_different_seed_changes_content(tmp_path):
    cfg = DataConfig(n_frames=2)
    radar = RadarConfig(noise_sigma=0.5)
    a = tmp_path / "a"
    b = tmp_path / "b"
    build_dataset(cfg, radar, 1, a)
    build_dataset(cfg, radar, 2, b)
    assert FrameDataset(a).config_hash != FrameDataset(b).config_hash
    assert (a / "frames/000000/scene.json").read_bytes() != (
        b / "frames/000000/scene.json"
    ).read_bytes()


def test_configs_recoverable(tiny_dataset):
    assert tiny_dataset.data_config().n_frames == 24
    assert tiny_dataset.radar_config().n_range == 128
