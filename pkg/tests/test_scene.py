import numpy as np
import pytest

from rslm.configs import DataConfig
from rslm.datagen.scene import (
    cartesian_distance,
    generate_scene,
    validate_scene,
)
from rslm.errors import ConfigError, InputError

from .conftest import make_scene, point_target


def test_same_seed_reproduces_identical_scene(data_cfg):
    a = generate_scene(7, data_cfg)
    b = generate_scene(7, data_cfg)
    assert a.to_dict() == b.to_dict()


def test_empty_config_gives_empty_scene():
    cfg = DataConfig(n_frames=1, min_objects=0, max_objects=0)
    scene = generate_scene(3, cfg)
    assert scene.objects == []
    assert scene.freespace.any()


def test_fixed_count_and_separation():
    cfg = DataConfig(n_frames=1, min_objects=3, max_objects=3)
    scene = generate_scene(11, cfg)
    assert len(scene.objects) == 3
    validate_scene(scene, cfg)
    for i, a in enumerate(scene.objects):
        for b in scene.objects[i + 1 :]:
            assert cartesian_distance(a, b) > 2.0


def test_determinism_over_many_seeds(data_cfg):
    for seed in np.random.default_rng(0).integers(0, 2**62, size=100):
        s1 = generate_scene(int(seed), data_cfg)
        s2 = generate_scene(int(seed), data_cfg)
        assert s1.to_dict() == s2.to_dict()


def test_generated_scenes_pass_validator(data_cfg):
    for seed in range(60):
        validate_scene(generate_scene(seed, data_cfg), data_cfg)


def test_invalid_config_rejected():
    with pytest.raises(ConfigError):
        DataConfig(min_objects=4, max_objects=2)
    with pytest.raises(ConfigError):
        DataConfig(max_objects=9)


def test_validator_rejects_out_of_band_objects():
    bad = make_scene([point_target(150.0)])
    with pytest.raises(InputError):
        validate_scene(bad)
    too_fast = make_scene([point_target(30.0, velocity=5.0, category="pedestrian")])
    with pytest.raises(InputError):
        validate_scene(too_fast)


def test_validator_rejects_close_pairs():
    scene = make_scene([point_target(30.0, azimuth=0.0), point_target(31.0, azimuth=0.0)])
    with pytest.raises(InputError):
        validate_scene(scene)


def test_freespace_occupied_at_object_centers(data_cfg):
    for seed in range(20):
        scene = generate_scene(seed, data_cfg)
        nr, na = scene.freespace.shape
        for o in scene.objects:
            i = min(int(o.range_m / (scene.range_extent_m / nr)), nr - 1)
            j = min(int((o.azimuth_deg + 60.0) / (scene.fov_deg / na)), na - 1)
            assert not scene.freespace[i, j]
