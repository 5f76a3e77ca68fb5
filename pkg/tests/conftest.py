import numpy as np
import pytest

from rslm.configs import DataConfig, GridConfig, RadarConfig
from rslm.datagen.scene import Scene, SceneObject


@pytest.fixture(scope="session")
def data_cfg():
    return DataConfig(n_frames=24)


@pytest.fixture(scope="session")
def radar_clean():
    return RadarConfig(noise_sigma=0.0)


@pytest.fixture(scope="session")
def radar_noisy():
    return RadarConfig(noise_sigma=0.5)


@pytest.fixture(scope="session")
def grid():
    return GridConfig()


def make_scene(objects, layout="open_road", freespace=None, frame_id="t0"):
    if freespace is None:
        freespace = np.ones((128, 128), dtype=bool)
        for obj in objects:
            i = min(int(obj.range_m / 0.8), 127)
            j = min(int((obj.azimuth_deg + 60.0) / (120.0 / 128)), 127)
            freespace[i, j] = False
    return Scene(
        frame_id=frame_id, seed=0, layout=layout, objects=list(objects), freespace=freespace
    )


def point_target(range_m, velocity=0.0, azimuth=0.0, rcs=15.0, category="pedestrian"):
    """Single-point scatterer (pedestrian/cyclist categories have no cluster)."""
    return SceneObject(category, range_m, azimuth, velocity, rcs)


@pytest.fixture(scope="session")
def tiny_dataset(tmp_path_factory):
    """A small on-disk dataset shared by IO-heavy tests."""
    from rslm.dataset import build_dataset

    out = tmp_path_factory.mktemp("tinydata")
    build_dataset(DataConfig(n_frames=24), RadarConfig(noise_sigma=0.5), 123, out)
    from rslm.dataset import FrameDataset

    return FrameDataset(out)
