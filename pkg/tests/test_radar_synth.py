import numpy as np
import pytest

from rslm.configs import RadarConfig
from rslm.errors import InputError
from rslm.radar.synth import (
    expected_ra_bins,
    expected_rd_bins,
    synthesize_ra_spectrum,
    synthesize_rd_spectrum,
)

from .conftest import make_scene, point_target


def _argmax_bin(spectrum):
    mag = np.abs(spectrum.data).max(axis=2)
    return tuple(int(v) for v in np.unravel_index(mag.argmax(), mag.shape))


def _local_maxima(mag, floor):
    """Strictly positive cells that dominate their 8-neighborhood."""
    padded = np.zeros((mag.shape[0] + 2, mag.shape[1] + 2))
    padded[1:-1, 1:-1] = mag
    peaks = []
    for i in range(mag.shape[0]):
        for j in range(mag.shape[1]):
            window = padded[i : i + 3, j : j + 3]
            if mag[i, j] > floor and mag[i, j] == window.max():
                peaks.append((i, j))
    return peaks


def test_rd_single_target_peak(radar_clean):
    scene = make_scene([point_target(40.0, velocity=4.8)])
    spectrum = synthesize_rd_spectrum(scene, radar_clean, seed=0)
    assert _argmax_bin(spectrum) == (50, 44)
    assert expected_rd_bins(40.0, 4.8, radar_clean) == (50, 44)


def test_rd_empty_scene_is_zero(radar_clean):
    spectrum = synthesize_rd_spectrum(make_scene([]), radar_clean, seed=0)
    assert np.all(spectrum.data == 0)


def test_rd_two_targets_two_local_maxima(radar_clean):
    scene = make_scene(
        [
            point_target(20.0, velocity=0.0, rcs=10.0),
            point_target(80.0, velocity=-4.0, azimuth=10.0, rcs=30.0),
        ]
    )
    spectrum = synthesize_rd_spectrum(scene, radar_clean, seed=0)
    mag = np.abs(spectrum.data).max(axis=2)
    peaks = _local_maxima(mag, floor=1e-9 * mag.max())
    assert sorted(peaks) == [(25, 32), (100, 22)]


def test_rd_peak_oracle_random_targets(radar_clean):
    rng = np.random.default_rng(42)
    for _ in range(50):
        r = float(rng.uniform(2.0, 99.0))
        v = float(rng.uniform(-11.5, 11.5))
        az = float(rng.uniform(-55.0, 55.0))
        scene = make_scene([point_target(r, velocity=v, azimuth=az)])
        spectrum = synthesize_rd_spectrum(scene, radar_clean, seed=0)
        assert _argmax_bin(spectrum) == expected_rd_bins(r, v, radar_clean)


def test_ra_single_target_peak(radar_clean):
    scene = make_scene([point_target(40.0, azimuth=30.0)])
    spectrum = synthesize_ra_spectrum(scene, radar_clean, seed=0)
    assert _argmax_bin(spectrum) == (50, 96)
    assert expected_ra_bins(40.0, 30.0, radar_clean) == (50, 96)


def test_ra_boresight_center_bin(radar_clean):
    scene = make_scene([point_target(40.0, azimuth=0.0)])
    spectrum = synthesize_ra_spectrum(scene, radar_clean, seed=0)
    assert _argmax_bin(spectrum)[1] == 64


def test_ra_empty_zero(radar_clean):
    spectrum = synthesize_ra_spectrum(make_scene([]), radar_clean, seed=0)
    assert np.all(spectrum.data == 0)
    assert spectrum.data.shape == (128, 128, 8)


def test_ra_peak_oracle_random_targets(radar_clean):
    rng = np.random.default_rng(7)
    for _ in range(25):
        r = float(rng.uniform(2.0, 99.0))
        az = float(rng.uniform(-55.0, 55.0))
        scene = make_scene([point_target(r, azimuth=az)])
        spectrum = synthesize_ra_spectrum(scene, radar_clean, seed=0)
        assert _argmax_bin(spectrum) == expected_ra_bins(r, az, radar_clean)


def test_linearity_of_synthesis(radar_clean):
    a = point_target(20.0, velocity=3.0, azimuth=-10.0)
    b = point_target(55.0, velocity=-6.0, azimuth=25.0, rcs=20.0)
    sp_a = synthesize_rd_spectrum(make_scene([a]), radar_clean, seed=0)
    sp_b = synthesize_rd_spectrum(make_scene([b]), radar_clean, seed=0)
    sp_ab = synthesize_rd_spectrum(make_scene([a, b]), radar_clean, seed=0)
    assert np.allclose(sp_ab.data, sp_a.data + sp_b.data, atol=1e-3)


def test_parseval_energy(radar_clean):
    r, v, az, rcs = 40.0, 4.8, 15.0, 15.0
    scene = make_scene([point_target(r, velocity=v, azimuth=az, rcs=rcs)])
    spectrum = synthesize_rd_spectrum(scene, radar_clean, seed=0)
    cfg = radar_clean
    # Independent brute-force time cube in float64.
    n, m, c = cfg.n_range, cfg.n_doppler, cfg.n_channels
    amp = np.sqrt(10 ** (rcs / 10.0)) / (r / 10.0) ** 2
    fr = r / (cfg.range_res * n)
    fd = v / (cfg.doppler_res * m) + 0.5
    fa = cfg.antenna_spacing_ratio * np.sin(np.radians(az))
    ax = 2j * np.pi
    cube = amp * np.exp(
        ax
        * (
            np.arange(n)[:, None, None] * fr
            + np.arange(m)[None, :, None] * fd
            + np.arange(c)[None, None, :] * fa
        )
    )
    e_time = np.sum(np.abs(cube) ** 2)
    e_spec = np.sum(np.abs(spectrum.data.astype(np.complex128)) ** 2)
    assert abs(e_spec - n * m * e_time) / (n * m * e_time) < 1e-6


def test_noise_determinism(radar_noisy):
    scene = make_scene([point_target(30.0, velocity=2.0)])
    a = synthesize_rd_spectrum(scene, radar_noisy, seed=99)
    b = synthesize_rd_spectrum(scene, radar_noisy, seed=99)
    c = synthesize_rd_spectrum(scene, radar_noisy, seed=100)
    assert np.array_equal(a.data, b.data)
    assert not np.array_equal(a.data, c.data)


def test_out_of_band_target_rejected(radar_clean):
    with pytest.raises(InputError):
        synthesize_rd_spectrum(
            make_scene([point_target(150.0)]), radar_clean, seed=0
        )
    fast = make_scene([point_target(30.0, velocity=12.9)])
    with pytest.raises(InputError):
        synthesize_rd_spectrum(fast, radar_clean, seed=0)
