"""Point-target radar signal model and spectrum synthesis.

Each object contributes a complex exponential across fast time (range),
slow time (Doppler) and antenna channels (azimuth). Extended vehicles are
approximated by a 3-point cluster around the annotated center. Spectra are
obtained with unnormalized forward DFTs of the time-domain cube.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from ..configs import RadarConfig
from ..datagen.scene import Scene
from ..errors import InputError
from ..hashing import config_hash

# (range spread m, azimuth spread deg) of the two satellite scatterers.
CLUSTER_SPREAD = {"car": (0.8, 0.6), "truck": (1.6, 1.0)}

MODE_RANGE_DOPPLER = "range_doppler"
MODE_RANGE_AZIMUTH = "range_azimuth"


@dataclass
class Spectrum:
    mode: str
    data: np.ndarray  # complex64; (n_range, n_doppler, n_channels) for RD
    frame_id: str = ""
    config_hash: str = ""


def radar_config_hash(cfg: RadarConfig) -> str:
    return config_hash(dataclasses.asdict(cfg))


def _point_targets(scene: Scene, cfg: RadarConfig):
    """Expand objects into (range, velocity, azimuth, amplitude) point scatterers."""
    points = []
    for obj in scene.objects:
        if not (0.0 < obj.range_m < cfg.max_range_m):
            raise InputError(f"object range {obj.range_m} outside unambiguous extent")
        if abs(obj.radial_velocity_mps) >= cfg.max_speed_mps:
            raise InputError(
                f"object velocity {obj.radial_velocity_mps} outside unambiguous extent"
            )
        spread = CLUSTER_SPREAD.get(obj.category)
        if spread is None:
            offsets = [(0.0, 0.0)]
        else:
            dr, da = spread
            offsets = [(0.0, 0.0), (dr, da), (-dr, -da)]
        amp_total = math.sqrt(10.0 ** (obj.rcs_dbsm / 10.0)) / (obj.range_m / 10.0) ** 2
        amp = amp_total / math.sqrt(len(offsets))
        for dr, da in offsets:
            r = min(max(obj.range_m + dr, 0.5), cfg.max_range_m - 0.5)
            az = min(max(obj.azimuth_deg + da, -cfg.fov_deg / 2), cfg.fov_deg / 2)
            points.append((r, obj.radial_velocity_mps, az, amp))
    return points


def _time_cube(scene: Scene, cfg: RadarConfig, seed: int, center_doppler: bool):
    """Sum of per-target complex exponentials plus circular Gaussian noise (float64)."""
    n, m, c = cfg.n_range, cfg.n_doppler, cfg.n_channels
    cube = np.zeros((n, m, c), dtype=np.complex128)
    ax_n = np.arange(n, dtype=np.float64)[:, None, None]
    ax_m = np.arange(m, dtype=np.float64)[None, :, None]
    ax_c = np.arange(c, dtype=np.float64)[None, None, :]
    for r, v, az, amp in _point_targets(scene, cfg):
        f_r = r / (cfg.range_res * n)
        f_d = v / (cfg.doppler_res * m) + (0.5 if center_doppler else 0.0)
        f_a = cfg.antenna_spacing_ratio * math.sin(math.radians(az))
        phase = 2.0 * np.pi * (ax_n * f_r + ax_m * f_d + ax_c * f_a)
        cube += amp * np.exp(1j * phase)
    if cfg.noise_sigma > 0:
        rng = np.random.default_rng(seed)
        scale = cfg.noise_sigma / math.sqrt(2.0)
        cube += scale * (
            rng.standard_normal(cube.shape) + 1j * rng.standard_normal(cube.shape)
        )
    return cube


def synthesize_rd_spectrum(scene: Scene, cfg: RadarConfig, seed: int) -> Spectrum:
    """Range-Doppler spectrum: 2-D DFT over fast/slow time per channel.

    Zero velocity lands at Doppler bin n_doppler/2 (the half-cycle term in
    the slow-time phase performs the centering)."""
    cube = _time_cube(scene, cfg, seed, center_doppler=True)
    data = np.fft.fft2(cube, axes=(0, 1))
    return Spectrum(
        mode=MODE_RANGE_DOPPLER,
        data=data.astype(np.complex64),
        frame_id=scene.frame_id,
        config_hash=radar_config_hash(cfg),
    )


def synthesize_ra_spectrum(scene: Scene, cfg: RadarConfig, seed: int) -> Spectrum:
    """Range-azimuth spectrum: chirps are coherently summed in groups, the
    channel axis is zero-padded to n_azimuth_bins and DFT'd, and the azimuth
    axis is rotated so boresight sits at bin n_azimuth_bins/2.

    Slow time carries no half-cycle term here: the chirp sum would cancel
    every return otherwise. The third axis holds one coherent look per chirp
    group (n_channels groups), preserving the 3-D shape contract."""
    cube = _time_cube(scene, cfg, seed, center_doppler=False)
    n, m, c = cube.shape
    n_groups = cfg.n_channels
    if m % n_groups:
        raise InputError("n_doppler must be divisible by n_channels for RA grouping")
    looks = cube.reshape(n, n_groups, m // n_groups, c).sum(axis=2)  # (n, group, c)
    looks = np.fft.fft(looks, axis=0)  # fast time -> range
    padded = np.zeros((n, n_groups, cfg.n_azimuth_bins), dtype=np.complex128)
    padded[:, :, :c] = looks
    ra = np.fft.fft(padded, axis=2)
    ra = np.fft.fftshift(ra, axes=2)
    data = np.transpose(ra, (0, 2, 1))  # (n_range, n_azimuth_bins, group)
    return Spectrum(
        mode=MODE_RANGE_AZIMUTH,
        data=data.astype(np.complex64),
        frame_id=scene.frame_id,
        config_hash=radar_config_hash(cfg),
    )


def expected_rd_bins(range_m, velocity_mps, cfg: RadarConfig) -> tuple:
    """Analytic peak bin of a single point target in RD mode."""
    return (
        round(range_m / cfg.range_res) % cfg.n_range,
        (cfg.n_doppler // 2 + round(velocity_mps / cfg.doppler_res)) % cfg.n_doppler,
    )


def expected_ra_bins(range_m, azimuth_deg, cfg: RadarConfig) -> tuple:
    """Analytic peak bin of a single point target in RA mode."""
    az_bin = round(
        cfg.n_azimuth_bins * (1.0 + math.sin(math.radians(azimuth_deg))) / 2.0
    ) % cfg.n_azimuth_bins
    return (round(range_m / cfg.range_res) % cfg.n_range, az_bin)
