import struct

import numpy as np
import pytest

from rslm.errors import FormatError
from rslm.radar.spectrum_io import read_spectrum, write_spectrum
from rslm.radar.synth import Spectrum, synthesize_rd_spectrum

from .conftest import make_scene, point_target


def _sample_spectrum(radar_noisy):
    scene = make_scene([point_target(25.0, velocity=1.5, azimuth=12.0)])
    return synthesize_rd_spectrum(scene, radar_noisy, seed=5)


def test_roundtrip_bit_exact(tmp_path, radar_noisy):
    spectrum = _sample_spectrum(radar_noisy)
    path = tmp_path / "s.rspc"
    write_spectrum(spectrum, path)
    back = read_spectrum(path)
    assert back.mode == spectrum.mode
    assert back.data.dtype == np.complex64
    assert np.array_equal(back.data, spectrum.data)
    # second generation round-trips to identical bytes
    write_spectrum(back, tmp_path / "s2.rspc")
    assert (tmp_path / "s.rspc").read_bytes() == (tmp_path / "s2.rspc").read_bytes()


def test_bad_magic(tmp_path, radar_noisy):
    path = tmp_path / "bad.rspc"
    write_spectrum(_sample_spectrum(radar_noisy), path)
    raw = bytearray(path.read_bytes())
    raw[:4] = b"XXXX"
    path.write_bytes(bytes(raw))
    with pytest.raises(FormatError, match="magic"):
        read_spectrum(path)


def test_truncated_payload(tmp_path):
    header = struct.pack("<4sHBB3I", b"RSPC", 1, 0, 3, 128, 64, 8)
    path = tmp_path / "short.rspc"
    path.write_bytes(header + b"\x00" * 64)
    with pytest.raises(FormatError, match="truncated"):
        read_spectrum(path)


def test_bad_mode_and_ndim(tmp_path):
    path = tmp_path / "m.rspc"
    path.write_bytes(struct.pack("<4sHBB3I", b"RSPC", 1, 7, 3, 1, 1, 1) + b"\x00" * 8)
    with pytest.raises(FormatError, match="mode"):
        read_spectrum(path)
    path.write_bytes(struct.pack("<4sHBB3I", b"RSPC", 1, 0, 2, 1, 1, 1) + b"\x00" * 8)
    with pytest.raises(FormatError, match="ndim"):
        read_spectrum(path)


def test_trailing_bytes_rejected(tmp_path):
    header = struct.pack("<4sHBB3I", b"RSPC", 1, 0, 3, 1, 1, 1)
    path = tmp_path / "long.rspc"
    path.write_bytes(header + b"\x00" * 16)
    with pytest.raises(FormatError, match="trailing"):
        read_spectrum(path)


def test_non_3d_write_rejected():
    with pytest.raises(FormatError):
        write_spectrum(
            Spectrum(mode="range_doppler", data=np.zeros((4, 4), dtype=np.complex64)),
            "/dev/null",
        )
