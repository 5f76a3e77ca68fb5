"""Binary spectrum container: the cross-module, cross-language wire format.

Layout (little-endian): magic "RSPC", version u16 = 1, mode u8 (0 = RD,
1 = RA), ndim u8 = 3, three u32 dims, then dim-product complex values as
interleaved float32 (re, im).
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import FormatError
from .synth import MODE_RANGE_AZIMUTH, MODE_RANGE_DOPPLER, Spectrum

MAGIC = b"RSPC"
VERSION = 1
_MODE_CODE = {MODE_RANGE_DOPPLER: 0, MODE_RANGE_AZIMUTH: 1}
_CODE_MODE = {v: k for k, v in _MODE_CODE.items()}
_HEADER = struct.Struct("<4sHBB3I")


def write_spectrum(spectrum: Spectrum, path) -> None:
    data = np.ascontiguousarray(spectrum.data.astype(np.complex64, copy=False))
    if data.ndim != 3:
        raise FormatError(f"spectrum data must be 3-D, got ndim={data.ndim}")
    if spectrum.mode not in _MODE_CODE:
        raise FormatError(f"unknown spectrum mode {spectrum.mode!r}")
    header = _HEADER.pack(
        MAGIC, VERSION, _MODE_CODE[spectrum.mode], data.ndim, *data.shape
    )
    with open(path, "wb") as f:
        f.write(header)
        f.write(data.astype("<c8", copy=False).tobytes())


def read_spectrum(path, frame_id: str = "") -> Spectrum:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError("truncated header")
    magic, version, mode_code, ndim, d0, d1, d2 = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    if mode_code not in _CODE_MODE:
        raise FormatError(f"unknown mode code {mode_code}")
    if ndim != 3:
        raise FormatError(f"ndim must be 3, got {ndim}")
    count = d0 * d1 * d2
    payload = raw[_HEADER.size :]
    expected = count * 8
    if len(payload) < expected:
        raise FormatError(
            f"truncated payload: expected {expected} bytes for dims "
            f"{d0}x{d1}x{d2}, got {len(payload)}"
        )
    if len(payload) > expected:
        raise FormatError(f"trailing bytes after payload: {len(payload) - expected}")
    data = np.frombuffer(payload, dtype="<c8").reshape(d0, d1, d2)
    return Spectrum(mode=_CODE_MODE[mode_code], data=data.copy(), frame_id=frame_id)
