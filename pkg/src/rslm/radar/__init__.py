from .synth import Spectrum, synthesize_rd_spectrum, synthesize_ra_spectrum
from .spectrum_io import read_spectrum, write_spectrum

__all__ = [
    "Spectrum",
    "synthesize_rd_spectrum",
    "synthesize_ra_spectrum",
    "read_spectrum",
    "write_spectrum",
]
