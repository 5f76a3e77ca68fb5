"""Radar spectra-language lab: synthetic scenes, simulated spectra, a frozen
contrastive teacher, distilled spectra encoders, text retrieval, and
embedding-injected detection/segmentation."""

__version__ = "0.1.0"
