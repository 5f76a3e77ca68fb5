"""Published benchmark numbers rendered alongside our results for format
reference only; they come from a different dataset and are not reproduced
or asserted by this codebase."""

REFERENCE_LABEL = "paper (CRUW, not reproduced)"

# Top-10 retrieval precision per class for the published spectra encoders.
REFERENCE_TOP10 = {
    "fpn": {"car": 1.0, "person": 1.0, "rider": 0.6, "truck": 0.7, "mean": 0.773},
    "cnn": {"car": 1.0, "person": 0.0, "rider": 0.3, "truck": 0.6, "mean": 0.636},
}

REFERENCE_TOP100 = {
    "fpn": {"car": 0.93, "person": 0.95, "rider": 0.4, "truck": 0.25, "mean": 0.679},
    "cnn": {"car": 1.0, "person": 0.08, "rider": 0.13, "truck": 0.28, "mean": 0.574},
}
