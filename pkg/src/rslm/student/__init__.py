from .view import PlaneStats, compute_plane_stats, spectrum_to_planes, to_view, invert_view
from .models import StudentModel, build_student, encode_spectrum
from .loss import matching_loss
from .train import train_student, constant_predictor_mse

__all__ = [
    "PlaneStats",
    "compute_plane_stats",
    "spectrum_to_planes",
    "to_view",
    "invert_view",
    "StudentModel",
    "build_student",
    "encode_spectrum",
    "matching_loss",
    "train_student",
    "constant_predictor_mse",
]
