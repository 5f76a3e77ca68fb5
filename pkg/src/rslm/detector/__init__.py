from .model import DetectionOutput, DetectorModel, adapter_apply, build_detector, forward
from .losses import detection_loss, focal_sum, segmentation_loss, smooth_l1, total_loss
from .decode import Detection, decode_detections
from .targets import detection_targets
from .train import train_detector

__all__ = [
    "DetectionOutput",
    "DetectorModel",
    "adapter_apply",
    "build_detector",
    "forward",
    "detection_loss",
    "focal_sum",
    "segmentation_loss",
    "smooth_l1",
    "total_loss",
    "Detection",
    "decode_detections",
    "detection_targets",
    "train_detector",
]
