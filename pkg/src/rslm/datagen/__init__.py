from .scene import Scene, SceneObject, generate_scene, validate_scene
from .camera import render_camera_proxy
from .captions import Caption, generate_captions
from .groundtruth import GroundTruth, derive_ground_truth

__all__ = [
    "Scene",
    "SceneObject",
    "generate_scene",
    "validate_scene",
    "render_camera_proxy",
    "Caption",
    "generate_captions",
    "GroundTruth",
    "derive_ground_truth",
]
