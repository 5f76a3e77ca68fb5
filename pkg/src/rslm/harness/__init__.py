from .pipeline import StageFailure, run_pipeline
from .ablation import run_ablation

__all__ = ["StageFailure", "run_pipeline", "run_ablation"]
