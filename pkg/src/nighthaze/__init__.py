"""Nighttime haze removal with illumination and color correction."""

from .config import FilterParams, PipelineConfig, SynthConfig, load_config
from .pipeline import PipelineResult, restore, run

__version__ = "0.1.0"

__all__ = [
    "FilterParams",
    "PipelineConfig",
    "PipelineResult",
    "SynthConfig",
    "load_config",
    "restore",
    "run",
    "__version__",
]
