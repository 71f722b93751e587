"""
Diffusion-style refinement: noise schedule, reverse steps and sliding-window orchestration.
"""

from src.refine.schedule import NoiseSchedule, ReverseMode, build_schedule, forward_noise, predict_x0, reverse_step
from src.refine.refiner import RefineConfig, normalize_hu, refine_volume

__all__ = [
    'NoiseSchedule',
    'ReverseMode',
    'build_schedule',
    'forward_noise',
    'predict_x0',
    'reverse_step',
    'RefineConfig',
    'normalize_hu',
    'refine_volume',
]
