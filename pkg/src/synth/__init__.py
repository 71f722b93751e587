"""
Procedural lesion synthesis on healthy template scans.
"""

from src.synth.intensity import (
    RingStats,
    apply_density,
    apply_heterogeneity,
    apply_surface,
    draw_blur_sigma,
    draw_density_offset,
    draw_heterogeneity_amplitude,
    ring_stats,
)
from src.synth.invasion import InvasionResult, apply_invasion, draw_invasion_depth
from src.synth.labels import compose_labels
from src.synth.noise import value_noise
from src.synth.pipeline import Provenance, SynthSample, TemplateScan, load_template, save_sample, synthesize
from src.synth.shapes import ShapeResult, make_shape_mask, place_lesion

__all__ = [
    'RingStats',
    'apply_density',
    'apply_heterogeneity',
    'apply_surface',
    'draw_blur_sigma',
    'draw_density_offset',
    'draw_heterogeneity_amplitude',
    'ring_stats',
    'InvasionResult',
    'apply_invasion',
    'draw_invasion_depth',
    'compose_labels',
    'value_noise',
    'Provenance',
    'SynthSample',
    'TemplateScan',
    'load_template',
    'save_sample',
    'synthesize',
    'ShapeResult',
    'make_shape_mask',
    'place_lesion',
]
