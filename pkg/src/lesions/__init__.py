"""
Structured lesion attributes, per-type sampling and report encoding.
"""

from src.lesions.params import LesionSamplingParams, SamplingParams, default_sampling_params, load_sampling_params
from src.lesions.report import (
    StructuredReport,
    format_size,
    labels_to_options,
    parse_report,
    parse_size,
    render_report,
    report_class_labels,
)
from src.lesions.schema import (
    BENIGN_TYPES,
    LESION_CLASS_IDS,
    LESION_ORGAN,
    ORGAN_CLASS_IDS,
    SHAPE_FAMILIES,
    TEMPLATE_MODALITIES,
    Density,
    Enhancement,
    Heterogeneity,
    Invasion,
    LesionType,
    Organ,
    Shape,
    Surface,
)
from src.lesions.spec import LesionSpec, draw_option, sample_spec

__all__ = [
    'LesionSamplingParams',
    'SamplingParams',
    'default_sampling_params',
    'load_sampling_params',
    'StructuredReport',
    'format_size',
    'labels_to_options',
    'parse_report',
    'parse_size',
    'render_report',
    'report_class_labels',
    'BENIGN_TYPES',
    'LESION_CLASS_IDS',
    'LESION_ORGAN',
    'ORGAN_CLASS_IDS',
    'SHAPE_FAMILIES',
    'TEMPLATE_MODALITIES',
    'Density',
    'Enhancement',
    'Heterogeneity',
    'Invasion',
    'LesionType',
    'Organ',
    'Shape',
    'Surface',
    'LesionSpec',
    'draw_option',
    'sample_spec',
]
