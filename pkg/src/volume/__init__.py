"""
Canonical 3D volumes: orientation, resampling, cropping, masks, morphology and tiling.
"""

from src.volume.geometry import (
    CANONICAL_ORIENTATION,
    LabelMap,
    Volume3D,
    bounding_box,
    canonicalize_orientation,
    centroid,
    crop_around,
    mask_volume_mm3,
    reorient,
)
from src.volume.morphology import MorphologyOp, dilate, erode, morphology
from src.volume.nifti_io import load_label_map, load_volume, save_label_map, save_volume
from src.volume.resample import resample_isotropic_1mm, resample_labels_isotropic
from src.volume.tiling import WindowTiling, tile_sliding_windows

__all__ = [
    'CANONICAL_ORIENTATION',
    'LabelMap',
    'Volume3D',
    'bounding_box',
    'canonicalize_orientation',
    'centroid',
    'crop_around',
    'mask_volume_mm3',
    'reorient',
    'MorphologyOp',
    'dilate',
    'erode',
    'morphology',
    'load_label_map',
    'load_volume',
    'save_label_map',
    'save_volume',
    'resample_isotropic_1mm',
    'resample_labels_isotropic',
    'WindowTiling',
    'tile_sliding_windows',
]
