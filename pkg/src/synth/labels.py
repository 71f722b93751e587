import numpy as np

from src.exceptions import InvalidInputError
from src.lesions.schema import LESION_CLASS_IDS, LesionType
from src.volume.geometry import LabelMap


def compose_labels(organ_labels: LabelMap, lesion_mask: np.ndarray, lesion_type: LesionType) -> LabelMap:
    """Overwrite lesion voxels with the lesion class id; every other voxel keeps its organ label."""
    try:
        class_id = LESION_CLASS_IDS[LesionType(lesion_type)]
    except ValueError:
        raise InvalidInputError(f"unknown lesion type {lesion_type!r}")
    mask = np.asarray(lesion_mask, dtype=bool)
    if mask.shape != organ_labels.voxels.shape:
        raise InvalidInputError(f"lesion mask shape {mask.shape} does not match labels {organ_labels.voxels.shape}")
    voxels = organ_labels.voxels.copy()
    voxels[mask] = class_id
    return organ_labels.with_voxels(voxels)
