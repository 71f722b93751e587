from enum import Enum
from typing import Sequence, Union

import numpy as np
from scipy.ndimage import distance_transform_edt

from src.exceptions import InvalidInputError

# Slack for distances that land exactly on the radius
_EPS = 1e-9


class MorphologyOp(str, Enum):
    ERODE = "erode"
    DILATE = "dilate"


def distance_to_foreground(mask: np.ndarray, spacing: Sequence[float]) -> np.ndarray:
    """Euclidean mm distance from each voxel center to the nearest foreground voxel."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return np.full(mask.shape, np.inf)
    return distance_transform_edt(~mask, sampling=spacing)


def distance_to_background(mask: np.ndarray, spacing: Sequence[float]) -> np.ndarray:
    """Distance to the nearest background voxel; the area outside the grid counts as background."""
    padded = np.pad(np.asarray(mask, dtype=bool), 1, mode="constant", constant_values=False)
    return distance_transform_edt(padded, sampling=spacing)[1:-1, 1:-1, 1:-1]


def morphology(
    mask: np.ndarray,
    op: Union[MorphologyOp, str],
    radius_mm: float,
    spacing: Sequence[float] = (1.0, 1.0, 1.0),
) -> np.ndarray:
    """
    Binary erosion/dilation with a Euclidean ball at the grid's spacing.

    The ball holds every voxel center within radius_mm of the origin, so a
    1 mm ball at 1 mm spacing is the center plus its six face neighbours.
    """
    op = MorphologyOp(op)
    if radius_mm < 0:
        raise InvalidInputError(f"radius must be >= 0, got {radius_mm}")
    mask = np.asarray(mask, dtype=bool)
    if radius_mm == 0:
        return mask.copy()

    if op is MorphologyOp.DILATE:
        return distance_to_foreground(mask, spacing) <= radius_mm + _EPS
    return distance_to_background(mask, spacing) > radius_mm + _EPS


def erode(mask: np.ndarray, radius_mm: float, spacing: Sequence[float] = (1.0, 1.0, 1.0)) -> np.ndarray:
    return morphology(mask, MorphologyOp.ERODE, radius_mm, spacing)


def dilate(mask: np.ndarray, radius_mm: float, spacing: Sequence[float] = (1.0, 1.0, 1.0)) -> np.ndarray:
    return morphology(mask, MorphologyOp.DILATE, radius_mm, spacing)
