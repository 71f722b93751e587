from dataclasses import replace

import numpy as np
from scipy import ndimage

from src.exceptions import InvalidInputError
from src.volume.geometry import LabelMap, Volume3D


def _output_shape(vol: Volume3D, target: float) -> tuple:
    # Physical extent (n-1)*spacing is kept within one output voxel
    extent = (np.array(vol.dims) - 1) * np.array(vol.spacing)
    return tuple(int(n) for n in np.floor(extent / target + 1e-9).astype(int) + 1)


def _resample(vol: Volume3D, target: float, order: int) -> np.ndarray:
    if not np.isfinite(vol.spacing).all() or min(vol.spacing) <= 0:
        raise InvalidInputError(f"spacing must be finite and positive, got {vol.spacing}")
    if target <= 0:
        raise InvalidInputError(f"target spacing must be positive, got {target}")
    # Output index i samples input index i * target / spacing; edges clamp
    scale = target / np.array(vol.spacing)
    return ndimage.affine_transform(
        vol.voxels,
        matrix=scale,
        offset=0.0,
        output_shape=_output_shape(vol, target),
        order=order,
        mode="nearest",
        prefilter=False,
    )


def resample_isotropic_1mm(vol: Volume3D, target: float = 1.0) -> Volume3D:
    """
    Trilinear resampling to isotropic spacing.

    Sampling outside the grid clamps to the edge voxel, so output values
    stay within the input's min/max.
    """
    voxels = np.asarray(vol.voxels, dtype=np.float64)
    if not np.isfinite(voxels).all():
        raise InvalidInputError("cannot resample a volume with non-finite voxels")
    source = vol.with_voxels(voxels)
    resampled = _resample(source, target, order=1)
    return replace(vol, voxels=resampled, spacing=(target, target, target))


def resample_labels_isotropic(labels: LabelMap, target: float = 1.0) -> LabelMap:
    """Nearest-neighbour counterpart for label maps."""
    resampled = _resample(labels, target, order=0).astype(labels.voxels.dtype)
    return replace(labels, voxels=resampled, spacing=(target, target, target))
