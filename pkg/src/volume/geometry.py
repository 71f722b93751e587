from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
from nibabel import orientations

from src.exceptions import InvalidInputError

Triple = Tuple[float, float, float]
IndexTriple = Tuple[int, int, int]

# Axis 0 toward Left, axis 1 toward Posterior, axis 2 toward Superior
CANONICAL_ORIENTATION = "LPS"

N_LABEL_CLASSES = 25

_AXIS_GROUPS = ({"L", "R"}, {"A", "P"}, {"S", "I"})


def validate_orientation(code: str) -> str:
    """Check that code names each anatomical axis exactly once."""
    if not isinstance(code, str) or len(code) != 3:
        raise InvalidInputError(f"orientation code must have 3 letters, got {code!r}")
    code = code.upper()
    for group in _AXIS_GROUPS:
        if sum(letter in group for letter in code) != 1:
            raise InvalidInputError(f"unknown orientation code {code!r}")
    return code


@dataclass(frozen=True)
class Volume3D:
    """
    Scalar 3D grid with spacing, origin and orientation metadata.

    voxels is indexed [axis0, axis1, axis2]; orientation letters name the
    direction each axis increases toward; origin is the world (RAS+, mm)
    position of voxel (0, 0, 0).
    """

    voxels: np.ndarray
    spacing: Triple = (1.0, 1.0, 1.0)
    origin: Triple = (0.0, 0.0, 0.0)
    orientation: str = CANONICAL_ORIENTATION

    def __post_init__(self):
        voxels = np.asarray(self.voxels)
        if voxels.ndim != 3 or min(voxels.shape) < 1:
            raise InvalidInputError(f"volume must be 3D with every dimension >= 1, got shape {voxels.shape}")
        spacing = tuple(float(s) for s in self.spacing)
        if len(spacing) != 3 or not all(np.isfinite(s) and s > 0 for s in spacing):
            raise InvalidInputError(f"spacing must be three finite positive values, got {self.spacing}")
        origin = tuple(float(o) for o in self.origin)
        if len(origin) != 3:
            raise InvalidInputError(f"origin must have three components, got {self.origin}")
        object.__setattr__(self, "voxels", voxels)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "orientation", validate_orientation(self.orientation))
        self._check_values()

    def _check_values(self) -> None:
        if np.issubdtype(self.voxels.dtype, np.floating) and not np.isfinite(self.voxels).all():
            raise InvalidInputError("volume contains non-finite voxel values")

    @property
    def dims(self) -> IndexTriple:
        return tuple(int(n) for n in self.voxels.shape)

    @property
    def affine(self) -> np.ndarray:
        ornt = orientations.axcodes2ornt(self.orientation)
        affine = np.eye(4)
        affine[:3, :3] = 0.0
        for axis, (world_axis, sign) in enumerate(ornt):
            affine[int(world_axis), axis] = sign * self.spacing[axis]
        affine[:3, 3] = self.origin
        return affine

    def with_voxels(self, voxels: np.ndarray) -> "Volume3D":
        """Same geometry, new voxel array (shape must match)."""
        voxels = np.asarray(voxels)
        if voxels.shape != self.voxels.shape:
            raise InvalidInputError(f"shape mismatch: {voxels.shape} vs {self.voxels.shape}")
        return replace(self, voxels=voxels)

    def same_grid(self, other: "Volume3D") -> bool:
        return (
            self.dims == other.dims
            and np.allclose(self.spacing, other.spacing)
            and np.allclose(self.origin, other.origin)
            and self.orientation == other.orientation
        )


@dataclass(frozen=True)
class LabelMap(Volume3D):
    """Integer class map over background (0) and the 25 organ/lesion classes."""

    def _check_values(self) -> None:
        if not np.issubdtype(self.voxels.dtype, np.integer):
            raise InvalidInputError(f"label map must hold integers, got {self.voxels.dtype}")
        if self.voxels.size and (self.voxels.min() < 0 or self.voxels.max() > N_LABEL_CLASSES):
            raise InvalidInputError(f"label ids must lie in 0..{N_LABEL_CLASSES}")

    def mask(self, *class_ids: int) -> np.ndarray:
        return np.isin(self.voxels, class_ids)


def reorient(vol: Volume3D, code: str) -> Volume3D:
    """
    Permute/flip voxel axes so the volume reads in the requested orientation.

    The voxel array is rearranged without interpolation, so
    reorient(reorient(v, c), v.orientation) reproduces v.voxels bit-exactly.
    """
    code = validate_orientation(code)
    if code == vol.orientation:
        return vol
    start = orientations.axcodes2ornt(vol.orientation)
    end = orientations.axcodes2ornt(code)
    transform = orientations.ornt_transform(start, end)

    voxels = np.ascontiguousarray(orientations.apply_orientation(vol.voxels, transform))
    affine = vol.affine @ orientations.inv_ornt_aff(transform, vol.voxels.shape)
    spacing = tuple(float(s) for s in np.linalg.norm(affine[:3, :3], axis=0))
    origin = tuple(float(o) for o in affine[:3, 3])
    return replace(vol, voxels=voxels, spacing=spacing, origin=origin, orientation=code)


def canonicalize_orientation(vol: Volume3D) -> Volume3D:
    """Reorient to axis 0 right→left, axis 1 anterior→posterior, axis 2 inferior→superior."""
    return reorient(vol, CANONICAL_ORIENTATION)


def mask_volume_mm3(mask: np.ndarray, spacing: Triple) -> float:
    """Foreground voxel count times the voxel volume."""
    return float(np.count_nonzero(mask)) * float(np.prod(spacing))


def bounding_box(mask: np.ndarray) -> Optional[Tuple[slice, slice, slice]]:
    """Tight slices around the foreground, or None for an empty mask."""
    if not mask.any():
        return None
    box = []
    for axis in range(mask.ndim):
        other = tuple(a for a in range(mask.ndim) if a != axis)
        hits = np.flatnonzero(mask.any(axis=other))
        box.append(slice(int(hits[0]), int(hits[-1]) + 1))
    return tuple(box)


def centroid(mask: np.ndarray) -> Triple:
    coords = np.argwhere(mask)
    if coords.size == 0:
        raise InvalidInputError("centroid of an empty mask")
    return tuple(float(c) for c in coords.mean(axis=0))


def crop_around(vol: Volume3D, center: IndexTriple, edge: int, fill: Optional[float] = None) -> Volume3D:
    """
    Fixed-size cube crop centered on a voxel.

    Regions outside the source grid are filled with `fill` (air for images,
    background for label maps by default). The origin moves with the crop.
    """
    if edge < 1:
        raise InvalidInputError(f"crop edge must be >= 1, got {edge}")
    if fill is None:
        fill = 0 if isinstance(vol, LabelMap) else -1000.0

    start = [int(c) - edge // 2 for c in center]
    out = np.full((edge, edge, edge), fill, dtype=vol.voxels.dtype)
    src, dst = [], []
    for axis, s in enumerate(start):
        lo, hi = max(s, 0), min(s + edge, vol.dims[axis])
        if lo >= hi:
            raise InvalidInputError(f"crop centered at {center} misses the volume")
        src.append(slice(lo, hi))
        dst.append(slice(lo - s, hi - s))
    out[tuple(dst)] = vol.voxels[tuple(src)]

    origin = vol.affine @ np.array([*start, 1.0])
    return replace(vol, voxels=out, origin=tuple(float(o) for o in origin[:3]))
