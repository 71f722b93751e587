from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.ndimage import binary_fill_holes

from src.exceptions import PlacementError, ShapeError
from src.lesions.params import LesionSamplingParams
from src.lesions.schema import Shape
from src.lesions.spec import LesionSpec
from src.synth.noise import local_offsets, radial_noise
from src.volume.morphology import distance_to_background, distance_to_foreground, erode

Voxel = Tuple[int, int, int]


@dataclass
class ShapeResult:
    mask: np.ndarray
    center: Voxel
    foci: int = 1


def place_lesion(organ_mask: np.ndarray, spec: LesionSpec, rng_seed: int,
                 spacing: Sequence[float] = (1.0, 1.0, 1.0)) -> Voxel:
    """
    Draw a lesion center uniformly from the organ eroded by half the lesion's smallest extent.

    The erosion radius never drops below 1 mm.
    """
    radius = max(1.0, min(spec.size_mm) / 2.0)
    candidates = np.flatnonzero(erode(organ_mask, radius, spacing))
    if candidates.size == 0:
        raise PlacementError(spec.organ.value, spec.size_mm)
    rng = np.random.default_rng(rng_seed)
    chosen = candidates[int(rng.integers(candidates.size))]
    return tuple(int(i) for i in np.unravel_index(chosen, organ_mask.shape))


def _ellipsoid(center: Voxel, semi_axes: np.ndarray, shape: Sequence[int], spacing: Sequence[float],
               margin: float = 1.0) -> Tuple[Tuple[slice, ...], Tuple[np.ndarray, ...], np.ndarray]:
    box, (dx, dy, dz) = local_offsets(center, semi_axes * margin, shape, spacing)
    radius = np.sqrt((dx / semi_axes[0]) ** 2 + (dy / semi_axes[1]) ** 2 + (dz / semi_axes[2]) ** 2)
    return box, (dx, dy, dz), radius


def _round_like(center: Voxel, semi: np.ndarray, shape, spacing) -> np.ndarray:
    mask = np.zeros(shape, dtype=bool)
    box, _, radius = _ellipsoid(center, semi, shape, spacing)
    mask[box] = radius <= 1.0
    return mask


def _irregular(center: Voxel, semi: np.ndarray, shape, spacing, amplitude: float,
               rng: np.random.Generator) -> np.ndarray:
    if amplitude == 0:
        return _round_like(center, semi, shape, spacing)
    mask = np.zeros(shape, dtype=bool)
    box, (dx, dy, dz), radius = _ellipsoid(center, semi, shape, spacing, margin=1.0 + amplitude)
    normalized = np.stack(np.broadcast_arrays(dx / semi[0], dy / semi[1], dz / semi[2]), axis=-1)
    norm = np.linalg.norm(normalized, axis=-1, keepdims=True)
    directions = np.divide(normalized, norm, out=np.zeros_like(normalized), where=norm > 0)
    boundary = 1.0 + amplitude * radial_noise(directions, rng)
    mask[box] = radius <= boundary
    return mask


def _punctate(center: Voxel, semi: np.ndarray, shape, spacing, max_foci: int,
              rng: np.random.Generator) -> Tuple[np.ndarray, int]:
    mask = np.zeros(shape, dtype=bool)
    count = int(rng.integers(1, max_foci + 1))
    base_radius = max(float(semi.min()) / 2.0, float(max(spacing)))
    for index in range(count):
        focus_radius = base_radius * rng.uniform(0.7, 1.0)
        room = np.maximum(semi - focus_radius, 0.0)
        offset = np.zeros(3)
        # First focus sits on the center so the mask always contains it
        if index > 0 and room.max() > 0:
            for _ in range(100):
                trial = rng.uniform(-1.0, 1.0, size=3)
                if np.sum(trial ** 2) <= 1.0:
                    offset = trial * room
                    break
        focus_center = tuple(
            int(np.clip(round(c + o / s), 0, n - 1)) for c, o, s, n in zip(center, offset, spacing, shape)
        )
        box, (dx, dy, dz) = local_offsets(focus_center, [focus_radius] * 3, shape, spacing)
        mask[box] |= dx ** 2 + dy ** 2 + dz ** 2 <= focus_radius ** 2
    return mask, count


def _wall_band(organ_mask: np.ndarray, image: Optional[np.ndarray], thickness_mm: float,
               spacing: Sequence[float], lumen_hu: float) -> np.ndarray:
    lumen = binary_fill_holes(organ_mask) & ~organ_mask
    if image is not None:
        lumen |= organ_mask & (image < lumen_hu)
    if lumen.any():
        distance = distance_to_foreground(lumen, spacing)
        organ_wall = organ_mask & ~lumen
    else:
        distance = distance_to_background(organ_mask, spacing)
        organ_wall = organ_mask
    return organ_wall & (distance <= thickness_mm)


def _wall_thickening(center: Voxel, semi: np.ndarray, shape, spacing, organ_mask: np.ndarray,
                     image: Optional[np.ndarray], lumen_hu: float) -> Tuple[np.ndarray, Voxel]:
    thickness = max(float(semi.min()), 1.5 * float(max(spacing)))
    band = _wall_band(organ_mask, image, thickness, spacing, lumen_hu)
    if not band.any():
        raise ShapeError("wall thickening requested on an organ with no computable wall")
    coords = np.argwhere(band)
    distances = np.sum(((coords - np.array(center)) * np.array(spacing)) ** 2, axis=1)
    snapped = tuple(int(i) for i in coords[int(np.argmin(distances))])
    return _round_like(snapped, semi, shape, spacing) & band, snapped


def make_shape_mask(spec: LesionSpec, center: Voxel, grid_shape: Sequence[int], organ_mask: np.ndarray,
                    rng_seed: int, params: LesionSamplingParams,
                    spacing: Sequence[float] = (1.0, 1.0, 1.0),
                    image: Optional[np.ndarray] = None) -> ShapeResult:
    """
    Build the pre-blur lesion mask for the lesion spec's shape option.

    Args:
        spec: Lesion spec; extents give the ellipsoid semi-axes
        center: Lesion center voxel inside the organ
        grid_shape: Voxel counts of the template grid
        organ_mask: Target organ mask (used by wall thickening)
        rng_seed: Seed for noise and foci
        params: Type parameters (irregularity, foci count, lumen threshold)
        spacing: Voxel spacing in mm
        image: Template HU, used to find a gas-filled lumen

    Returns:
        ShapeResult: Mask, effective center and foci count
    """
    grid_shape = tuple(int(n) for n in grid_shape)
    semi = np.array(spec.extents_xyz(), dtype=np.float64) / 2.0
    rng = np.random.default_rng(rng_seed)

    if spec.shape is Shape.ROUND_LIKE:
        return ShapeResult(_round_like(center, semi, grid_shape, spacing), center)
    if spec.shape is Shape.IRREGULAR:
        mask = _irregular(center, semi, grid_shape, spacing, params.irregularity, rng)
        return ShapeResult(mask, center)
    if spec.shape is Shape.PUNCTATE_NODULAR:
        mask, count = _punctate(center, semi, grid_shape, spacing, params.max_foci, rng)
        return ShapeResult(mask, center, foci=count)
    mask, snapped = _wall_thickening(center, semi, grid_shape, spacing, np.asarray(organ_mask, dtype=bool),
                                     image, params.lumen_hu)
    return ShapeResult(mask, snapped)
