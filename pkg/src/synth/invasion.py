import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.ndimage import distance_transform_edt

from src.exceptions import ShapeError
from src.lesions.params import LesionSamplingParams
from src.lesions.schema import Invasion
from src.lesions.spec import LesionSpec
from src.synth.noise import local_offsets
from src.volume.geometry import centroid
from src.volume.morphology import distance_to_foreground

# Half-angle of the invasion sector around the outward direction
SECTOR_HALF_ANGLE_DEG = 30.0


@dataclass
class InvasionResult:
    mask: np.ndarray
    depth_mm: float = 0.0
    direction: Optional[Tuple[float, float, float]] = None


def draw_invasion_depth(spec: LesionSpec, params: LesionSamplingParams, rng: np.random.Generator) -> float:
    if spec.invasion is Invasion.NONE:
        return 0.0
    lo, hi = params.invasion_depth_mm
    return float(rng.uniform(lo, hi))


def apply_invasion(lesion_mask: np.ndarray, organ_mask: np.ndarray, spec: LesionSpec, rng_seed: int,
                   params: LesionSamplingParams, spacing: Sequence[float] = (1.0, 1.0, 1.0),
                   depth_mm: Optional[float] = None) -> InvasionResult:
    """
    Clip the lesion to its organ, or extend it past the organ boundary.

    Invasive lesions grow a contiguous sector from the lesion centroid toward a
    randomly chosen nearby point outside the organ. The sector is a cone of
    30° half-angle, no wider than the lesion's smallest semi-axis, reaching
    at most depth_mm past the organ surface.

    Raises:
        ShapeError: An invasive lesion cannot reach any tissue outside its organ
    """
    lesion = np.asarray(lesion_mask, dtype=bool)
    organ = np.asarray(organ_mask, dtype=bool)
    base = lesion & organ
    if spec.invasion is Invasion.NONE:
        return InvasionResult(base)

    rng = np.random.default_rng(rng_seed)
    if depth_mm is None:
        depth_mm = draw_invasion_depth(spec, params, rng)
    if depth_mm <= 0 or not base.any():
        return InvasionResult(base)
    if organ.all():
        raise ShapeError("invasive lesion has no tissue outside its organ to extend into")

    spacing = np.asarray(spacing, dtype=np.float64)
    center = np.array(centroid(base))
    center_voxel = tuple(int(round(c)) for c in center)

    # Nearest distance from the centroid to tissue outside the organ
    to_outside = distance_transform_edt(organ, sampling=spacing)
    nearest = float(to_outside[center_voxel])
    reach = nearest + depth_mm + float(spacing.max())
    box, offsets = local_offsets(center_voxel, [reach] * 3, organ.shape, spacing)

    local_organ = organ[box]
    dx, dy, dz = (o - (c - cv) * s for o, c, cv, s in zip(offsets, center, center_voxel, spacing))
    distance = np.sqrt(dx ** 2 + dy ** 2 + dz ** 2)
    candidates = np.argwhere(~local_organ & (distance <= nearest + depth_mm))
    if candidates.size == 0:
        raise ShapeError(f"no tissue outside the organ within {depth_mm:.1f} mm of the lesion")

    target = candidates[int(rng.integers(len(candidates)))]
    vector = np.array([dx[target[0], 0, 0], dy[0, target[1], 0], dz[0, 0, target[2]]])
    direction = vector / np.linalg.norm(vector)

    along = dx * direction[0] + dy * direction[1] + dz * direction[2]
    across = np.sqrt(np.maximum(distance ** 2 - along ** 2, 0.0))
    width = max(min(spec.extents_xyz()) / 2.0, float(spacing.max()))
    cone = (along >= 0) & (across <= along * math.tan(math.radians(SECTOR_HALF_ANGLE_DEG)) + float(spacing.max()))
    sector = cone & (across <= width) & (along <= np.linalg.norm(vector) + depth_mm)

    outside_depth = distance_to_foreground(local_organ, spacing)
    allowed = local_organ | (outside_depth <= depth_mm)

    extension = sector & allowed & ~local_organ
    if not extension.any():
        raise ShapeError("invasion sector does not leave the organ")
    mask = base.copy()
    mask[box] |= sector & allowed
    return InvasionResult(mask, depth_mm=float(depth_mm), direction=tuple(float(d) for d in direction))
