import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.ndimage import distance_transform_edt, gaussian_filter

from src.exceptions import InvalidInputError
from src.lesions.params import LesionSamplingParams
from src.lesions.schema import Heterogeneity
from src.lesions.spec import LesionSpec
from src.synth.noise import value_noise
from src.volume.geometry import bounding_box
from src.volume.morphology import dilate


@dataclass(frozen=True)
class RingStats:
    """HU statistics of the organ tissue in a shell around the lesion."""

    mean: float
    std: float
    n_voxels: int
    thickness_mm: float


def _padded_box(mask: np.ndarray, pad_mm: float, spacing: Sequence[float]) -> Tuple[slice, ...]:
    box = bounding_box(mask)
    if box is None:
        raise InvalidInputError("lesion mask is empty")
    padded = []
    for sl, n, s in zip(box, mask.shape, spacing):
        pad = int(math.ceil(pad_mm / s)) + 1
        padded.append(slice(max(0, sl.start - pad), min(n, sl.stop + pad)))
    return tuple(padded)


def ring_stats(image: np.ndarray, lesion_mask: np.ndarray, organ_mask: np.ndarray, thickness_mm: float,
               spacing: Sequence[float] = (1.0, 1.0, 1.0)) -> RingStats:
    """
    Mean and std of the organ voxels in a shell of given thickness around the lesion.

    When the organ-restricted shell is empty the shell widens (x2, x4)
    before the organ restriction is dropped.
    """
    lesion_mask = np.asarray(lesion_mask, dtype=bool)
    box = _padded_box(lesion_mask, 4 * thickness_mm, spacing)
    lesion, organ, values = lesion_mask[box], np.asarray(organ_mask, dtype=bool)[box], image[box]

    shell = None
    for factor in (1, 2, 4):
        candidate = dilate(lesion, thickness_mm * factor, spacing) & ~lesion & organ
        if candidate.any():
            shell, used = candidate, thickness_mm * factor
            break
    if shell is None:
        shell, used = dilate(lesion, thickness_mm, spacing) & ~lesion, thickness_mm
    if not shell.any():
        raise InvalidInputError("no tissue around the lesion to measure")
    ring = values[shell]
    return RingStats(mean=float(ring.mean()), std=float(ring.std()), n_voxels=int(ring.size), thickness_mm=used)


def draw_density_offset(spec: LesionSpec, params: LesionSamplingParams, rng: np.random.Generator) -> float:
    lo, hi = params.density_offsets_hu[spec.density]
    return float(rng.uniform(lo, hi))


def apply_density(image: np.ndarray, lesion_mask: np.ndarray, spec: LesionSpec, ring: RingStats, rng_seed: int,
                  params: LesionSamplingParams, offset: Optional[float] = None) -> np.ndarray:
    """Set lesion voxels to the ring mean shifted by the density option's offset."""
    if offset is None:
        offset = draw_density_offset(spec, params, np.random.default_rng(rng_seed))
    out = np.array(image, dtype=np.float64, copy=True)
    out[np.asarray(lesion_mask, dtype=bool)] = ring.mean + offset
    return out


def draw_heterogeneity_amplitude(spec: LesionSpec, params: LesionSamplingParams,
                                 rng: np.random.Generator) -> float:
    if spec.heterogeneity is Heterogeneity.HOMOGENEOUS:
        return params.homogeneous_noise_std_hu
    lo, hi = params.heterogeneity_amplitude_hu
    return float(rng.uniform(lo, hi))


def apply_heterogeneity(image: np.ndarray, lesion_mask: np.ndarray, spec: LesionSpec, rng_seed: int,
                        params: LesionSamplingParams, spacing: Sequence[float] = (1.0, 1.0, 1.0),
                        amplitude: Optional[float] = None) -> np.ndarray:
    """
    Add texture inside the lesion.

    Homogeneous lesions get white noise of std `homogeneous_noise_std_hu`.
    Heterogeneous lesions get value noise standardized over the lesion and
    scaled so its in-lesion standard deviation equals the amplitude; the
    lesion mean is left unchanged.
    """
    rng = np.random.default_rng(rng_seed)
    if amplitude is None:
        amplitude = draw_heterogeneity_amplitude(spec, params, rng)
    out = np.array(image, dtype=np.float64, copy=True)
    mask = np.asarray(lesion_mask, dtype=bool)
    if amplitude == 0 or not mask.any():
        return out

    if spec.heterogeneity is Heterogeneity.HOMOGENEOUS:
        out[mask] += rng.normal(0.0, amplitude, size=int(mask.sum()))
        return out

    box = bounding_box(mask)
    local_mask = mask[box]
    field = value_noise(local_mask.shape, spacing, params.noise_lattice_mm, rng)[local_mask]
    spread = field.std()
    texture = (field - field.mean()) / spread if spread > 1e-12 else np.zeros_like(field)
    view = out[box]
    view[local_mask] += amplitude * texture
    return out


def draw_blur_sigma(spec: LesionSpec, params: LesionSamplingParams, rng: np.random.Generator) -> float:
    lo, hi = params.blur_sigma_mm[spec.surface]
    return float(rng.uniform(lo, hi))


def apply_surface(image: np.ndarray, background: np.ndarray, lesion_mask: np.ndarray, sigma_mm: float,
                  spacing: Sequence[float] = (1.0, 1.0, 1.0)) -> np.ndarray:
    """
    Feather the lesion into the background across a Gaussian-blurred margin.

    The lesion contrast (image - background) is extended outward from the
    nearest lesion voxel and weighted by the blurred lesion mask; lesion
    voxels keep full weight. Voxels farther than 3 sigma from the lesion
    keep their background value.

    Args:
        image: Template with lesion intensities written inside the mask
        background: Template before any lesion edit
        lesion_mask: Lesion voxels
        sigma_mm: Blur standard deviation; 0 keeps a hard edge
        spacing: Voxel spacing in mm
    """
    out = np.array(image, dtype=np.float64, copy=True)
    mask = np.asarray(lesion_mask, dtype=bool)
    if sigma_mm <= 0 or not mask.any():
        return out

    box = _padded_box(mask, 3.0 * sigma_mm, spacing)
    local_mask = mask[box]
    contrast = out[box] - background[box]
    distance, indices = distance_transform_edt(~local_mask, sampling=spacing, return_indices=True)
    extended = contrast[tuple(indices)]

    alpha = gaussian_filter(local_mask.astype(np.float64), sigma=[sigma_mm / s for s in spacing],
                            mode="constant", truncate=4.0)
    alpha[local_mask] = 1.0
    alpha[distance > 3.0 * sigma_mm] = 0.0
    out[box] = background[box] + alpha * extended
    return out
