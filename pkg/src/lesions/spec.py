from typing import Dict, Optional, Sequence, Tuple, TypeVar, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from src.exceptions import InvalidInputError
from src.lesions.params import SamplingParams
from src.lesions.schema import (
    BENIGN_TYPES,
    LESION_CLASS_IDS,
    LESION_ORGAN,
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

E = TypeVar("E")


class LesionSpec(BaseModel):
    """One sampled realization of the structured attributes plus a geometry seed."""

    model_config = ConfigDict(frozen=True)

    lesion_type: LesionType
    organ: Organ
    enhancement: Enhancement
    # (Z, X, Y) extents in mm
    size_mm: Tuple[float, float, float]
    shape: Shape
    density: Density
    heterogeneity: Heterogeneity
    surface: Surface
    invasion: Invasion
    seed: int

    @model_validator(mode="after")
    def _consistent(self) -> "LesionSpec":
        if self.organ is not LESION_ORGAN[self.lesion_type]:
            raise ValueError(f"{self.lesion_type.value} belongs to {LESION_ORGAN[self.lesion_type].value}, not {self.organ.value}")
        if any(not np.isfinite(s) or s <= 0 for s in self.size_mm):
            raise ValueError(f"size components must be positive, got {self.size_mm}")
        if self.lesion_type in BENIGN_TYPES and self.invasion is not Invasion.NONE:
            raise ValueError(f"benign {self.lesion_type.value} cannot invade adjacent structures")
        if self.shape not in SHAPE_FAMILIES[self.lesion_type]:
            raise ValueError(f"shape '{self.shape.value}' is not used for {self.lesion_type.value}")
        return self

    @property
    def class_id(self) -> int:
        return LESION_CLASS_IDS[self.lesion_type]

    @property
    def is_benign(self) -> bool:
        return self.lesion_type in BENIGN_TYPES

    def extents_xyz(self) -> Tuple[float, float, float]:
        """Extents along voxel axes 0, 1, 2 (right-left, anterior-posterior, inferior-superior)."""
        z, x, y = self.size_mm
        return (x, y, z)


def draw_option(rng: np.random.Generator, weights: Dict[E, float]) -> E:
    """Categorical draw; options are taken in their enum declaration order."""
    options = sorted(weights, key=lambda o: list(type(o)).index(o))
    probs = np.array([weights[o] for o in options], dtype=np.float64)
    return options[int(rng.choice(len(options), p=probs / probs.sum()))]


def sample_spec(
    lesion_type: Union[LesionType, str],
    params: SamplingParams,
    rng_seed: int,
    enhancement: Optional[Enhancement] = None,
) -> LesionSpec:
    """
    Draw a LesionSpec for one lesion type.

    Sizes are i.i.d. log-normal per axis, clamped to the type's bounds and
    rounded to 0.1 mm. Benign types never invade.

    Args:
        lesion_type: One of the 15 lesion types
        params: Sampling parameters holding an entry for the type
        rng_seed: Seed; equal seeds give equal specs
        enhancement: Template phase; drawn from the type's modalities when omitted

    Returns:
        LesionSpec: Validated spec
    """
    lesion_type = LesionType.parse(lesion_type) if not isinstance(lesion_type, LesionType) else lesion_type
    p = params.for_type(lesion_type)
    rng = np.random.default_rng(rng_seed)

    lo, hi = p.size_bounds_mm
    sizes = rng.lognormal(mean=np.array(p.size_mu), sigma=np.array(p.size_sigma))
    sizes = np.clip(np.round(np.clip(sizes, lo, hi), 1), lo, hi)

    shape = draw_option(rng, p.shape_weights)
    density = draw_option(rng, p.density_weights)
    heterogeneity = draw_option(rng, p.heterogeneity_weights)
    surface = draw_option(rng, p.surface_weights)
    invasion = draw_option(rng, p.invasion_weights)
    if lesion_type in BENIGN_TYPES:
        invasion = Invasion.NONE

    allowed = TEMPLATE_MODALITIES[lesion_type]
    if enhancement is None:
        enhancement = allowed[int(rng.integers(len(allowed)))]
    elif Enhancement(enhancement) not in allowed:
        raise InvalidInputError(f"{lesion_type.value} is not simulated on {Enhancement(enhancement).value}")

    return LesionSpec(
        lesion_type=lesion_type,
        organ=LESION_ORGAN[lesion_type],
        enhancement=enhancement,
        size_mm=tuple(float(s) for s in sizes),
        shape=shape,
        density=density,
        heterogeneity=heterogeneity,
        surface=surface,
        invasion=invasion,
        seed=int(rng_seed),
    )
