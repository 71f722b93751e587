import json
import math
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

from pydantic import BaseModel, Field, field_validator, model_validator

from src.exceptions import InvalidInputError
from src.lesions.schema import (
    BENIGN_TYPES,
    SHAPE_FAMILIES,
    Density,
    Heterogeneity,
    Invasion,
    LesionType,
    Shape,
    Surface,
)

Bounds = Tuple[float, float]
AxisTriple = Tuple[float, float, float]


def _check_weights(weights: Dict, name: str) -> Dict:
    if not weights:
        raise ValueError(f"{name} must not be empty")
    if any(w < 0 for w in weights.values()):
        raise ValueError(f"{name} must be non-negative")
    if abs(sum(weights.values()) - 1.0) > 1e-6:
        raise ValueError(f"{name} must sum to 1, got {sum(weights.values()):.6f}")
    return weights


def _check_bounds(bounds: Bounds, name: str) -> Bounds:
    if bounds[0] > bounds[1]:
        raise ValueError(f"{name} bounds out of order: {bounds}")
    return bounds


class LesionSamplingParams(BaseModel):
    """Sampling and synthesis parameters for one lesion type."""

    # Log-normal size model per axis, in (Z, X, Y) order
    size_mu: AxisTriple
    size_sigma: AxisTriple
    size_bounds_mm: Bounds = (3.0, 120.0)

    shape_weights: Dict[Shape, float]
    density_weights: Dict[Density, float]
    heterogeneity_weights: Dict[Heterogeneity, float]
    surface_weights: Dict[Surface, float]
    invasion_weights: Dict[Invasion, float]

    density_offsets_hu: Dict[Density, Bounds] = Field(default_factory=lambda: {
        Density.HYPODENSE: (-100.0, -20.0),
        Density.ISODENSE: (-5.0, 5.0),
        Density.HYPERDENSE: (20.0, 400.0),
    })
    homogeneous_noise_std_hu: float = Field(3.0, ge=0.0)
    heterogeneity_amplitude_hu: Bounds = (25.0, 60.0)
    blur_sigma_mm: Dict[Surface, Bounds] = Field(default_factory=lambda: {
        Surface.WELL_DEFINED: (0.3, 0.8),
        Surface.ILL_DEFINED: (1.5, 4.0),
    })
    invasion_depth_mm: Bounds = (2.0, 10.0)

    # Shape construction
    irregularity: float = Field(0.3, ge=0.0, lt=1.0)
    max_foci: int = Field(4, ge=1)
    noise_lattice_mm: float = Field(8.0, gt=0.0)
    ring_thickness_mm: float = Field(3.0, gt=0.0)
    lumen_hu: float = -200.0

    @field_validator("size_sigma")
    @classmethod
    def _positive_sigma(cls, value: AxisTriple) -> AxisTriple:
        if any(s <= 0 for s in value):
            raise ValueError("size_sigma must be > 0 on every axis")
        return value

    @field_validator("size_bounds_mm")
    @classmethod
    def _size_bounds(cls, value: Bounds) -> Bounds:
        if value[0] <= 0:
            raise ValueError("size bounds must be positive")
        return _check_bounds(value, "size")

    @field_validator("heterogeneity_amplitude_hu", "invasion_depth_mm")
    @classmethod
    def _ordered(cls, value: Bounds) -> Bounds:
        if value[0] < 0:
            raise ValueError("amplitude and depth bounds must be >= 0")
        return _check_bounds(value, "range")

    @model_validator(mode="after")
    def _validate(self) -> "LesionSamplingParams":
        for name in ("shape_weights", "density_weights", "heterogeneity_weights",
                     "surface_weights", "invasion_weights"):
            _check_weights(getattr(self, name), name)
        for density in Density:
            if density not in self.density_offsets_hu:
                raise ValueError(f"missing density offsets for {density.value}")
            _check_bounds(self.density_offsets_hu[density], density.value)
        lo, hi = self.density_offsets_hu[Density.HYPODENSE]
        if hi >= 0:
            raise ValueError("hypodense offsets must be negative")
        lo, hi = self.density_offsets_hu[Density.HYPERDENSE]
        if lo <= 0:
            raise ValueError("hyperdense offsets must be positive")
        for surface in Surface:
            if surface not in self.blur_sigma_mm:
                raise ValueError(f"missing blur range for {surface.value}")
            lo, hi = _check_bounds(self.blur_sigma_mm[surface], surface.value)
            if lo < 0:
                raise ValueError("blur sigma must be >= 0")
        return self


class SamplingParams(BaseModel):
    """Per-lesion-type parameters, keyed by lesion type."""

    types: Dict[LesionType, LesionSamplingParams]

    @model_validator(mode="after")
    def _shape_families(self) -> "SamplingParams":
        for lesion_type, params in self.types.items():
            allowed = SHAPE_FAMILIES[lesion_type]
            bad = [s.value for s, w in params.shape_weights.items() if w > 0 and s not in allowed]
            if bad:
                raise ValueError(f"{lesion_type.value}: shapes {bad} outside the type's shape family")
            if lesion_type in BENIGN_TYPES and params.invasion_weights.get(Invasion.CLOSE, 0.0) > 0:
                raise ValueError(f"{lesion_type.value} is benign and cannot invade")
        return self

    def for_type(self, lesion_type: LesionType) -> LesionSamplingParams:
        try:
            return self.types[LesionType(lesion_type)]
        except (KeyError, ValueError):
            raise InvalidInputError(f"no sampling parameters for lesion type {lesion_type!r}")


def _lesion(median_zxy: AxisTriple, sigma: float, shapes: Dict[Shape, float],
            densities: Dict[Density, float], hetero: float, ill: float, invade: float,
            **extra) -> dict:
    entry = {
        "size_mu": tuple(math.log(m) for m in median_zxy),
        "size_sigma": (sigma, sigma, sigma),
        "shape_weights": shapes,
        "density_weights": densities,
        "heterogeneity_weights": {Heterogeneity.HOMOGENEOUS: 1.0 - hetero, Heterogeneity.HETEROGENEOUS: hetero},
        "surface_weights": {Surface.WELL_DEFINED: 1.0 - ill, Surface.ILL_DEFINED: ill},
        "invasion_weights": {Invasion.NONE: 1.0 - invade, Invasion.CLOSE: invade},
    }
    entry.update(extra)
    return entry


_R, _I, _W, _P = Shape.ROUND_LIKE, Shape.IRREGULAR, Shape.WALL_THICKENING, Shape.PUNCTATE_NODULAR
_HYPO, _ISO, _HYPER = Density.HYPODENSE, Density.ISODENSE, Density.HYPERDENSE

# Illustrative defaults, not fitted to clinical data
_DEFAULTS = {
    LesionType.LUNG_TUMOR: _lesion((22, 22, 22), 0.45, {_R: 0.4, _I: 0.5, _P: 0.1},
                                   {_HYPER: 1.0}, 0.3, 0.4, 0.3),
    LesionType.LIVER_TUMOR: _lesion((30, 30, 30), 0.5, {_R: 0.5, _I: 0.4, _P: 0.1},
                                    {_HYPO: 0.8, _ISO: 0.1, _HYPER: 0.1}, 0.5, 0.5, 0.2),
    LesionType.GALLBLADDER_CANCER: _lesion((22, 22, 22), 0.4, {_R: 0.2, _I: 0.4, _W: 0.4},
                                           {_HYPO: 0.3, _ISO: 0.4, _HYPER: 0.3}, 0.5, 0.6, 0.4),
    LesionType.PANCREAS_TUMOR: _lesion((25, 25, 25), 0.35, {_R: 0.3, _I: 0.7},
                                       {_HYPO: 0.8, _ISO: 0.2}, 0.5, 0.7, 0.4),
    LesionType.ESOPHAGEAL_CANCER: _lesion((40, 22, 22), 0.35, {_I: 0.3, _W: 0.7},
                                          {_HYPO: 0.2, _ISO: 0.6, _HYPER: 0.2}, 0.5, 0.6, 0.5),
    LesionType.GASTRIC_CANCER: _lesion((30, 40, 38), 0.35, {_I: 0.3, _W: 0.7},
                                       {_HYPO: 0.2, _ISO: 0.5, _HYPER: 0.3}, 0.5, 0.6, 0.5),
    LesionType.COLORECTAL_CANCER: _lesion((35, 30, 30), 0.35, {_I: 0.4, _W: 0.6},
                                          {_HYPO: 0.2, _ISO: 0.5, _HYPER: 0.3}, 0.5, 0.6, 0.5),
    LesionType.KIDNEY_TUMOR: _lesion((30, 30, 30), 0.45, {_R: 0.6, _I: 0.4},
                                     {_HYPO: 0.6, _ISO: 0.2, _HYPER: 0.2}, 0.6, 0.3, 0.2),
    LesionType.BLADDER_CANCER: _lesion((25, 25, 25), 0.4, {_R: 0.2, _I: 0.4, _W: 0.4},
                                       {_ISO: 0.5, _HYPER: 0.5}, 0.4, 0.5, 0.3),
    LesionType.BONE_METASTASIS: _lesion((18, 18, 18), 0.45, {_R: 0.3, _I: 0.5, _P: 0.2},
                                        {_HYPO: 0.5, _HYPER: 0.5}, 0.6, 0.6, 0.3),
    LesionType.LIVER_CYST: _lesion((15, 15, 15), 0.5, {_R: 0.9, _I: 0.1},
                                   {_HYPO: 1.0}, 0.0, 0.05, 0.0),
    LesionType.GALLSTONE: _lesion((8, 8, 8), 0.4, {_R: 0.6, _P: 0.4},
                                  {_HYPER: 1.0}, 0.1, 0.0, 0.0,
                                  density_offsets_hu={_HYPO: (-100.0, -20.0), _ISO: (-5.0, 5.0),
                                                      _HYPER: (150.0, 400.0)}),
    LesionType.PANCREAS_CYST: _lesion((15, 15, 15), 0.45, {_R: 0.8, _I: 0.2},
                                      {_HYPO: 1.0}, 0.1, 0.1, 0.0),
    LesionType.KIDNEY_CYST: _lesion((18, 18, 18), 0.5, {_R: 1.0},
                                    {_HYPO: 1.0}, 0.0, 0.05, 0.0),
    LesionType.KIDNEY_STONE: _lesion((6, 6, 6), 0.4, {_R: 0.5, _P: 0.5},
                                     {_HYPER: 1.0}, 0.0, 0.0, 0.0,
                                     density_offsets_hu={_HYPO: (-100.0, -20.0), _ISO: (-5.0, 5.0),
                                                         _HYPER: (200.0, 400.0)}),
}


def default_sampling_params() -> SamplingParams:
    return SamplingParams.model_validate({"types": _DEFAULTS})


def load_sampling_params(path: Optional[Union[str, Path]] = None) -> SamplingParams:
    """
    Load sampling parameters, overlaying a JSON file on the defaults.

    The file holds {"types": {"<lesion type>": {<field>: value, ...}}};
    fields not given keep their default.
    """
    if path is None:
        return default_sampling_params()
    try:
        overrides = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise InvalidInputError(f"cannot read sampling params {path}: {e}") from e

    merged = default_sampling_params().model_dump(mode="json")
    for name, fields in overrides.get("types", {}).items():
        key = LesionType.parse(name).value
        merged["types"].setdefault(key, {}).update(fields)
    try:
        return SamplingParams.model_validate(merged)
    except ValueError as e:
        raise InvalidInputError(f"invalid sampling params {path}: {e}") from e
