import re
from typing import Any, Mapping, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, ValidationError, field_validator

from src.exceptions import InvalidInputError
from src.lesions.schema import (
    CLASSIFIED_ATTRIBUTES,
    LABEL_CARDINALITIES,
    Density,
    Enhancement,
    Heterogeneity,
    Invasion,
    LesionType,
    Organ,
    Shape,
    Surface,
)
from src.lesions.spec import LesionSpec

_SIZE_PATTERN = re.compile(r"^\s*([0-9.eE+-]+)\s*×\s*([0-9.eE+-]+)\s*×\s*([0-9.eE+-]+)\s*mm\s*$")


def format_size(size_mm: Sequence[float]) -> str:
    return "×".join(f"{float(v):g}" for v in size_mm) + " mm"


def parse_size(text: str) -> Tuple[float, float, float]:
    match = _SIZE_PATTERN.match(text)
    if not match:
        raise InvalidInputError(f"size must read 'Z×X×Y mm', got {text!r}")
    return tuple(float(v) for v in match.groups())


class StructuredReport(BaseModel):
    """The eight-attribute lesion report; serializes with these exact keys."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    enhancement: Enhancement
    location: Organ
    size_mm: str
    shape: Shape
    density: Density
    heterogeneity: Heterogeneity
    surface: Surface
    invasion: Invasion

    @field_validator("size_mm")
    @classmethod
    def _size(cls, value: str) -> str:
        sizes = parse_size(value)
        if any(s <= 0 for s in sizes):
            raise ValueError(f"size components must be positive, got {value!r}")
        return value

    def to_json(self) -> dict:
        return self.model_dump(mode="json")


def _as_report(report: Union[StructuredReport, Mapping[str, Any]]) -> StructuredReport:
    if isinstance(report, StructuredReport):
        return report
    try:
        return StructuredReport.model_validate(dict(report))
    except (ValidationError, InvalidInputError) as e:
        raise InvalidInputError(f"invalid structured report: {e}") from e


def render_report(spec: LesionSpec) -> StructuredReport:
    return StructuredReport(
        enhancement=spec.enhancement,
        location=spec.organ,
        size_mm=format_size(spec.size_mm),
        shape=spec.shape,
        density=spec.density,
        heterogeneity=spec.heterogeneity,
        surface=spec.surface,
        invasion=spec.invasion,
    )


def parse_report(report: Union[StructuredReport, Mapping[str, Any]], lesion_type: LesionType, seed: int) -> LesionSpec:
    """Rebuild the lesion spec a report was rendered from; the report itself carries no type or seed."""
    report = _as_report(report)
    try:
        return LesionSpec(
            lesion_type=lesion_type,
            organ=report.location,
            enhancement=report.enhancement,
            size_mm=parse_size(report.size_mm),
            shape=report.shape,
            density=report.density,
            heterogeneity=report.heterogeneity,
            surface=report.surface,
            invasion=report.invasion,
            seed=seed,
        )
    except ValidationError as e:
        raise InvalidInputError(f"report inconsistent with {LesionType(lesion_type).value}: {e}") from e


def report_class_labels(report: Union[StructuredReport, Mapping[str, Any]]) -> Tuple[int, int, int, int, int]:
    """
    Encode shape, density, heterogeneity, surface and invasion as class indices.

    Indices follow the option listing order, giving cardinalities (4, 3, 2, 2, 2).
    """
    report = _as_report(report)
    values = (report.shape, report.density, report.heterogeneity, report.surface, report.invasion)
    return tuple(list(attr).index(value) for attr, value in zip(CLASSIFIED_ATTRIBUTES, values))


def labels_to_options(labels: Sequence[int]) -> Tuple[Shape, Density, Heterogeneity, Surface, Invasion]:
    if len(labels) != len(CLASSIFIED_ATTRIBUTES):
        raise InvalidInputError(f"expected {len(CLASSIFIED_ATTRIBUTES)} labels, got {len(labels)}")
    options = []
    for attr, size, label in zip(CLASSIFIED_ATTRIBUTES, LABEL_CARDINALITIES, labels):
        if not 0 <= int(label) < size:
            raise InvalidInputError(f"label {label} out of range for {attr.__name__}")
        options.append(list(attr)[int(label)])
    return tuple(options)
