from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterator, Optional, Tuple, Union

import logfire
import numpy as np
from pydantic import BaseModel, ConfigDict

from src.curation.records import ScanRecord
from src.exceptions import InvalidInputError, PlacementError, ShapeError, SynthesisStageError
from src.lesions.params import LesionSamplingParams
from src.lesions.report import StructuredReport, render_report
from src.lesions.schema import ORGAN_CLASS_IDS, Organ
from src.lesions.spec import LesionSpec
from src.synth.intensity import (
    apply_density,
    apply_heterogeneity,
    apply_surface,
    draw_blur_sigma,
    draw_density_offset,
    draw_heterogeneity_amplitude,
    ring_stats,
)
from src.synth.invasion import apply_invasion, draw_invasion_depth
from src.synth.labels import compose_labels
from src.synth.shapes import make_shape_mask, place_lesion
from src.utils.io_utils import write_json_atomic
from src.utils.seeding import derive_seed, make_rng
from src.volume import (
    LabelMap,
    Volume3D,
    bounding_box,
    canonicalize_orientation,
    crop_around,
    load_label_map,
    load_volume,
    mask_volume_mm3,
    resample_isotropic_1mm,
    resample_labels_isotropic,
    save_label_map,
    save_volume,
)

PathLike = Union[str, Path]

MIN_ORGAN_VOLUME_MM3 = 4000.0


@dataclass
class TemplateScan:
    """A curated healthy scan on the canonical 1 mm grid."""

    scan_id: str
    image: Volume3D
    labels: LabelMap


def load_template(record: ScanRecord, base_dir: Optional[PathLike] = None, grid: int = 0,
                  organ: Optional[Organ] = None) -> TemplateScan:
    """
    Read a template scan, canonicalize it and resample to 1 mm.

    Args:
        record: Curated scan record
        base_dir: Directory the record's relative paths are resolved against
        grid: Cube edge in voxels to crop around the organ; 0 keeps the whole volume
        organ: Organ whose bounding-box center anchors the crop

    Returns:
        TemplateScan: Image and label map on the same canonical grid
    """
    with logfire.span('load template', scan_id=record.scan_id, grid=grid):
        image = resample_isotropic_1mm(canonicalize_orientation(load_volume(record.resolve("image", base_dir))))
        labels = resample_labels_isotropic(
            canonicalize_orientation(load_label_map(record.resolve("labels", base_dir)))
        )
        if not image.same_grid(labels):
            raise InvalidInputError(f"scan {record.scan_id}: image and label map grids differ after resampling")

        if grid > 0:
            anchor = labels.mask(ORGAN_CLASS_IDS[organ]) if organ is not None else labels.voxels > 0
            box = bounding_box(anchor)
            if box is None:
                center = tuple(n // 2 for n in labels.dims)
            else:
                center = tuple((sl.start + sl.stop - 1) // 2 for sl in box)
            image = crop_around(image, center, grid)
            labels = crop_around(labels, center, grid)
        return TemplateScan(record.scan_id, image, labels)


class Provenance(BaseModel):
    """Everything needed to trace a sample back to its inputs and sampled values."""

    model_config = ConfigDict(frozen=True)

    template_id: str
    spec: LesionSpec
    seed: int
    center: Tuple[int, int, int]
    grid_shape: Tuple[int, int, int]
    ring_mean_hu: float
    ring_std_hu: float
    density_offset_hu: float
    heterogeneity_amplitude_hu: float
    blur_sigma_mm: float
    invasion_depth_mm: float = 0.0
    invasion_direction: Optional[Tuple[float, float, float]] = None
    foci: int = 1
    lesion_voxels: int
    refined: bool = False


@dataclass
class SynthSample:
    image: Volume3D
    labels: LabelMap
    report: StructuredReport
    provenance: Provenance

    @property
    def lesion_mask(self) -> np.ndarray:
        return self.labels.voxels == self.provenance.spec.class_id


@contextmanager
def _stage(name: str, **attributes) -> Iterator[None]:
    with logfire.span('synth stage {stage}', stage=name, **attributes):
        try:
            yield
        except SynthesisStageError:
            raise
        except Exception as e:
            raise SynthesisStageError(name, e) from e


def synthesize(template: TemplateScan, spec: LesionSpec, params: LesionSamplingParams) -> SynthSample:
    """
    Generate one lesion on a healthy template.

    Stages run in the order place, shape, invasion, density, heterogeneity,
    surface, compose. Mask geometry is settled before any intensity is
    written, so the density, texture and margin apply to the final lesion
    footprint. Every stage draws from its own stream derived from the lesion spec
    seed, so the output depends only on (template, spec, params).

    Raises:
        SynthesisStageError: Any stage failure, tagged with the stage name
    """
    spacing = template.image.spacing
    background = template.image.voxels.astype(np.float64)
    organ_mask = template.labels.mask(ORGAN_CLASS_IDS[spec.organ])

    with logfire.span('synthesize {lesion_type}', lesion_type=spec.lesion_type.value,
                      template_id=template.scan_id, seed=spec.seed):
        with _stage("place"):
            organ_volume = mask_volume_mm3(organ_mask, spacing)
            if organ_volume <= MIN_ORGAN_VOLUME_MM3:
                raise PlacementError(spec.organ.value, spec.size_mm)
            center = place_lesion(organ_mask, spec, derive_seed(spec.seed, "place"), spacing)

        with _stage("shape"):
            shape = make_shape_mask(spec, center, template.image.dims, organ_mask,
                                    derive_seed(spec.seed, "shape"), params, spacing, background)

        with _stage("invasion"):
            depth = draw_invasion_depth(spec, params, make_rng(spec.seed, "invasion", "depth"))
            invasion = apply_invasion(shape.mask, organ_mask, spec, derive_seed(spec.seed, "invasion"),
                                      params, spacing, depth_mm=depth)
            lesion_mask = invasion.mask
            if not lesion_mask.any():
                raise ShapeError("lesion mask is empty after organ clipping")

        with _stage("density"):
            ring = ring_stats(background, lesion_mask, organ_mask, params.ring_thickness_mm, spacing)
            offset = draw_density_offset(spec, params, make_rng(spec.seed, "density"))
            image = apply_density(background, lesion_mask, spec, ring, derive_seed(spec.seed, "density"),
                                  params, offset=offset)

        with _stage("heterogeneity"):
            texture_rng = make_rng(spec.seed, "heterogeneity", "amplitude")
            amplitude = draw_heterogeneity_amplitude(spec, params, texture_rng)
            image = apply_heterogeneity(image, lesion_mask, spec, derive_seed(spec.seed, "heterogeneity"),
                                        params, spacing, amplitude=amplitude)

        with _stage("surface"):
            sigma = draw_blur_sigma(spec, params, make_rng(spec.seed, "surface"))
            image = apply_surface(image, background, lesion_mask, sigma, spacing)

        with _stage("compose"):
            labels = compose_labels(template.labels, lesion_mask, spec.lesion_type)
            report = render_report(spec)

        provenance = Provenance(
            template_id=template.scan_id,
            spec=spec,
            seed=spec.seed,
            center=shape.center,
            grid_shape=template.image.dims,
            ring_mean_hu=ring.mean,
            ring_std_hu=ring.std,
            density_offset_hu=offset,
            heterogeneity_amplitude_hu=amplitude,
            blur_sigma_mm=sigma,
            invasion_depth_mm=invasion.depth_mm,
            invasion_direction=invasion.direction,
            foci=shape.foci,
            lesion_voxels=int(lesion_mask.sum()),
        )
        logfire.info('Lesion synthesized', lesion_voxels=provenance.lesion_voxels, ring_mean_hu=ring.mean)
        return SynthSample(template.image.with_voxels(image), labels, report, provenance)


SAMPLE_ARTIFACTS = ("image", "labels", "report", "provenance")


def save_sample(sample: SynthSample, directory: PathLike) -> Dict[str, Path]:
    """Write image, labels, report and provenance for one sample; each file appears atomically."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {
        "image": save_volume(sample.image, directory / "image.nii.gz"),
        "labels": save_label_map(sample.labels, directory / "labels.nii.gz"),
        "report": write_json_atomic(directory / "report.json", sample.report.to_json()),
        "provenance": write_json_atomic(directory / "provenance.json",
                                        sample.provenance.model_dump(mode="json")),
    }
    return paths
