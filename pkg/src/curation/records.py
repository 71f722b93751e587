import json
import math
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, RootModel, field_validator, model_validator

from src.curation.rules import (
    AORTA,
    IVC,
    RANGE_STRUCTURES,
    ScanRange,
    classify_contrast,
    classify_scan_range,
    is_healthy_organ,
)
from src.exceptions import InvalidInputError
from src.lesions.schema import ORGAN_CLASS_IDS, Enhancement, Organ
from src.volume import canonicalize_orientation, load_label_map, load_volume, mask_volume_mm3

PathLike = Union[str, Path]


class OrganKeywords(RootModel[Dict[Organ, List[str]]]):
    """Keyword vocabulary per organ for the impression search."""

    @field_validator("root")
    @classmethod
    def _non_empty(cls, value: Dict[Organ, List[str]]) -> Dict[Organ, List[str]]:
        for organ in Organ:
            if not value.get(organ):
                raise ValueError(f"no keywords configured for {organ.value}")
        return value


class StructureLabels(RootModel[Dict[str, int]]):
    """Structure name → id in the auxiliary whole-body segmentation map."""

    @field_validator("root")
    @classmethod
    def _required(cls, value: Dict[str, int]) -> Dict[str, int]:
        missing = [name for name in (*RANGE_STRUCTURES, AORTA, IVC) if name not in value]
        if missing:
            raise ValueError(f"structure ids missing for {missing}")
        return value


def load_organ_keywords(path: PathLike) -> Dict[Organ, List[str]]:
    try:
        return OrganKeywords.model_validate_json(Path(path).read_text(encoding="utf-8")).root
    except (OSError, ValueError) as e:
        raise InvalidInputError(f"invalid organ keyword config {path}: {e}") from e


def load_structure_labels(path: PathLike) -> Dict[str, int]:
    try:
        return StructureLabels.model_validate_json(Path(path).read_text(encoding="utf-8")).root
    except (OSError, ValueError) as e:
        raise InvalidInputError(f"invalid structure label config {path}: {e}") from e


class ScanRecord(BaseModel):
    """
    One candidate template scan with its measured and derived fields.

    Paths are stored as given in the input manifest, resolved against the
    manifest's directory when volumes are read.
    """

    scan_id: str
    image: Optional[str] = None
    labels: Optional[str] = None
    structures: Optional[str] = None
    impression: str = ""

    present_structures: List[str] = Field(default_factory=list)
    organ_volumes_mm3: Dict[Organ, float] = Field(default_factory=dict)
    aorta_mean_hu: Optional[float] = None
    ivc_mean_hu: Optional[float] = None

    # Derived during curation
    scan_range: Optional[ScanRange] = None
    modality: Optional[Enhancement] = None
    healthy: Dict[Organ, bool] = Field(default_factory=dict)
    status: str = "pending"
    error: Optional[str] = None

    @field_validator("organ_volumes_mm3")
    @classmethod
    def _volumes(cls, value: Dict[Organ, float]) -> Dict[Organ, float]:
        if any(v < 0 for v in value.values()):
            raise ValueError("structure volumes must be >= 0")
        return value

    @model_validator(mode="after")
    def _hu_finite(self) -> "ScanRecord":
        for name, hu in ((AORTA, self.aorta_mean_hu), (IVC, self.ivc_mean_hu)):
            if name in self.present_structures and hu is not None and not math.isfinite(hu):
                raise ValueError(f"{name} mean HU must be finite")
        return self

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def resolve(self, field: str, base_dir: Optional[PathLike]) -> Path:
        value = getattr(self, field)
        if value is None:
            raise InvalidInputError(f"scan {self.scan_id} has no {field} path")
        path = Path(value)
        if not path.is_absolute() and base_dir is not None:
            path = Path(base_dir) / path
        return path


def build_scan_record(row: Mapping[str, Any], base_dir: Optional[PathLike], structure_ids: Mapping[str, int]) -> ScanRecord:
    """
    Measure a manifest row: organ volumes, structure presence and vessel HU means.

    Presence and HU means come from the auxiliary structure map when the row
    names one, otherwise from the row's own fields.
    """
    if "scan_id" not in row:
        raise InvalidInputError("manifest row lacks scan_id")
    record = ScanRecord.model_validate({k: v for k, v in row.items() if k in ScanRecord.model_fields})
    if row.get("impression_file"):
        impression_path = Path(row["impression_file"])
        if not impression_path.is_absolute() and base_dir is not None:
            impression_path = Path(base_dir) / impression_path
        record = record.model_copy(update={"impression": impression_path.read_text(encoding="utf-8")})

    image = canonicalize_orientation(load_volume(record.resolve("image", base_dir)))
    labels = canonicalize_orientation(load_label_map(record.resolve("labels", base_dir)))
    if not image.same_grid(labels):
        raise InvalidInputError(f"scan {record.scan_id}: image and label map grids differ")

    volumes = {
        organ: mask_volume_mm3(labels.voxels == class_id, labels.spacing)
        for organ, class_id in ORGAN_CLASS_IDS.items()
    }
    update: Dict[str, Any] = {"organ_volumes_mm3": volumes}

    if record.structures is not None:
        structures = canonicalize_orientation(load_volume(record.resolve("structures", base_dir)))
        if structures.dims != image.dims:
            raise InvalidInputError(f"scan {record.scan_id}: structure map grid differs from image")
        ids = np.rint(structures.voxels).astype(np.int64)
        present_ids = set(np.unique(ids).tolist())
        update["present_structures"] = sorted(name for name, sid in structure_ids.items() if sid in present_ids)
        for field, name in (("aorta_mean_hu", AORTA), ("ivc_mean_hu", IVC)):
            vessel = ids == structure_ids[name]
            update[field] = float(image.voxels[vessel].mean()) if vessel.any() else None

    return record.model_copy(update=update)


def curate_record(record: ScanRecord, keywords: Mapping[Organ, List[str]]) -> ScanRecord:
    """Attach scan range, contrast phase and per-organ health flags."""
    healthy = {
        organ: is_healthy_organ(record.organ_volumes_mm3.get(organ, 0.0), record.impression, keywords[organ])
        for organ in Organ
    }
    return record.model_copy(update={
        "scan_range": classify_scan_range(set(record.present_structures)),
        "modality": classify_contrast(record.aorta_mean_hu, record.ivc_mean_hu),
        "healthy": healthy,
        "status": "ok",
        "error": None,
    })


def record_to_row(record: ScanRecord) -> Dict[str, Any]:
    return json.loads(record.model_dump_json())
