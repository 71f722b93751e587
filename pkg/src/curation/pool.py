from collections import Counter
from typing import Dict, Iterable, List, Sequence, Tuple

from pydantic import BaseModel, Field

from src.curation.records import ScanRecord
from src.curation.rules import ScanRange
from src.exceptions import CurationError
from src.lesions.schema import LESION_ORGAN, TEMPLATE_MODALITIES, Enhancement, LesionType, Organ

_THORAX = (ScanRange.THORAX, ScanRange.THORAX_ABDOMEN_PELVIS)
_ABDOMEN = (ScanRange.ABDOMEN_PELVIS, ScanRange.THORAX_ABDOMEN_PELVIS)

# Scan ranges whose coverage contains each target organ
ORGAN_SCAN_RANGES: Dict[Organ, Tuple[ScanRange, ...]] = {
    Organ.LUNG: _THORAX,
    Organ.ESOPHAGUS: _THORAX,
    Organ.LIVER: _ABDOMEN,
    Organ.GALLBLADDER: _ABDOMEN,
    Organ.PANCREAS: _ABDOMEN,
    Organ.STOMACH: _ABDOMEN,
    Organ.COLORECTAL: _ABDOMEN,
    Organ.KIDNEY: _ABDOMEN,
    Organ.BLADDER: _ABDOMEN,
    Organ.BONE: (ScanRange.THORAX, ScanRange.ABDOMEN_PELVIS, ScanRange.THORAX_ABDOMEN_PELVIS),
}


class TemplatePool(BaseModel):
    """Accepted template scans per lesion type, plus the reason a type has none."""

    entries: Dict[LesionType, List[ScanRecord]] = Field(default_factory=dict)
    failures: Dict[LesionType, str] = Field(default_factory=dict)

    def templates(self, lesion_type: LesionType) -> List[ScanRecord]:
        return self.entries.get(LesionType(lesion_type), [])


def _accepts(record: ScanRecord, lesion_type: LesionType) -> bool:
    organ = LESION_ORGAN[lesion_type]
    return (
        record.ok
        and record.modality in TEMPLATE_MODALITIES[lesion_type]
        and record.scan_range in ORGAN_SCAN_RANGES[organ]
        and record.healthy.get(organ, False)
    )


def select_templates(records: Sequence[ScanRecord], lesion_type: LesionType) -> List[ScanRecord]:
    """
    Keep curated records usable as templates for one lesion type.

    A record qualifies when its phase is one of the type's template
    modalities, its scan range covers the target organ and that organ is
    healthy. Input order is preserved.
    """
    lesion_type = LesionType(lesion_type)
    selected = [record for record in records if _accepts(record, lesion_type)]
    if not selected:
        raise CurationError(lesion_type.value, [m.value for m in TEMPLATE_MODALITIES[lesion_type]])
    return selected


def build_template_pool(records: Sequence[ScanRecord], lesion_types: Iterable[LesionType]) -> TemplatePool:
    """Fold select_templates over lesion types, recording empty pools instead of raising."""
    pool = TemplatePool()
    for lesion_type in lesion_types:
        lesion_type = LesionType(lesion_type)
        try:
            pool.entries[lesion_type] = select_templates(records, lesion_type)
        except CurationError as e:
            pool.failures[lesion_type] = str(e)
    return pool


def pool_counts(records: Sequence[ScanRecord]) -> Dict[Tuple[LesionType, Enhancement], int]:
    """Accepted template count per (lesion type, modality)."""
    counts: Counter = Counter()
    for lesion_type in LesionType:
        for record in records:
            if _accepts(record, lesion_type):
                counts[(lesion_type, record.modality)] += 1
    return {
        (lesion_type, modality): counts[(lesion_type, modality)]
        for lesion_type in LesionType
        for modality in TEMPLATE_MODALITIES[lesion_type]
    }
