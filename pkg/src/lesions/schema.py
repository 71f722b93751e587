"""Structured lesion attributes and the fixed lesion/organ tables."""

from enum import Enum
from typing import Dict, FrozenSet, Tuple

from src.exceptions import InvalidInputError


class Enhancement(str, Enum):
    ENHANCED = "Enhanced CT"
    PLAIN = "Plain CT"


class Organ(str, Enum):
    LUNG = "Lung"
    LIVER = "Liver"
    GALLBLADDER = "Gallbladder"
    PANCREAS = "Pancreas"
    ESOPHAGUS = "Esophagus"
    STOMACH = "Stomach"
    COLORECTAL = "Colorectal"
    KIDNEY = "Kidney"
    BLADDER = "Bladder"
    BONE = "Bone"


class Shape(str, Enum):
    ROUND_LIKE = "Round-like"
    IRREGULAR = "Irregular"
    WALL_THICKENING = "Wall thickening"
    PUNCTATE_NODULAR = "Punctate, nodular"


class Density(str, Enum):
    HYPODENSE = "Hypodense"
    ISODENSE = "Isodense"
    HYPERDENSE = "Hyperdense"


class Heterogeneity(str, Enum):
    HOMOGENEOUS = "Homogeneous"
    HETEROGENEOUS = "Heterogeneous"


class Surface(str, Enum):
    WELL_DEFINED = "Well-defined margin"
    ILL_DEFINED = "Ill-defined margin"


class Invasion(str, Enum):
    NONE = "No close relationship with surrounding structures"
    CLOSE = "Close relationship with adjacent structures"


class LesionType(str, Enum):
    LUNG_TUMOR = "Lung tumor"
    LIVER_TUMOR = "Liver tumor"
    GALLBLADDER_CANCER = "Gallbladder cancer"
    PANCREAS_TUMOR = "Pancreas tumor"
    ESOPHAGEAL_CANCER = "Esophageal Cancer"
    GASTRIC_CANCER = "Gastric cancer"
    COLORECTAL_CANCER = "Colorectal cancer"
    KIDNEY_TUMOR = "Kidney tumor"
    BLADDER_CANCER = "Bladder cancer"
    BONE_METASTASIS = "Bone metastasis"
    LIVER_CYST = "Liver cyst"
    GALLSTONE = "Gallstone"
    PANCREAS_CYST = "Pancreas cyst"
    KIDNEY_CYST = "Kidney cyst"
    KIDNEY_STONE = "Kidney stone"

    @property
    def slug(self) -> str:
        return self.value.lower().replace(" ", "_")

    @classmethod
    def parse(cls, value: str) -> "LesionType":
        """Accept the display name, enum name or slug, case-insensitively."""
        key = str(value).strip().lower().replace("_", " ")
        for member in cls:
            if key in (member.value.lower(), member.name.lower().replace("_", " ")):
                return member
        raise InvalidInputError(f"unknown lesion type {value!r}")


# Order of the label-encoded attributes
CLASSIFIED_ATTRIBUTES = (Shape, Density, Heterogeneity, Surface, Invasion)
LABEL_CARDINALITIES: Tuple[int, ...] = tuple(len(attr) for attr in CLASSIFIED_ATTRIBUTES)

ORGAN_CLASS_IDS: Dict[Organ, int] = {organ: i for i, organ in enumerate(Organ, start=1)}

LESION_CLASS_IDS: Dict[LesionType, int] = {lesion: i for i, lesion in enumerate(LesionType, start=11)}

LESION_ORGAN: Dict[LesionType, Organ] = {
    LesionType.LUNG_TUMOR: Organ.LUNG,
    LesionType.LIVER_TUMOR: Organ.LIVER,
    LesionType.GALLBLADDER_CANCER: Organ.GALLBLADDER,
    LesionType.PANCREAS_TUMOR: Organ.PANCREAS,
    LesionType.ESOPHAGEAL_CANCER: Organ.ESOPHAGUS,
    LesionType.GASTRIC_CANCER: Organ.STOMACH,
    LesionType.COLORECTAL_CANCER: Organ.COLORECTAL,
    LesionType.KIDNEY_TUMOR: Organ.KIDNEY,
    LesionType.BLADDER_CANCER: Organ.BLADDER,
    LesionType.BONE_METASTASIS: Organ.BONE,
    LesionType.LIVER_CYST: Organ.LIVER,
    LesionType.GALLSTONE: Organ.GALLBLADDER,
    LesionType.PANCREAS_CYST: Organ.PANCREAS,
    LesionType.KIDNEY_CYST: Organ.KIDNEY,
    LesionType.KIDNEY_STONE: Organ.KIDNEY,
}

BENIGN_TYPES: FrozenSet[LesionType] = frozenset({
    LesionType.LIVER_CYST,
    LesionType.GALLSTONE,
    LesionType.PANCREAS_CYST,
    LesionType.KIDNEY_CYST,
    LesionType.KIDNEY_STONE,
})

_BOTH = (Enhancement.ENHANCED, Enhancement.PLAIN)

# Template modality per lesion type
TEMPLATE_MODALITIES: Dict[LesionType, Tuple[Enhancement, ...]] = {
    LesionType.LUNG_TUMOR: (Enhancement.PLAIN,),
    LesionType.LIVER_TUMOR: (Enhancement.ENHANCED,),
    LesionType.GALLBLADDER_CANCER: (Enhancement.ENHANCED,),
    LesionType.PANCREAS_TUMOR: (Enhancement.ENHANCED,),
    LesionType.ESOPHAGEAL_CANCER: (Enhancement.ENHANCED,),
    LesionType.GASTRIC_CANCER: (Enhancement.ENHANCED,),
    LesionType.COLORECTAL_CANCER: (Enhancement.ENHANCED,),
    LesionType.KIDNEY_TUMOR: (Enhancement.ENHANCED,),
    LesionType.BLADDER_CANCER: (Enhancement.ENHANCED,),
    LesionType.BONE_METASTASIS: (Enhancement.ENHANCED,),
    LesionType.LIVER_CYST: _BOTH,
    LesionType.GALLSTONE: _BOTH,
    LesionType.PANCREAS_CYST: (Enhancement.ENHANCED,),
    LesionType.KIDNEY_CYST: (Enhancement.ENHANCED,),
    LesionType.KIDNEY_STONE: (Enhancement.PLAIN,),
}

_R, _I, _W, _P = Shape.ROUND_LIKE, Shape.IRREGULAR, Shape.WALL_THICKENING, Shape.PUNCTATE_NODULAR

SHAPE_FAMILIES: Dict[LesionType, Tuple[Shape, ...]] = {
    LesionType.LUNG_TUMOR: (_R, _I, _P),
    LesionType.LIVER_TUMOR: (_R, _I, _P),
    LesionType.GALLBLADDER_CANCER: (_R, _I, _W),
    LesionType.PANCREAS_TUMOR: (_R, _I),
    LesionType.ESOPHAGEAL_CANCER: (_I, _W),
    LesionType.GASTRIC_CANCER: (_I, _W),
    LesionType.COLORECTAL_CANCER: (_I, _W),
    LesionType.KIDNEY_TUMOR: (_R, _I),
    LesionType.BLADDER_CANCER: (_R, _I, _W),
    LesionType.BONE_METASTASIS: (_R, _I, _P),
    LesionType.LIVER_CYST: (_R, _I),
    LesionType.GALLSTONE: (_R, _P),
    LesionType.PANCREAS_CYST: (_R, _I),
    LesionType.KIDNEY_CYST: (_R,),
    LesionType.KIDNEY_STONE: (_R, _P),
}
