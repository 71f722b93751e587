"""Template-scan selection rules: scan range, contrast phase and organ health."""

import math
import re
from enum import Enum
from typing import AbstractSet, Sequence

from src.exceptions import InvalidInputError
from src.lesions.schema import Enhancement

T1 = "vertebrae_T1"
T8 = "vertebrae_T8"
L5 = "vertebrae_L5"
LEFT_UPPER_LOBE = "lung_upper_lobe_left"
RIGHT_UPPER_LOBE = "lung_upper_lobe_right"
BLADDER = "urinary_bladder"
AORTA = "aorta"
IVC = "inferior_vena_cava"

RANGE_STRUCTURES = (T1, T8, L5, LEFT_UPPER_LOBE, RIGHT_UPPER_LOBE, BLADDER)

CONTRAST_THRESHOLD_HU = 80.0
MIN_HEALTHY_ORGAN_MM3 = 4000.0


class ScanRange(str, Enum):
    THORAX = "Thorax"
    ABDOMEN_PELVIS = "AbdomenPelvis"
    THORAX_ABDOMEN_PELVIS = "ThoraxAbdomenPelvis"
    OTHER = "Other"


def classify_scan_range(present: AbstractSet[str]) -> ScanRange:
    """
    Classify the body coverage of a scan from the structures it contains.

    ThoraxAbdomenPelvis takes precedence over Thorax, which takes precedence
    over AbdomenPelvis.
    """
    present = set(present)
    upper_chest = {T1, LEFT_UPPER_LOBE, RIGHT_UPPER_LOBE} <= present
    if upper_chest and BLADDER in present:
        return ScanRange.THORAX_ABDOMEN_PELVIS
    if upper_chest and L5 not in present:
        return ScanRange.THORAX
    if {T8, BLADDER} <= present and T1 not in present:
        return ScanRange.ABDOMEN_PELVIS
    return ScanRange.OTHER


def classify_contrast(aorta_mean_hu: float, ivc_mean_hu: float) -> Enhancement:
    """Plain CT when both vessel means are below 80 HU, enhanced otherwise."""
    if aorta_mean_hu is None or ivc_mean_hu is None or not (math.isfinite(aorta_mean_hu) and math.isfinite(ivc_mean_hu)):
        raise InvalidInputError(f"vessel HU means must be finite, got aorta={aorta_mean_hu} ivc={ivc_mean_hu}")
    if aorta_mean_hu < CONTRAST_THRESHOLD_HU and ivc_mean_hu < CONTRAST_THRESHOLD_HU:
        return Enhancement.PLAIN
    return Enhancement.ENHANCED


def normalize_text(text: str) -> str:
    """Lower-case and collapse whitespace runs to single spaces."""
    return re.sub(r"\s+", " ", text or "").strip().lower()


def is_healthy_organ(organ_volume_mm3: float, impression_text: str, organ_keywords: Sequence[str]) -> bool:
    """
    An organ is healthy when it exceeds 4000 mm³ and the impression never mentions it.

    Keywords match as case-insensitive substrings of the whitespace-normalized text.
    """
    keywords = [normalize_text(k) for k in organ_keywords if normalize_text(k)]
    if not keywords:
        raise InvalidInputError("organ keyword list must not be empty")
    if not organ_volume_mm3 > MIN_HEALTHY_ORGAN_MM3:
        return False
    impression = normalize_text(impression_text)
    return not any(keyword in impression for keyword in keywords)
