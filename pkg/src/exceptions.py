"""Error hierarchy shared by every package."""

from typing import Optional, Sequence


class LesionGenError(Exception):
    """Base class for expected, data-level failures."""


class InvalidInputError(LesionGenError, ValueError):
    """Input rejected by a precondition check."""


class CurationError(LesionGenError):
    def __init__(self, lesion_type: str, modalities: Sequence[str], reason: str = "empty template pool"):
        self.lesion_type = lesion_type
        self.modalities = tuple(modalities)
        super().__init__(f"{reason} for lesion '{lesion_type}' with modality {'/'.join(self.modalities)}")


class PlacementError(LesionGenError):
    def __init__(self, organ: str, size_mm: Sequence[float]):
        self.organ = organ
        self.size_mm = tuple(size_mm)
        size = "×".join(f"{s:g}" for s in self.size_mm)
        super().__init__(f"no valid lesion center in '{organ}' for lesion size {size} mm")


class ShapeError(LesionGenError):
    """Shape construction impossible for the organ geometry."""


class SynthesisStageError(LesionGenError):
    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")


class PredictorError(LesionGenError):
    def __init__(self, message: str, window: Optional[Sequence[int]] = None):
        self.window = tuple(window) if window is not None else None
        if self.window is not None:
            message = f"{message} (window at {self.window})"
        super().__init__(message)


class UndefinedStatisticError(LesionGenError, ValueError):
    """Statistic undefined for the given data (e.g. single-class AUC)."""


class EvaluationError(LesionGenError):
    """Evaluation inputs inconsistent."""


class ManifestError(LesionGenError):
    """Manifest unreadable or inconsistent."""
