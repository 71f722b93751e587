import importlib
from enum import Enum
from typing import Dict, Type

import logfire

from src.exceptions import PredictorError
from src.predictors.base_predictor import BaseNoisePredictor
from src.predictors.http_predictor import HttpNoisePredictor
from src.predictors.reference_predictors import (
    GaussianSmoothingPredictor,
    OracleNoisePredictor,
    ZeroNoisePredictor,
)


class PredictorType(Enum):
    ORACLE = "oracle"
    ZERO = "zero"
    GAUSSIAN = "gaussian"


class PredictorRegistry:
    def __init__(self):
        self.predictors: Dict[PredictorType, Type[BaseNoisePredictor]] = {
            PredictorType.ORACLE: OracleNoisePredictor,
            PredictorType.ZERO: ZeroNoisePredictor,
            PredictorType.GAUSSIAN: GaussianSmoothingPredictor,
        }

    def initialize_predictor(self, predictor_type: PredictorType) -> BaseNoisePredictor:
        predictor_class = self.predictors[predictor_type]
        return predictor_class()


def _import_predictor(spec: str) -> BaseNoisePredictor:
    module_name, _, class_name = spec.partition(":")
    try:
        module = importlib.import_module(module_name)
        predictor_class = getattr(module, class_name)
    except (ImportError, AttributeError) as e:
        raise PredictorError(f"cannot import predictor {spec!r}: {e}") from e
    if not (isinstance(predictor_class, type) and issubclass(predictor_class, BaseNoisePredictor)):
        raise PredictorError(f"{spec!r} is not a BaseNoisePredictor subclass")
    try:
        return predictor_class()
    except Exception as e:
        raise PredictorError(f"cannot construct predictor {spec!r}: {e}") from e


def load_predictor(spec: str) -> BaseNoisePredictor:
    """
    Resolve a predictor spec.

    Args:
        spec (str): A built-in name (oracle, zero, gaussian), an http(s) URL
            of an external denoiser, or a "module:Class" import path

    Returns:
        BaseNoisePredictor: Ready-to-prepare predictor instance
    """
    with logfire.span('load predictor', spec=spec):
        if spec.startswith(("http://", "https://")):
            return HttpNoisePredictor(spec)
        if ":" in spec:
            return _import_predictor(spec)
        try:
            predictor_type = PredictorType(spec.lower())
        except ValueError:
            known = ", ".join(t.value for t in PredictorType)
            raise PredictorError(f"unknown predictor {spec!r} (built-ins: {known})")
        return PredictorRegistry().initialize_predictor(predictor_type)
