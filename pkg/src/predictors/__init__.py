"""
Noise predictors pluggable into the refinement loop.
"""

from src.predictors.base_predictor import BaseNoisePredictor, WindowContext
from src.predictors.http_predictor import HttpNoisePredictor
from src.predictors.loader import PredictorRegistry, PredictorType, load_predictor
from src.predictors.reference_predictors import GaussianSmoothingPredictor, OracleNoisePredictor, ZeroNoisePredictor
from src.predictors.wire import decode_patch, encode_patch

__all__ = [
    'BaseNoisePredictor',
    'WindowContext',
    'HttpNoisePredictor',
    'PredictorRegistry',
    'PredictorType',
    'load_predictor',
    'GaussianSmoothingPredictor',
    'OracleNoisePredictor',
    'ZeroNoisePredictor',
    'decode_patch',
    'encode_patch',
]
