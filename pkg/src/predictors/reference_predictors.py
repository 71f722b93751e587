from typing import Optional

import numpy as np
from scipy.ndimage import gaussian_filter

from src.exceptions import PredictorError
from src.predictors.base_predictor import BaseNoisePredictor, WindowContext


class OracleNoisePredictor(BaseNoisePredictor):
    """Returns the stored forward noise of the window; refinement becomes an identity."""

    name = "oracle"

    def predict(self, x_t: np.ndarray, t: int, condition: np.ndarray,
                window: Optional[WindowContext] = None) -> np.ndarray:
        if window is None:
            raise PredictorError("oracle predictor needs the window context")
        return window.eps


class ZeroNoisePredictor(BaseNoisePredictor):
    name = "zero"

    def predict(self, x_t: np.ndarray, t: int, condition: np.ndarray,
                window: Optional[WindowContext] = None) -> np.ndarray:
        return np.zeros_like(x_t)


class GaussianSmoothingPredictor(BaseNoisePredictor):
    """
    Treats the high-frequency residual of x_t as noise.

    eps_hat = (x_t - G_sigma(x_t)) / sqrt(1 - alpha_bar_t), a translation
    invariant surrogate for a trained denoiser.
    """

    name = "gaussian"

    def __init__(self, sigma_voxels: float = 1.0):
        self.sigma_voxels = sigma_voxels

    def predict(self, x_t: np.ndarray, t: int, condition: np.ndarray,
                window: Optional[WindowContext] = None) -> np.ndarray:
        noise_scale = np.sqrt(1.0 - self.schedule.alpha_bars[t])
        smoothed = gaussian_filter(x_t, sigma=self.sigma_voxels, mode="nearest")
        return (x_t - smoothed) / noise_scale
