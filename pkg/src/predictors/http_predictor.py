from typing import Optional

import httpx
import logfire
import numpy as np

from src.config import settings
from src.exceptions import PredictorError
from src.predictors.base_predictor import BaseNoisePredictor, WindowContext
from src.predictors.wire import decode_patch, encode_patch, format_shape, parse_shape


class HttpNoisePredictor(BaseNoisePredictor):
    """
    Forwards each prediction to an external denoiser over HTTP.

    The request body is x_t followed by the condition patch, both in the
    wire layout; headers X-Shape and X-Timestep describe them. The response
    body is the noise estimate in the same layout.
    """

    name = "http"

    def __init__(self, url: str, timeout: Optional[float] = None, client: Optional[httpx.Client] = None):
        self.url = url
        self.client = client or httpx.Client(timeout=timeout or settings.PREDICTOR_TIMEOUT)

    def predict(self, x_t: np.ndarray, t: int, condition: np.ndarray,
                window: Optional[WindowContext] = None) -> np.ndarray:
        headers = {
            'Content-Type': 'application/octet-stream',
            'X-Shape': format_shape(x_t.shape),
            'X-Timestep': str(int(t)),
        }
        if window is not None:
            headers['X-Window'] = format_shape(window.corner)
        try:
            r = self.client.post(self.url, content=encode_patch(x_t) + encode_patch(condition), headers=headers)
            r.raise_for_status()
        except httpx.HTTPError as e:
            logfire.error('Predictor request failed', url=self.url, error=str(e))
            raise PredictorError(f"predictor request to {self.url} failed: {e}",
                                 window=window.corner if window else None) from e

        shape = parse_shape(r.headers.get('X-Shape', format_shape(x_t.shape)))
        return decode_patch(r.content, shape)

    def close(self) -> None:
        self.client.close()
