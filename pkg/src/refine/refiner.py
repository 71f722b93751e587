from concurrent.futures import ThreadPoolExecutor
from typing import List, Tuple

import logfire
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.config import settings
from src.exceptions import InvalidInputError, PredictorError
from src.predictors.base_predictor import BaseNoisePredictor, WindowContext
from src.refine.schedule import NoiseSchedule, ReverseMode, build_schedule, forward_noise, reverse_step
from src.utils.seeding import make_rng
from src.volume import LabelMap, Volume3D, tile_sliding_windows


class RefineConfig(BaseModel):
    """Partial-noising refinement settings; t_refine 0 disables refinement."""

    model_config = ConfigDict(frozen=True)

    t_refine: int = Field(settings.REFINE_STEPS, ge=0)
    window: int = Field(settings.REFINE_WINDOW, ge=1)
    overlap: float = Field(settings.REFINE_OVERLAP, ge=0.0, lt=1.0)
    mode: ReverseMode = ReverseMode.STOCHASTIC
    seed: int = settings.DEFAULT_SEED
    timesteps: int = Field(settings.DIFFUSION_TIMESTEPS, ge=1)
    beta_min: float = settings.BETA_MIN
    beta_max: float = settings.BETA_MAX
    hu_min: float = -1000.0
    hu_max: float = 1000.0
    workers: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _consistent(self) -> "RefineConfig":
        if self.t_refine > self.timesteps:
            raise ValueError(f"t_refine {self.t_refine} exceeds T = {self.timesteps}")
        if self.hu_min >= self.hu_max:
            raise ValueError("hu_min must be below hu_max")
        return self

    def schedule(self) -> NoiseSchedule:
        return build_schedule(self.timesteps, self.beta_min, self.beta_max)


def normalize_hu(voxels: np.ndarray, hu_min: float = -1000.0, hu_max: float = 1000.0) -> np.ndarray:
    """Clip HU to [hu_min, hu_max] and map linearly onto [-1, 1]."""
    center, half = (hu_max + hu_min) / 2.0, (hu_max - hu_min) / 2.0
    return (np.clip(voxels, hu_min, hu_max) - center) / half


def _check_prediction(eps_hat: np.ndarray, x_t: np.ndarray, window: WindowContext, predictor: BaseNoisePredictor) -> np.ndarray:
    eps_hat = np.asarray(eps_hat, dtype=np.float64)
    if eps_hat.shape != x_t.shape:
        raise PredictorError(f"predictor '{predictor.name}' returned shape {eps_hat.shape}, expected {x_t.shape}",
                             window=window.corner)
    if not np.isfinite(eps_hat).all():
        raise PredictorError(f"predictor '{predictor.name}' returned non-finite values", window=window.corner)
    return eps_hat


def _refine_window(index: int, box: Tuple[slice, ...], corner: Tuple[int, int, int], normalized: np.ndarray,
                   condition: np.ndarray, predictor: BaseNoisePredictor, schedule: NoiseSchedule,
                   config: RefineConfig) -> np.ndarray:
    x0 = normalized[box]
    eps = make_rng(config.seed, "window", index).standard_normal(x0.shape)
    window = WindowContext(index=index, corner=corner, x0=x0, eps=eps, t_start=config.t_refine)
    reverse_rng = make_rng(config.seed, "window", index, "reverse")
    cond = condition[box]

    with logfire.span('refine window {index}', index=index, corner=corner):
        predictor.begin_window(window)
        x = forward_noise(x0, config.t_refine, eps, schedule)
        for t in range(config.t_refine, 0, -1):
            eps_hat = _check_prediction(predictor.predict(x, t, cond, window), x, window, predictor)
            x = reverse_step(x, t, eps_hat, schedule, config.mode, reverse_rng)
    return x - x0


def refine_volume(image: Volume3D, organ_labels: LabelMap, predictor: BaseNoisePredictor,
                  config: RefineConfig) -> Volume3D:
    """
    Partially noise and denoise the volume window by window.

    Each window is normalized, forward-noised to t_refine with noise seeded
    by (seed, window index), run back through t_refine reverse steps
    conditioned on its label-map patch, and compared with its starting
    point. The per-window changes are blended with partition-of-unity
    weights and added to the input in HU, so voxels outside the
    normalization window keep their values wherever the predictor agrees.

    Args:
        image: Volume to refine
        organ_labels: Label map on the same grid, passed to the predictor as condition
        predictor: Noise predictor
        config: Refinement settings

    Returns:
        Volume3D: Refined volume with the input's geometry

    Raises:
        PredictorError: Predictor output of the wrong shape or non-finite, with window coordinates
    """
    if not image.same_grid(organ_labels):
        raise InvalidInputError("image and label map must share a grid")
    if config.t_refine == 0:
        return image.with_voxels(image.voxels.copy())

    schedule = config.schedule()
    predictor.prepare(schedule)
    tiling = tile_sliding_windows(image.dims, config.window, config.overlap)
    normalized = normalize_hu(image.voxels.astype(np.float64), config.hu_min, config.hu_max)
    condition = organ_labels.voxels.astype(np.float64)
    boxes, corners = tiling.boxes, tiling.corners

    def run(index: int) -> np.ndarray:
        return _refine_window(index, boxes[index], corners[index], normalized, condition, predictor, schedule, config)

    with logfire.span('refine volume', windows=len(tiling), t_refine=config.t_refine, mode=config.mode.value,
                      predictor=predictor.name):
        if config.workers > 1 and predictor.thread_safe:
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                deltas: List[np.ndarray] = list(pool.map(run, range(len(tiling))))
        else:
            deltas = [run(index) for index in range(len(tiling))]

        blended = np.zeros(image.dims, dtype=np.float64)
        for index, delta in enumerate(deltas):
            blended[boxes[index]] += tiling.weights(index) * delta

    half_range = (config.hu_max - config.hu_min) / 2.0
    return image.with_voxels(image.voxels.astype(np.float64) + half_range * blended)
