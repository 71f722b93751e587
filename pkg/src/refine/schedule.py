from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from src.exceptions import InvalidInputError


class ReverseMode(str, Enum):
    STOCHASTIC = "stochastic"
    DETERMINISTIC = "deterministic"


@dataclass(frozen=True)
class NoiseSchedule:
    """
    Diffusion timetable indexed by timestep t = 0..T.

    Index 0 is the clean-signal convention (beta 0, alpha_bar 1); entries
    1..T hold the schedule proper.
    """

    betas: np.ndarray
    alphas: np.ndarray
    alpha_bars: np.ndarray

    @property
    def T(self) -> int:
        return len(self.betas) - 1

    def check_timestep(self, t: int) -> int:
        if not 1 <= int(t) <= self.T:
            raise InvalidInputError(f"timestep must lie in 1..{self.T}, got {t}")
        return int(t)


def build_schedule(T: int, beta_min: float, beta_max: float) -> NoiseSchedule:
    """
    Linear beta schedule from beta_min to beta_max over T steps.

    Args:
        T: Total timesteps (>= 1)
        beta_min: First beta, 0 < beta_min <= beta_max
        beta_max: Last beta, < 1

    Returns:
        NoiseSchedule: betas, alphas and cumulative alpha products
    """
    if int(T) != T or T < 1:
        raise InvalidInputError(f"T must be a positive integer, got {T}")
    if not 0.0 < beta_min <= beta_max < 1.0:
        raise InvalidInputError(f"need 0 < beta_min <= beta_max < 1, got {beta_min}, {beta_max}")
    betas = np.concatenate([[0.0], np.linspace(beta_min, beta_max, int(T), dtype=np.float64)])
    alphas = 1.0 - betas
    return NoiseSchedule(betas=betas, alphas=alphas, alpha_bars=np.cumprod(alphas))


def forward_noise(x0: np.ndarray, t: int, eps: np.ndarray, schedule: NoiseSchedule) -> np.ndarray:
    """x_t = sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) eps."""
    x0 = np.asarray(x0, dtype=np.float64)
    eps = np.asarray(eps, dtype=np.float64)
    if x0.shape != eps.shape:
        raise InvalidInputError(f"noise shape {eps.shape} does not match signal shape {x0.shape}")
    alpha_bar = schedule.alpha_bars[schedule.check_timestep(t)]
    return np.sqrt(alpha_bar) * x0 + np.sqrt(1.0 - alpha_bar) * eps


def predict_x0(x_t: np.ndarray, t: int, eps_hat: np.ndarray, schedule: NoiseSchedule) -> np.ndarray:
    alpha_bar = schedule.alpha_bars[t]
    return (x_t - np.sqrt(1.0 - alpha_bar) * eps_hat) / np.sqrt(alpha_bar)


def reverse_step(x_t: np.ndarray, t: int, eps_hat: np.ndarray, schedule: NoiseSchedule,
                 mode: ReverseMode = ReverseMode.STOCHASTIC,
                 rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """
    One reverse step x_t -> x_{t-1}.

    Deterministic mode re-noises the predicted x0 with the predicted noise
    (eta = 0 implicit sampling). Stochastic mode draws from the Gaussian
    posterior q(x_{t-1} | x_t, x0_hat); no noise is injected at t = 1.
    """
    t = schedule.check_timestep(t)
    x_t = np.asarray(x_t, dtype=np.float64)
    eps_hat = np.asarray(eps_hat, dtype=np.float64)
    x0_hat = predict_x0(x_t, t, eps_hat, schedule)
    alpha_bar, alpha_bar_prev = schedule.alpha_bars[t], schedule.alpha_bars[t - 1]

    if ReverseMode(mode) is ReverseMode.DETERMINISTIC:
        return np.sqrt(alpha_bar_prev) * x0_hat + np.sqrt(1.0 - alpha_bar_prev) * eps_hat

    beta = schedule.betas[t]
    mean = (
        np.sqrt(alpha_bar_prev) * beta / (1.0 - alpha_bar) * x0_hat
        + np.sqrt(schedule.alphas[t]) * (1.0 - alpha_bar_prev) / (1.0 - alpha_bar) * x_t
    )
    if t == 1:
        return mean
    if rng is None:
        raise InvalidInputError("stochastic reverse steps need a random generator")
    sigma = np.sqrt((1.0 - alpha_bar_prev) / (1.0 - alpha_bar) * beta)
    return mean + sigma * rng.standard_normal(x_t.shape)
