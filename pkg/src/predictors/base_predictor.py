from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional, Tuple

import numpy as np

if TYPE_CHECKING:
    from src.refine.schedule import NoiseSchedule


@dataclass(frozen=True)
class WindowContext:
    """What the refinement loop knows about the window being denoised."""

    index: int
    corner: Tuple[int, int, int]
    x0: np.ndarray
    eps: np.ndarray
    t_start: int


class BaseNoisePredictor(ABC):
    """
    Noise-prediction contract for the refinement loop.

    predict receives the noisy patch x_t at timestep t together with the
    label-map patch as condition and must return a finite noise estimate of
    the same shape. Implementations that keep per-window state in
    begin_window must leave thread_safe False.
    """

    name: str = "base"
    thread_safe: bool = True

    def prepare(self, schedule: "NoiseSchedule") -> None:
        """Called once with the schedule before any window is processed."""
        self.schedule = schedule

    def begin_window(self, window: WindowContext) -> None:
        """Called before the reverse loop of each window."""

    @abstractmethod
    def predict(self, x_t: np.ndarray, t: int, condition: np.ndarray,
                window: Optional[WindowContext] = None) -> np.ndarray:
        """
        Estimate the noise in x_t.

        Args:
            x_t (np.ndarray): Noisy patch in normalized intensity space
            t (int): Current timestep
            condition (np.ndarray): Label-map patch of the same shape
            window (WindowContext, optional): Window being refined

        Returns:
            np.ndarray: Noise estimate with the shape of x_t
        """
        pass

    def close(self) -> None:
        pass
