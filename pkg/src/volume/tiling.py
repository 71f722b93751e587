from dataclasses import dataclass
from itertools import product
from typing import List, Sequence, Tuple

import numpy as np

from src.exceptions import InvalidInputError

Box = Tuple[slice, slice, slice]


def _axis_starts(dim: int, window: int, stride: int) -> List[int]:
    starts = list(range(0, dim - window + 1, stride))
    # Final window sits flush with the edge instead of padding
    if starts[-1] + window < dim:
        starts.append(dim - window)
    return starts


def _axis_profiles(dim: int, window: int, starts: Sequence[int], ramp: int) -> List[np.ndarray]:
    # Trapezoid ramp, normalised so the profiles sum to one at every index
    positions = np.arange(window)
    raw = np.minimum(np.minimum(positions + 1, window - positions), ramp).astype(np.float64)
    total = np.zeros(dim)
    for start in starts:
        total[start:start + window] += raw
    return [raw / total[start:start + window] for start in starts]


@dataclass(frozen=True)
class WindowTiling:
    """
    Overlapping windows covering a volume with separable blend weights.

    Weights are stored per axis; the weight field of a window is the outer
    product of its three axis profiles. Because the window grid is a full
    Cartesian product, the normalised axis profiles already give a
    partition of unity over the whole volume.
    """

    dims: Tuple[int, int, int]
    window: Tuple[int, int, int]
    starts: Tuple[Tuple[int, ...], Tuple[int, ...], Tuple[int, ...]]
    profiles: Tuple[Tuple[np.ndarray, ...], ...]

    @property
    def boxes(self) -> List[Box]:
        return [
            tuple(slice(s, s + w) for s, w in zip(start, self.window))
            for start in product(*self.starts)
        ]

    @property
    def corners(self) -> List[Tuple[int, int, int]]:
        return [tuple(int(s) for s in start) for start in product(*self.starts)]

    def __len__(self) -> int:
        return int(np.prod([len(s) for s in self.starts]))

    def _axis_indices(self, index: int) -> Tuple[int, int, int]:
        return np.unravel_index(index, tuple(len(s) for s in self.starts))

    def weights(self, index: int) -> np.ndarray:
        """Blend-weight field of window `index` (window-shaped)."""
        i, j, k = self._axis_indices(index)
        return np.multiply.outer(
            np.multiply.outer(self.profiles[0][i], self.profiles[1][j]),
            self.profiles[2][k],
        )

    def weight_sum_at(self, voxel: Sequence[int]) -> float:
        total = 0.0
        for index, corner in enumerate(self.corners):
            local = [v - c for v, c in zip(voxel, corner)]
            if all(0 <= l < w for l, w in zip(local, self.window)):
                i, j, k = self._axis_indices(index)
                total += (
                    self.profiles[0][i][local[0]]
                    * self.profiles[1][j][local[1]]
                    * self.profiles[2][k][local[2]]
                )
        return total


def tile_sliding_windows(dims: Sequence[int], window: int, overlap_fraction: float = 0.5) -> WindowTiling:
    """
    Plan sliding windows of edge `window` over a grid.

    Axes shorter than the window get a single window spanning the axis.

    Args:
        dims: Voxel counts per axis
        window: Window edge length in voxels
        overlap_fraction: Fraction of the window shared by neighbours, in [0, 1)

    Returns:
        WindowTiling: Deterministic window plan with blend weights
    """
    if window <= 0:
        raise InvalidInputError("window edge must be positive")
    if not 0.0 <= overlap_fraction < 1.0:
        raise InvalidInputError(f"overlap fraction must be in [0, 1), got {overlap_fraction}")
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3 or min(dims) < 1:
        raise InvalidInputError(f"dims must be three positive counts, got {dims}")

    edges, starts, profiles = [], [], []
    for dim in dims:
        edge = min(window, dim)
        stride = max(1, int(round(edge * (1.0 - overlap_fraction))))
        axis_starts = _axis_starts(dim, edge, stride)
        ramp = max(1, edge - stride)
        edges.append(edge)
        starts.append(tuple(axis_starts))
        profiles.append(tuple(_axis_profiles(dim, edge, axis_starts, ramp)))

    return WindowTiling(dims=dims, window=tuple(edges), starts=tuple(starts), profiles=tuple(profiles))
