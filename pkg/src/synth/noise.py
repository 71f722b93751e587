import math
from typing import Sequence, Tuple

import numpy as np


def _interp_matrix(n: int, spacing: float, lattice_mm: float, lattice_n: int) -> np.ndarray:
    pos = np.arange(n) * spacing / lattice_mm
    lower = np.floor(pos).astype(int)
    frac = pos - lower
    weights = np.zeros((n, lattice_n))
    rows = np.arange(n)
    weights[rows, lower] = 1.0 - frac
    weights[rows, lower + 1] += frac
    return weights


def value_noise(shape: Sequence[int], spacing: Sequence[float], lattice_mm: float,
                rng: np.random.Generator) -> np.ndarray:
    """
    Low-frequency value noise in [-1, 1].

    Uniform random values on a lattice of pitch lattice_mm are trilinearly
    interpolated to the voxel grid. Trilinear interpolation is separable,
    so the field is three small matrix products over the lattice.
    """
    shape = tuple(int(n) for n in shape)
    lattice_shape = tuple(
        int(math.ceil((n - 1) * s / lattice_mm)) + 2 for n, s in zip(shape, spacing)
    )
    lattice = rng.uniform(-1.0, 1.0, size=lattice_shape)
    wx, wy, wz = (
        _interp_matrix(n, s, lattice_mm, ln) for n, s, ln in zip(shape, spacing, lattice_shape)
    )
    return np.einsum("ia,jb,kc,abc->ijk", wx, wy, wz, lattice, optimize=True)


def radial_noise(directions: np.ndarray, rng: np.random.Generator, terms: int = 6) -> np.ndarray:
    """
    Smooth function on the unit sphere with values in [-1, 1].

    directions has unit vectors on its last axis; each term is a plane wave
    of low angular frequency along a random axis.
    """
    axes = rng.normal(size=(terms, 3))
    axes /= np.linalg.norm(axes, axis=1, keepdims=True)
    frequencies = rng.integers(1, 4, size=terms)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=terms)
    total = np.zeros(directions.shape[:-1])
    for axis, frequency, phase in zip(axes, frequencies, phases):
        total += np.cos(frequency * np.pi * (directions @ axis) + phase)
    return total / terms


def local_offsets(center: Sequence[int], half_extent_mm: Sequence[float], shape: Sequence[int],
                  spacing: Sequence[float]) -> Tuple[Tuple[slice, ...], Tuple[np.ndarray, ...]]:
    """
    Box around center large enough for the given half extents.

    Returns the box slices and open-grid mm offsets of each box voxel from
    the center, ready for broadcasting.
    """
    box, offsets = [], []
    for axis, (c, h, n, s) in enumerate(zip(center, half_extent_mm, shape, spacing)):
        reach = int(math.ceil(h / s)) + 1
        lo, hi = max(0, int(c) - reach), min(int(n), int(c) + reach + 1)
        box.append(slice(lo, hi))
        view = [1, 1, 1]
        view[axis] = hi - lo
        offsets.append(((np.arange(lo, hi) - int(c)) * s).reshape(view))
    return tuple(box), tuple(offsets)
