"""Byte layout of patches exchanged with external predictors: little-endian float32, x fastest."""

from typing import Sequence, Tuple

import numpy as np

from src.exceptions import PredictorError

PATCH_DTYPE = np.dtype("<f4")


def encode_patch(patch: np.ndarray) -> bytes:
    return np.asarray(patch, dtype=PATCH_DTYPE).tobytes(order="F")


def decode_patch(buffer: bytes, shape: Sequence[int]) -> np.ndarray:
    shape = tuple(int(n) for n in shape)
    expected = int(np.prod(shape)) * PATCH_DTYPE.itemsize
    if len(buffer) != expected:
        raise PredictorError(f"patch payload has {len(buffer)} bytes, expected {expected} for shape {shape}")
    return np.frombuffer(buffer, dtype=PATCH_DTYPE).reshape(shape, order="F").astype(np.float64)


def format_shape(shape: Sequence[int]) -> str:
    return ",".join(str(int(n)) for n in shape)


def parse_shape(header: str) -> Tuple[int, ...]:
    try:
        shape = tuple(int(part) for part in header.split(","))
    except ValueError as e:
        raise PredictorError(f"malformed shape header {header!r}") from e
    if len(shape) != 3 or min(shape) < 1:
        raise PredictorError(f"malformed shape header {header!r}")
    return shape
