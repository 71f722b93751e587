from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Tuple

import logfire
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from src.commands.common import PathLike, find_sample, read_manifest, resolve_path
from src.exceptions import InvalidInputError
from src.volume import centroid, erode, load_label_map, load_volume

LESION_MIN_CLASS = 11

WINDOW_WIDTH = 400.0
WINDOW_LEVEL = 40.0


@dataclass
class PreviewResult:
    center: Tuple[int, int, int]
    paths: Dict[str, Path]


def apply_window(hu: np.ndarray, width: float = WINDOW_WIDTH, level: float = WINDOW_LEVEL) -> np.ndarray:
    """Map HU through a window/level onto 0..255."""
    low = level - width / 2.0
    return np.clip((hu - low) / width * 255.0, 0.0, 255.0)


def lesion_contour(mask: np.ndarray, spacing) -> np.ndarray:
    return mask & ~erode(mask, float(min(spacing)), spacing)


def _orthogonal_slices(volume: np.ndarray, center: Tuple[int, int, int]) -> Dict[str, np.ndarray]:
    x, y, z = center
    # Rows run anterior->posterior (axial) or superior->inferior (coronal, sagittal)
    return {
        "axial": volume[:, :, z].T,
        "coronal": np.flipud(volume[:, y, :].T),
        "sagittal": np.flipud(volume[x, :, :].T),
    }


def cmd_preview(sample_id: str, manifest: PathLike, out_dir: Optional[PathLike] = None) -> PreviewResult:
    """
    Write axial, coronal and sagittal PNGs through the lesion centroid.

    The image is shown with a soft-tissue window (W400/L40) and the lesion
    outline drawn in white.
    """
    manifest = Path(manifest)
    row = find_sample(read_manifest(manifest), sample_id)
    image = load_volume(resolve_path(row["image"], manifest.parent))
    labels = load_label_map(resolve_path(row["labels"], manifest.parent))

    mask = labels.voxels >= LESION_MIN_CLASS
    if not mask.any():
        raise InvalidInputError(f"sample {sample_id} has an empty lesion mask")
    center = tuple(int(round(c)) for c in centroid(mask))

    display = apply_window(image.voxels)
    display[lesion_contour(mask, labels.spacing)] = 255.0

    out = Path(out_dir) if out_dir else resolve_path(row["image"], manifest.parent).parent / "preview"
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    with logfire.span('preview {sample_id}', sample_id=sample_id, center=center):
        for view, pixels in _orthogonal_slices(display, center).items():
            path = out / f"{sample_id}_{view}.png"
            plt.imsave(path, pixels, cmap="gray", vmin=0, vmax=255)
            paths[view] = path
    print(f"Preview of {sample_id} at voxel {center} -> {out}")
    return PreviewResult(center=center, paths=paths)
