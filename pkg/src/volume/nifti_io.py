from pathlib import Path
from typing import Union

import nibabel as nib
import numpy as np

from src.exceptions import InvalidInputError
from src.utils.io_utils import atomic_path
from src.volume.geometry import LabelMap, Volume3D

PathLike = Union[str, Path]


def _geometry(img: nib.Nifti1Image) -> dict:
    affine = img.affine
    return {
        "spacing": tuple(float(z) for z in img.header.get_zooms()[:3]),
        "origin": tuple(float(o) for o in affine[:3, 3]),
        "orientation": "".join(nib.aff2axcodes(affine)),
    }


def _load(path: PathLike) -> nib.Nifti1Image:
    path = Path(path)
    if not path.exists():
        raise InvalidInputError(f"volume file not found: {path}")
    try:
        img = nib.load(str(path))
    except Exception as e:
        raise InvalidInputError(f"unreadable NIfTI file {path}: {e}") from e
    if len(img.shape) != 3:
        raise InvalidInputError(f"{path} is not a 3D volume (shape {img.shape})")
    return img


def load_volume(path: PathLike) -> Volume3D:
    """Read a CT volume in HU as float64."""
    img = _load(path)
    return Volume3D(voxels=img.get_fdata(dtype=np.float64), **_geometry(img))


def load_label_map(path: PathLike) -> LabelMap:
    """Read an integer label map; stored floats are rounded."""
    img = _load(path)
    data = np.asanyarray(img.dataobj)
    if not np.issubdtype(data.dtype, np.integer):
        data = np.rint(data)
    return LabelMap(voxels=data.astype(np.uint8), **_geometry(img))


def _save(vol: Volume3D, path: PathLike, dtype: np.dtype) -> Path:
    img = nib.Nifti1Image(np.asarray(vol.voxels).astype(dtype), vol.affine)
    img.header.set_xyzt_units("mm")
    img.set_qform(vol.affine, code=1)
    img.set_sform(vol.affine, code=1)
    with atomic_path(path) as tmp:
        nib.save(img, str(tmp))
    return Path(path)


def save_volume(vol: Volume3D, path: PathLike) -> Path:
    """Write HU as signed float32, atomically."""
    return _save(vol, path, np.dtype("<f4"))


def save_label_map(labels: LabelMap, path: PathLike) -> Path:
    """Write class ids as uint8, atomically."""
    return _save(labels, path, np.dtype("u1"))
