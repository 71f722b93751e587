from pathlib import Path
from typing import Any, Dict, List, Union

from src.exceptions import ManifestError
from src.utils.io_utils import read_jsonl

PathLike = Union[str, Path]


def read_manifest(path: PathLike, allow_empty: bool = False) -> List[Dict[str, Any]]:
    path = Path(path)
    try:
        rows = read_jsonl(path)
    except (OSError, ValueError) as e:
        raise ManifestError(f"cannot read manifest {path}: {e}") from e
    if not rows and not allow_empty:
        raise ManifestError(f"manifest {path} has no records")
    return rows


def resolve_path(value: str, base_dir: Path) -> Path:
    path = Path(value)
    return path if path.is_absolute() else base_dir / path


def relative_to(path: Path, base_dir: Path) -> str:
    try:
        return Path(path).resolve().relative_to(base_dir.resolve()).as_posix()
    except ValueError:
        return str(Path(path).resolve())


def find_sample(rows: List[Dict[str, Any]], sample_id: str) -> Dict[str, Any]:
    for row in rows:
        if row.get("sample_id") == sample_id:
            return row
    raise ManifestError(f"sample {sample_id!r} not in manifest")
