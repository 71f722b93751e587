import json
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Union

PathLike = Union[str, Path]


@contextmanager
def atomic_path(target: PathLike) -> Iterator[Path]:
    """
    Yield a temporary sibling path that replaces target on success.

    The temporary name keeps the target's suffixes so format-by-extension
    writers (nibabel) still pick the right codec.
    """
    target = Path(target)
    target.parent.mkdir(parents=True, exist_ok=True)
    suffix = "".join(target.suffixes)
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", suffix=f".tmp{suffix}", dir=target.parent)
    os.close(fd)
    tmp_path = Path(tmp)
    try:
        yield tmp_path
        os.replace(tmp_path, target)
    finally:
        if tmp_path.exists():
            tmp_path.unlink()


def write_text_atomic(target: PathLike, text: str) -> Path:
    with atomic_path(target) as tmp:
        tmp.write_text(text, encoding="utf-8")
    return Path(target)


def write_json_atomic(target: PathLike, payload: Any) -> Path:
    return write_text_atomic(target, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_jsonl_atomic(target: PathLike, rows: Iterable[Dict[str, Any]]) -> Path:
    lines = [json.dumps(row, sort_keys=True) for row in rows]
    return write_text_atomic(target, "".join(line + "\n" for line in lines))


def append_jsonl(target: PathLike, row: Dict[str, Any]) -> None:
    """Append one row and flush it to disk."""
    target = Path(target)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "a", encoding="utf-8") as handle:
        handle.write(json.dumps(row, sort_keys=True) + "\n")
        handle.flush()
        os.fsync(handle.fileno())


def read_jsonl(source: PathLike) -> List[Dict[str, Any]]:
    """Read a JSONL file, skipping blank lines and a torn final line."""
    rows = []
    lines = Path(source).read_text(encoding="utf-8").splitlines()
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rows.append(json.loads(line))
        except json.JSONDecodeError:
            if number == len(lines):
                break
            raise
    return rows
