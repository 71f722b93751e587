from pathlib import Path
from typing import Any, Dict, List, Optional

import logfire

from src.commands.common import PathLike, read_manifest
from src.config import settings
from src.curation import (
    ScanRecord,
    build_scan_record,
    curate_record,
    load_organ_keywords,
    load_structure_labels,
    pool_counts,
    record_to_row,
)
from src.exceptions import LesionGenError, ManifestError
from src.utils.io_utils import write_jsonl_atomic

PATH_FIELDS = ("image", "labels", "structures")


def _failed_record(row: Dict[str, Any], index: int, error: Exception) -> ScanRecord:
    return ScanRecord(
        scan_id=str(row.get("scan_id", f"row-{index}")),
        **{field: str(row[field]) for field in PATH_FIELDS if row.get(field)},
        status="failed",
        error=str(error),
    )


def _absolute_paths(record: ScanRecord, base_dir: Path) -> ScanRecord:
    update = {
        field: str(record.resolve(field, base_dir).resolve())
        for field in PATH_FIELDS
        if getattr(record, field) is not None
    }
    return record.model_copy(update=update)


def format_pool_counts(records: List[ScanRecord]) -> str:
    lines = [f"{'Lesion type':<32} {'Modality':<12} {'Templates':>9}"]
    for (lesion_type, modality), count in pool_counts(records).items():
        lines.append(f"{lesion_type.value:<32} {modality.value:<12} {count:>9}")
    return "\n".join(lines)


def cmd_curate(manifest_in: PathLike, out_dir: Optional[PathLike] = None,
               keyword_config: Optional[PathLike] = None,
               structure_config: Optional[PathLike] = None) -> Path:
    """
    Measure and classify every scan of an input manifest.

    Rows whose volumes cannot be read are kept with status "failed" and
    their error; the run continues. Paths in the curated manifest are
    absolute.

    Args:
        manifest_in: JSONL of scans (scan_id, image, labels, optional
            structures, impression or impression_file, optional vessel means)
        out_dir: Directory of curated.jsonl; defaults to settings.OUTPUT_DIR
        keyword_config: Organ keyword JSON
        structure_config: Structure label JSON

    Returns:
        Path: The curated manifest

    Raises:
        ManifestError: Empty manifest, or every row failed
    """
    manifest_in = Path(manifest_in)
    base_dir = manifest_in.parent
    rows = read_manifest(manifest_in)
    keywords = load_organ_keywords(keyword_config or settings.KEYWORD_CONFIG)
    structure_ids = load_structure_labels(structure_config or settings.STRUCTURE_CONFIG)

    records: List[ScanRecord] = []
    with logfire.span('curate', manifest=str(manifest_in), rows=len(rows)):
        for index, row in enumerate(rows):
            scan_id = str(row.get("scan_id", f"row-{index}"))
            with logfire.span('curate scan {scan_id}', scan_id=scan_id):
                try:
                    record = curate_record(build_scan_record(row, base_dir, structure_ids), keywords)
                    records.append(_absolute_paths(record, base_dir))
                except (LesionGenError, OSError, ValueError) as e:
                    logfire.error('Scan curation failed', scan_id=scan_id, error=str(e))
                    records.append(_failed_record(row, index, e))

    out_path = Path(out_dir or settings.OUTPUT_DIR) / "curated.jsonl"
    write_jsonl_atomic(out_path, (record_to_row(record) for record in records))

    ok = [record for record in records if record.ok]
    logfire.info('Curation finished', ok=len(ok), failed=len(records) - len(ok))
    print(f"Curated {len(ok)}/{len(records)} scans -> {out_path}")
    print(format_pool_counts(ok))
    if not ok:
        raise ManifestError(f"all {len(records)} records failed curation")
    return out_path
