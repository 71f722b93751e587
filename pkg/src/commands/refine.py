import shutil
from pathlib import Path
from typing import Any, Dict, List

import logfire
from tqdm import tqdm

from src.commands.common import PathLike, read_manifest, relative_to, resolve_path
from src.exceptions import LesionGenError
from src.predictors import BaseNoisePredictor, load_predictor
from src.refine import RefineConfig, refine_volume
from src.utils.io_utils import write_jsonl_atomic
from src.utils.seeding import derive_seed
from src.volume import load_label_map, load_volume, save_volume

REFINED_NAME = "image_refined.nii.gz"


def _refine_row(row: Dict[str, Any], base_dir: Path, predictor: BaseNoisePredictor,
                config: RefineConfig) -> Dict[str, Any]:
    if row.get("status") != "ok":
        return row
    with logfire.span('refine sample {sample_id}', sample_id=row["sample_id"]):
        try:
            image_path = resolve_path(row["image"], base_dir)
            target = image_path.parent / REFINED_NAME
            if config.t_refine == 0:
                if not image_path.exists():
                    raise LesionGenError(f"sample image missing: {image_path}")
                shutil.copyfile(image_path, target)
            else:
                image = load_volume(image_path)
                labels = load_label_map(resolve_path(row["labels"], base_dir))
                sample_config = config.model_copy(update={"seed": derive_seed(config.seed, row["sample_id"])})
                save_volume(refine_volume(image, labels, predictor, sample_config), target)
            row.update(refined_path=relative_to(target, base_dir), refine_status="ok")
            row.pop("refine_error", None)
        except (LesionGenError, OSError, KeyError) as e:
            logfire.error('Sample refinement failed', sample_id=row["sample_id"], error=str(e))
            row.update(refined_path=None, refine_status="failed", refine_error=str(e))
    return row


def cmd_refine(manifest: PathLike, predictor_spec: str, config: RefineConfig) -> Path:
    """
    Refine every generated sample of a batch manifest.

    The predictor is loaded before any output is touched; a load failure
    aborts the command. Refined images are written next to the originals
    and the manifest gains a refined_path column. A sample that cannot be
    refined is marked failed and the others proceed. With t_refine 0 the
    original file is copied byte for byte.

    Returns:
        Path: The updated manifest
    """
    manifest = Path(manifest)
    base_dir = manifest.parent
    rows = read_manifest(manifest)
    predictor = load_predictor(predictor_spec)

    updated: List[Dict[str, Any]] = []
    try:
        with logfire.span('refine batch', manifest=str(manifest), predictor=predictor_spec,
                          t_refine=config.t_refine):
            for row in tqdm(rows, desc="refine", disable=None):
                updated.append(_refine_row(dict(row), base_dir, predictor, config))
    finally:
        predictor.close()

    write_jsonl_atomic(manifest, updated)
    failed = sum(row.get("refine_status") == "failed" for row in updated)
    print(f"Refined {sum(row.get('refine_status') == 'ok' for row in updated)} samples, {failed} failed -> {manifest}")
    return manifest
