import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple

import logfire
from pydantic import BaseModel, Field, ValidationError, field_validator
from tqdm import tqdm

from src.commands.common import PathLike, read_manifest, relative_to
from src.config import settings
from src.curation import ScanRecord, build_template_pool
from src.exceptions import InvalidInputError, LesionGenError, PlacementError, ShapeError, SynthesisStageError
from src.lesions import LESION_ORGAN, LesionType, SamplingParams, load_sampling_params, sample_spec
from src.predictors import load_predictor
from src.refine import RefineConfig, refine_volume
from src.synth import SynthSample, load_template, save_sample, synthesize
from src.utils.io_utils import append_jsonl, read_jsonl, write_json_atomic, write_jsonl_atomic
from src.utils.logging_utils import configure_logging
from src.utils.seeding import derive_seed, make_rng

JOURNAL_NAME = ".progress.jsonl"


class GenerationConfig(BaseModel):
    """Batch generation settings, read from a JSON file."""

    lesion_counts: Dict[LesionType, int]
    sampling_params: Optional[str] = None
    refine: bool = False
    refine_config: RefineConfig = Field(default_factory=RefineConfig)
    predictor: str = "gaussian"
    output_dir: str = settings.OUTPUT_DIR
    seed: int = settings.DEFAULT_SEED
    workers: int = Field(settings.WORKERS, ge=1)
    grid: int = Field(settings.GRID, ge=0)
    max_attempts: int = Field(settings.MAX_ATTEMPTS, ge=1)

    @field_validator("lesion_counts", mode="before")
    @classmethod
    def _parse_types(cls, value: Any) -> Any:
        if isinstance(value, dict):
            return {LesionType.parse(key) if isinstance(key, str) else key: count for key, count in value.items()}
        return value

    @field_validator("lesion_counts")
    @classmethod
    def _non_negative(cls, value: Dict[LesionType, int]) -> Dict[LesionType, int]:
        negative = [t.value for t, count in value.items() if count < 0]
        if negative:
            raise ValueError(f"sample counts must be >= 0, got negative counts for {negative}")
        return value


def load_generation_config(path: PathLike, **overrides: Any) -> GenerationConfig:
    """
    Read a generation config; non-None overrides replace file values.

    A relative sampling_params path is resolved against the config's directory.
    """
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
        payload.update({key: value for key, value in overrides.items() if value is not None})
        config = GenerationConfig.model_validate(payload)
    except (OSError, json.JSONDecodeError, ValidationError, InvalidInputError) as e:
        raise InvalidInputError(f"invalid generation config {path}: {e}") from e
    if config.sampling_params and not Path(config.sampling_params).is_absolute():
        config = config.model_copy(update={"sampling_params": str(path.parent / config.sampling_params)})
    return config


def config_hash(config: GenerationConfig) -> str:
    """sha256 of the canonical config JSON; worker count and output location excluded."""
    payload = config.model_dump(mode="json", exclude={"workers", "output_dir"})
    payload["refine_config"].pop("workers", None)
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class GenerationTask(BaseModel):
    sample_id: str
    lesion_type: LesionType
    index: int
    seed: int
    template: ScanRecord


def plan_tasks(config: GenerationConfig, records: List[ScanRecord]) -> Tuple[List[GenerationTask], Dict[str, str]]:
    """
    Expand per-type counts into seeded tasks with their templates.

    Types whose template pool is empty are skipped with the curation reason.
    """
    requested = [t for t in LesionType if config.lesion_counts.get(t, 0) > 0]
    pool = build_template_pool(records, requested)
    skipped = {t.value: reason for t, reason in pool.failures.items()}

    tasks = []
    for lesion_type in requested:
        templates = pool.templates(lesion_type)
        if not templates:
            continue
        for index in range(config.lesion_counts[lesion_type]):
            seed = derive_seed(config.seed, lesion_type.value, index)
            template = templates[int(make_rng(seed, "template").integers(len(templates)))]
            tasks.append(GenerationTask(sample_id=f"{lesion_type.slug}-{index:05d}", lesion_type=lesion_type,
                                        index=index, seed=seed, template=template))
    return tasks, skipped


def _synthesize_with_retries(task: GenerationTask, config: GenerationConfig,
                             params: SamplingParams) -> Tuple[SynthSample, int]:
    organ = LESION_ORGAN[task.lesion_type]
    template = load_template(task.template, None, config.grid, organ)
    last_error: Optional[SynthesisStageError] = None
    for attempt in range(config.max_attempts):
        seed = task.seed if attempt == 0 else derive_seed(task.seed, "attempt", attempt)
        spec = sample_spec(task.lesion_type, params, seed, enhancement=task.template.modality)
        try:
            return synthesize(template, spec, params.for_type(task.lesion_type)), attempt
        except SynthesisStageError as e:
            if not isinstance(e.cause, (PlacementError, ShapeError)):
                raise
            logfire.warn('Synthesis attempt failed, retrying', sample_id=task.sample_id, attempt=attempt,
                         error=str(e))
            last_error = e
    raise last_error


def generate_sample(task: GenerationTask, config: GenerationConfig, params: SamplingParams,
                    out_dir: str) -> Dict[str, Any]:
    """Generate, optionally refine and save one sample; returns its manifest row."""
    out = Path(out_dir)
    row: Dict[str, Any] = {
        "sample_id": task.sample_id,
        "lesion_type": task.lesion_type.value,
        "template_id": task.template.scan_id,
        "seed": task.seed,
    }
    with logfire.span('generate sample {sample_id}', sample_id=task.sample_id,
                      lesion_type=task.lesion_type.value):
        try:
            sample, attempt = _synthesize_with_retries(task, config, params)
            if config.refine:
                predictor = load_predictor(config.predictor)
                refine_config = config.refine_config.model_copy(
                    update={"seed": derive_seed(task.seed, "refine"), "workers": 1}
                )
                try:
                    refined = refine_volume(sample.image, sample.labels, predictor, refine_config)
                finally:
                    predictor.close()
                sample = SynthSample(refined, sample.labels, sample.report,
                                     sample.provenance.model_copy(update={"refined": True}))
            paths = save_sample(sample, out / "samples" / task.sample_id)
        except (LesionGenError, OSError) as e:
            logfire.error('Sample generation failed', sample_id=task.sample_id, error=str(e))
            row.update(status="failed", error=str(e))
            return row

    row.update(
        status="ok",
        attempt=attempt,
        spec_seed=sample.provenance.seed,
        report=sample.report.to_json(),
        **{name: relative_to(path, out) for name, path in paths.items()},
    )
    return row


def _generate_task(args: Tuple[GenerationTask, GenerationConfig, SamplingParams, str]) -> Dict[str, Any]:
    return generate_sample(*args)


def _completed(journal: Path, run_hash: str, out_dir: Path) -> Dict[str, Dict[str, Any]]:
    if not journal.exists():
        return {}
    done = {}
    for entry in read_jsonl(journal):
        row = entry.get("row", {})
        if entry.get("config_hash") != run_hash or row.get("status") != "ok":
            continue
        if all((out_dir / row[name]).exists() for name in ("image", "labels", "report", "provenance")):
            done[row["sample_id"]] = row
    return done


def _run_tasks(tasks: List[GenerationTask], config: GenerationConfig, params: SamplingParams,
               out_dir: Path) -> Iterator[Dict[str, Any]]:
    arguments = [(task, config, params, str(out_dir)) for task in tasks]
    if config.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.workers, initializer=configure_logging) as pool:
            yield from pool.map(_generate_task, arguments)
    else:
        for argument in arguments:
            yield _generate_task(argument)


def cmd_generate(config: GenerationConfig, curated_manifest: PathLike) -> Path:
    """
    Generate the configured number of samples per lesion type.

    Completed samples are journaled as they finish so a killed run resumes
    without regenerating them. manifest.jsonl and run.json are written
    atomically at the end; manifest rows follow task order whatever the
    worker count.

    Args:
        config: Generation settings
        curated_manifest: Output of the curate command

    Returns:
        Path: The batch manifest
    """
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = [ScanRecord.model_validate(row) for row in read_manifest(curated_manifest)]
    params = load_sampling_params(config.sampling_params)
    run_hash = config_hash(config)
    journal = out_dir / JOURNAL_NAME

    tasks, skipped = plan_tasks(config, records)
    for lesion_type, reason in skipped.items():
        logfire.warn('Lesion type skipped', lesion_type=lesion_type, reason=reason)

    done = _completed(journal, run_hash, out_dir)
    pending = [task for task in tasks if task.sample_id not in done]
    rows: Dict[str, Dict[str, Any]] = dict(done)

    with logfire.span('generate', tasks=len(tasks), pending=len(pending), workers=config.workers,
                      config_hash=run_hash):
        progress = tqdm(_run_tasks(pending, config, params, out_dir), total=len(pending), desc="generate",
                        disable=None)
        for row in progress:
            rows[row["sample_id"]] = row
            append_jsonl(journal, {"config_hash": run_hash, "row": row})

    manifest_rows = [rows[task.sample_id] for task in tasks]
    manifest_path = write_jsonl_atomic(out_dir / "manifest.jsonl", manifest_rows)
    failed = [row["sample_id"] for row in manifest_rows if row["status"] != "ok"]
    write_json_atomic(out_dir / "run.json", {
        "run_id": f"run-{run_hash[:12]}",
        "config_hash": run_hash,
        "config": config.model_dump(mode="json"),
        "samples": len(manifest_rows),
        "failed": failed,
        "skipped": skipped,
    })
    logfire.info('Generation finished', samples=len(manifest_rows), failed=len(failed), skipped=len(skipped))
    print(f"Generated {len(manifest_rows) - len(failed)}/{len(manifest_rows)} samples -> {manifest_path}")
    for lesion_type, reason in skipped.items():
        print(f"Skipped {lesion_type}: {reason}")
    if manifest_rows and len(failed) == len(manifest_rows):
        raise LesionGenError(f"all {len(failed)} samples failed")
    return manifest_path
