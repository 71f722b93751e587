import json
import shutil
from collections import Counter

import numpy as np
import pandas as pd
import pytest

from src.commands import cmd_curate, cmd_eval, cmd_generate, cmd_preview, cmd_refine, config_hash, load_generation_config
from src.commands.common import read_manifest
from src.exceptions import InvalidInputError, LesionGenError, ManifestError, PredictorError
from src.lesions import LESION_CLASS_IDS, LesionType, Organ
from src.main import ExitCode, main
from src.predictors import BaseNoisePredictor
from src.refine import RefineConfig, ReverseMode
from src.volume import centroid, load_label_map, load_volume
from tests.phantoms import write_manifest, write_organ_scan, write_scan


@pytest.fixture(scope="module")
def curated(tmp_path_factory):
    scans = tmp_path_factory.mktemp("scans")
    rows = [
        write_scan(scans, "enhanced-a", vessel_hu=150.0, seed=1),
        write_scan(scans, "enhanced-b", vessel_hu=120.0, seed=2),
        write_scan(scans, "plain-a", vessel_hu=65.0, seed=3),
    ]
    manifest = write_manifest(scans / "scans.jsonl", rows)
    return cmd_curate(manifest, tmp_path_factory.mktemp("curated"))


def write_config(directory, counts, types=("Liver cyst", "Liver tumor"), size_bounds=(6.0, 12.0), **extra):
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "params.json").write_text(json.dumps({"types": {
        name: {"size_bounds_mm": list(size_bounds)} for name in types
    }}), encoding="utf-8")
    payload = {"lesion_counts": counts, "sampling_params": "params.json", "grid": 64, "seed": 17}
    payload.update(extra)
    path = directory / "generate.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


@pytest.fixture(scope="module")
def batch(tmp_path_factory, curated):
    root = tmp_path_factory.mktemp("batch")
    config = load_generation_config(write_config(root, {"Liver cyst": 2, "Liver tumor": 1}),
                                    output_dir=str(root / "out"), workers=1)
    return cmd_generate(config, curated)


def test_curate_classifies_each_scan(curated):
    rows = {row["scan_id"]: row for row in read_manifest(curated)}
    assert set(rows) == {"enhanced-a", "enhanced-b", "plain-a"}
    assert rows["enhanced-a"]["modality"] == "Enhanced CT"
    assert rows["plain-a"]["modality"] == "Plain CT"
    assert all(row["scan_range"] == "AbdomenPelvis" for row in rows.values())
    assert all(row["status"] == "ok" for row in rows.values())
    assert all(row["image"].startswith("/") for row in rows.values())


def test_curate_keeps_unreadable_rows_as_failures(tmp_path):
    good = write_scan(tmp_path, "good")
    broken = {"scan_id": "broken", "image": "missing_image.nii.gz", "labels": "missing_labels.nii.gz"}
    out = cmd_curate(write_manifest(tmp_path / "scans.jsonl", [good, broken]), tmp_path / "out")
    rows = {row["scan_id"]: row for row in read_manifest(out)}
    assert rows["good"]["status"] == "ok"
    assert rows["broken"]["status"] == "failed"
    assert "not found" in rows["broken"]["error"]


def test_curate_rejects_empty_manifests(tmp_path):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("", encoding="utf-8")
    with pytest.raises(ManifestError):
        cmd_curate(empty, tmp_path / "out")


def test_generate_writes_samples_and_run_metadata(batch):
    rows = read_manifest(batch)
    assert [row["sample_id"] for row in rows] == ["liver_tumor-00000", "liver_cyst-00000", "liver_cyst-00001"]
    out = batch.parent
    for row in rows:
        assert row["status"] == "ok"
        labels = load_label_map(out / row["labels"])
        class_id = 12 if row["lesion_type"] == "Liver tumor" else 21
        assert (labels.voxels == class_id).any()
        assert json.loads((out / row["report"]).read_text()) == row["report"]
        assert load_volume(out / row["image"]).same_grid(labels)

    tumor = next(row for row in rows if row["lesion_type"] == "Liver tumor")
    assert tumor["template_id"] in {"enhanced-a", "enhanced-b"}
    assert tumor["report"]["enhancement"] == "Enhanced CT"

    run = json.loads((out / "run.json").read_text())
    assert run["samples"] == 3
    assert run["failed"] == []
    assert run["config_hash"] == config_hash(load_generation_config(out.parent / "generate.json"))


def test_generate_resumes_without_regenerating(batch, curated):
    out = batch.parent
    first = read_manifest(batch)
    image = out / first[0]["image"]
    stamp = image.stat().st_mtime_ns

    config = load_generation_config(out.parent / "generate.json", output_dir=str(out), workers=1)
    assert read_manifest(cmd_generate(config, curated)) == first
    assert image.stat().st_mtime_ns == stamp


def test_generate_output_does_not_depend_on_workers(tmp_path, curated):
    path = write_config(tmp_path, {"Liver cyst": 2})
    serial = cmd_generate(load_generation_config(path, output_dir=str(tmp_path / "serial"), workers=1), curated)
    parallel = cmd_generate(load_generation_config(path, output_dir=str(tmp_path / "parallel"), workers=2), curated)

    assert read_manifest(serial) == read_manifest(parallel)
    for row in read_manifest(serial):
        for name in ("image", "labels", "report", "provenance"):
            assert (serial.parent / row[name]).read_bytes() == (parallel.parent / row[name]).read_bytes()


def test_generate_with_zero_counts_and_skipped_types(tmp_path, curated):
    path = write_config(tmp_path, {"Liver cyst": 0, "Lung tumor": 1})
    manifest = cmd_generate(load_generation_config(path, output_dir=str(tmp_path / "out")), curated)
    assert read_manifest(manifest, allow_empty=True) == []
    run = json.loads((tmp_path / "out" / "run.json").read_text())
    assert "Lung tumor" in run["skipped"]
    assert run["samples"] == 0


def test_generate_covers_every_lesion_type(tmp_path):
    scans = tmp_path / "scans"
    rows = [write_organ_scan(scans, f"{organ.value.lower()}-enhanced", organ, vessel_hu=150.0, seed=i)
            for i, organ in enumerate(Organ) if organ is not Organ.LUNG]
    rows.append(write_organ_scan(scans, "lung-plain", Organ.LUNG, vessel_hu=60.0, seed=20))
    rows.append(write_organ_scan(scans, "kidney-plain", Organ.KIDNEY, vessel_hu=60.0, seed=21))
    curated = cmd_curate(write_manifest(scans / "scans.jsonl", rows), tmp_path / "curated")

    types = [t.value for t in LesionType]
    path = write_config(tmp_path / "config", {name: 2 for name in types}, types=types, size_bounds=(4.0, 12.0))
    manifest = cmd_generate(load_generation_config(path, output_dir=str(tmp_path / "out"), workers=1), curated)

    out = manifest.parent
    samples = read_manifest(manifest)
    assert len(samples) == 30
    assert all(row["status"] == "ok" for row in samples)
    assert Counter(row["lesion_type"] for row in samples) == {name: 2 for name in types}
    for row in samples:
        lesion_type = LesionType.parse(row["lesion_type"])
        labels = load_label_map(out / row["labels"])
        assert (labels.voxels == LESION_CLASS_IDS[lesion_type]).any()
        assert (out / row["report"]).exists()
        if lesion_type in (LesionType.LUNG_TUMOR, LesionType.KIDNEY_STONE):
            assert row["template_id"].endswith("-plain")

    run = json.loads((out / "run.json").read_text())
    assert run["samples"] == 30
    assert run["failed"] == []
    assert run["skipped"] == {}


def test_generation_config_validation(tmp_path):
    with pytest.raises(InvalidInputError):
        load_generation_config(write_config(tmp_path, {"Liver cyst": -1}))
    with pytest.raises(InvalidInputError):
        load_generation_config(write_config(tmp_path, {"Brain tumor": 1}))
    config = load_generation_config(write_config(tmp_path, {"liver cyst": 3}), workers=4)
    assert config.workers == 4
    assert config.sampling_params == str(tmp_path / "params.json")
    assert config_hash(config) == config_hash(config.model_copy(update={"workers": 1, "output_dir": "elsewhere"}))
    assert config_hash(config) != config_hash(config.model_copy(update={"seed": 18}))


@pytest.fixture
def batch_copy(tmp_path, batch):
    target = tmp_path / "copy"
    shutil.copytree(batch.parent, target)
    return target / "manifest.jsonl"


def refine_config(t_refine):
    return RefineConfig(t_refine=t_refine, window=32, overlap=0.5, mode=ReverseMode.DETERMINISTIC, seed=2)


def test_oracle_refinement_reproduces_each_sample(batch_copy):
    cmd_refine(batch_copy, "oracle", refine_config(3))
    for row in read_manifest(batch_copy):
        assert row["refine_status"] == "ok"
        original = load_volume(batch_copy.parent / row["image"])
        refined = load_volume(batch_copy.parent / row["refined_path"])
        assert refined.same_grid(original)
        np.testing.assert_allclose(refined.voxels, original.voxels, atol=1e-3)


def test_zero_step_refinement_copies_the_file(batch_copy):
    cmd_refine(batch_copy, "zero", refine_config(0))
    for row in read_manifest(batch_copy):
        original = (batch_copy.parent / row["image"]).read_bytes()
        assert (batch_copy.parent / row["refined_path"]).read_bytes() == original


def test_refine_isolates_missing_samples(batch_copy):
    rows = read_manifest(batch_copy)
    (batch_copy.parent / rows[0]["image"]).unlink()
    cmd_refine(batch_copy, "gaussian", refine_config(1))
    statuses = [row["refine_status"] for row in read_manifest(batch_copy)]
    assert statuses == ["failed", "ok", "ok"]


def test_refine_fails_fast_on_an_unknown_predictor(batch_copy):
    before = batch_copy.read_text()
    with pytest.raises(LesionGenError):
        cmd_refine(batch_copy, "unet", refine_config(1))
    assert batch_copy.read_text() == before


class ClosingPredictor(BaseNoisePredictor):
    name = "closing"

    def __init__(self):
        self.closed = False

    def predict(self, x_t, t, condition, window=None):
        return np.zeros_like(x_t)

    def close(self):
        self.closed = True


def test_refine_closes_the_predictor_when_a_sample_raises(monkeypatch, batch_copy):
    predictor = ClosingPredictor()

    def broken_refine(*args, **kwargs):
        raise RuntimeError("denoiser crashed")

    monkeypatch.setattr("src.commands.refine.load_predictor", lambda spec: predictor)
    monkeypatch.setattr("src.commands.refine.refine_volume", broken_refine)
    with pytest.raises(RuntimeError):
        cmd_refine(batch_copy, "closing", refine_config(1))
    assert predictor.closed


def test_generate_closes_the_predictor_when_refinement_fails(monkeypatch, tmp_path, curated):
    predictors = []

    def make_predictor(spec):
        predictors.append(ClosingPredictor())
        return predictors[-1]

    def failing_refine(*args, **kwargs):
        raise PredictorError("predictor returned non-finite values")

    monkeypatch.setattr("src.commands.generate.load_predictor", make_predictor)
    monkeypatch.setattr("src.commands.generate.refine_volume", failing_refine)
    config = load_generation_config(write_config(tmp_path, {"Liver cyst": 1}, refine=True),
                                    output_dir=str(tmp_path / "out"), workers=1)
    with pytest.raises(LesionGenError):
        cmd_generate(config, curated)
    rows = read_manifest(tmp_path / "out" / "manifest.jsonl")
    assert [row["status"] for row in rows] == ["failed"]
    assert "non-finite" in rows[0]["error"]
    assert predictors and all(p.closed for p in predictors)


def test_preview_slices_through_the_lesion(tmp_path, batch):
    sample_id = read_manifest(batch)[1]["sample_id"]
    result = cmd_preview(sample_id, batch, tmp_path)
    assert set(result.paths) == {"axial", "coronal", "sagittal"}
    assert all(path.exists() and path.name.startswith(sample_id) for path in result.paths.values())

    row = read_manifest(batch)[1]
    labels = load_label_map(batch.parent / row["labels"])
    expected = tuple(int(round(c)) for c in centroid(labels.voxels >= 11))
    assert result.center == expected

    with pytest.raises(ManifestError):
        cmd_preview("no-such-sample", batch, tmp_path)


def results_csv(path, models=("augmented", "baseline")):
    rows = []
    for shift, model in zip((0.2, 0.0), models):
        rows += [{"case_id": f"fold{i}", "model_id": model, "value": 0.6 + shift + 0.01 * i} for i in range(5)]
    pd.DataFrame(rows).to_csv(path, index=False)
    return path


def test_eval_writes_the_summary(tmp_path):
    results = results_csv(tmp_path / "dice.csv")
    summary = cmd_eval(results, "wilcoxon", bootstrap=100, seed=0, out_dir=tmp_path / "out")
    assert summary.comparison.p_rendered == "0.031"
    assert (tmp_path / "out" / "dice_summary.csv").exists()
    assert (tmp_path / "out" / "dice_summary.json").exists()


def test_eval_needs_two_models_for_a_test(tmp_path):
    frame = pd.read_csv(results_csv(tmp_path / "dice.csv"))
    single = tmp_path / "single.csv"
    frame[frame["model_id"] == "baseline"].to_csv(single, index=False)
    with pytest.raises(LesionGenError):
        cmd_eval(single, "permutation", bootstrap=50, out_dir=tmp_path)


def test_main_exit_codes(tmp_path):
    assert main([]) == ExitCode.USAGE
    assert main(["eval"]) == ExitCode.USAGE
    assert main(["curate", "--manifest", str(tmp_path / "missing.jsonl"), "--out", str(tmp_path)]) == \
        ExitCode.DATA_ERROR
    results = results_csv(tmp_path / "dice.csv")
    assert main(["eval", "--results", str(results), "--bootstrap", "50", "--out", str(tmp_path / "out")]) == \
        ExitCode.OK
