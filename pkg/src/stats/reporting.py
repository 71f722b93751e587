from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Union

import logfire
import numpy as np
import pandas as pd
from pydantic import BaseModel

from src.config import settings
from src.exceptions import EvaluationError
from src.stats.metrics import auc
from src.stats.resampling import MetricSummary, bootstrap_ci
from src.stats.significance import PairedScores, paired_permutation_one_sided, wilcoxon_one_sided
from src.utils.io_utils import atomic_path, write_json_atomic

PathLike = Union[str, Path]

VALUE_COLUMNS = ("case_id", "model_id", "value")
SCORE_COLUMNS = ("case_id", "model_id", "score", "label")


class ComparisonTest(str, Enum):
    WILCOXON = "wilcoxon"
    PERMUTATION = "permutation"


def render_p_value(p: float) -> str:
    if p < 0.001:
        return "<0.001"
    return f"{p:.3f}"


class ModelSummary(BaseModel):
    model_id: str
    metric: str
    summary: MetricSummary
    rank: int


class Comparison(BaseModel):
    test: ComparisonTest
    top_model: str
    second_model: str
    n_pairs: int
    p_value: float
    p_rendered: str


class EvaluationSummary(BaseModel):
    models: List[ModelSummary]
    comparison: Optional[Comparison] = None

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for model in self.models:
            row = {
                "model_id": model.model_id,
                "metric": model.metric,
                "rank": model.rank,
                "estimate": model.summary.estimate,
                "ci_low": model.summary.ci_low,
                "ci_high": model.summary.ci_high,
                "n": model.summary.n,
                "p_value": None,
                "p_rendered": None,
            }
            # p-value goes on the top-ranked model row
            if self.comparison is not None and model.model_id == self.comparison.top_model:
                row["p_value"] = self.comparison.p_value
                row["p_rendered"] = self.comparison.p_rendered
            rows.append(row)
        return pd.DataFrame(rows)


def load_results(path: PathLike) -> pd.DataFrame:
    """Read per-case results from CSV or JSONL, in value mode or score mode."""
    path = Path(path)
    try:
        if path.suffix == ".jsonl":
            frame = pd.read_json(path, lines=True, dtype={"case_id": str, "model_id": str})
        else:
            frame = pd.read_csv(path, dtype={"case_id": str, "model_id": str})
    except (OSError, ValueError) as e:
        raise EvaluationError(f"cannot read results {path}: {e}") from e
    if not (set(VALUE_COLUMNS) <= set(frame.columns) or set(SCORE_COLUMNS) <= set(frame.columns)):
        raise EvaluationError(
            f"results need columns {', '.join(VALUE_COLUMNS)} or {', '.join(SCORE_COLUMNS)}, got {list(frame.columns)}"
        )
    if frame.empty:
        raise EvaluationError("results table is empty")
    return frame


def _check_case_ids(frame: pd.DataFrame) -> List[str]:
    duplicated = frame[frame.duplicated(["model_id", "case_id"])]
    if not duplicated.empty:
        raise EvaluationError(f"duplicate case ids per model: {sorted(set(duplicated['case_id']))}")
    per_model = {model: set(group["case_id"]) for model, group in frame.groupby("model_id")}
    union = set().union(*per_model.values())
    offenders = {model: sorted(union - cases) for model, cases in per_model.items() if union - cases}
    if offenders:
        listing = "; ".join(f"{model} lacks {cases}" for model, cases in sorted(offenders.items()))
        raise EvaluationError(f"case ids differ between models: {listing}")
    return sorted(union)


def _auc_statistic(rows: np.ndarray) -> float:
    return auc(rows[:, 0], rows[:, 1].astype(int))


def _auc_swap_permutation(top: pd.DataFrame, second: pd.DataFrame, N: int, seed: int) -> float:
    # Paired permutation on AUC: each case swaps its two model scores with probability 1/2
    labels = top["label"].to_numpy().astype(int)
    a, b = top["score"].to_numpy(dtype=float), second["score"].to_numpy(dtype=float)
    observed = auc(a, labels) - auc(b, labels)
    rng = np.random.default_rng(seed)
    count = 0
    for swap in rng.random((N, a.size)) < 0.5:
        count += auc(np.where(swap, b, a), labels) - auc(np.where(swap, a, b), labels) >= observed - 1e-12
    return (1 + count) / (N + 1)


def compare_models(frame: pd.DataFrame, test: Optional[Union[ComparisonTest, str]] = None,
                   B: int = settings.BOOTSTRAP_REPLICATES, level: float = settings.CONFIDENCE_LEVEL,
                   seed: int = settings.DEFAULT_SEED, permutations: int = settings.PERMUTATIONS) -> EvaluationSummary:
    """
    Summarize every model and test the top model against the runner-up.

    Value mode (case_id, model_id, value) bootstraps the mean per-case
    value. Score mode (case_id, model_id, score, label) bootstraps AUC over
    cases. Models are ranked by point estimate; the one-sided test compares
    the best against the second best on their shared cases.

    Raises:
        EvaluationError: Case ids differ between models, or a comparison is requested with fewer than two models
    """
    score_mode = "value" not in frame.columns
    metric = "auc" if score_mode else "mean"
    case_ids = _check_case_ids(frame)
    models = sorted(frame["model_id"].unique())
    if test is not None and len(models) < 2:
        raise EvaluationError(f"a {ComparisonTest(test).value} comparison needs at least two models, got {models}")

    with logfire.span('compare models', models=len(models), cases=len(case_ids), metric=metric):
        tables: Dict[str, pd.DataFrame] = {
            model: group.set_index("case_id").loc[case_ids].reset_index()
            for model, group in frame.groupby("model_id")
        }
        summaries = {}
        for model in models:
            table = tables[model]
            if score_mode:
                values = table[["score", "label"]].to_numpy(dtype=float)
                summaries[model] = bootstrap_ci(values, _auc_statistic, B=B, level=level, seed=seed)
            else:
                values = table["value"].to_numpy(dtype=float)
                if not np.isfinite(values).all():
                    raise EvaluationError(f"non-finite values for model {model}")
                summaries[model] = bootstrap_ci(values, np.mean, B=B, level=level, seed=seed)

        ranked = sorted(models, key=lambda m: (-summaries[m].estimate, m))
        result = [
            ModelSummary(model_id=model, metric=metric, summary=summaries[model], rank=rank)
            for rank, model in enumerate(ranked, start=1)
        ]
        if test is None:
            return EvaluationSummary(models=result)

        test = ComparisonTest(test)
        top, second = ranked[0], ranked[1]
        if score_mode:
            if test is not ComparisonTest.PERMUTATION:
                raise EvaluationError("score-mode results support only the permutation test")
            p = _auc_swap_permutation(tables[top], tables[second], permutations, seed)
        else:
            paired = PairedScores(tables[top]["value"].to_numpy(dtype=float),
                                  tables[second]["value"].to_numpy(dtype=float), case_ids)
            if test is ComparisonTest.WILCOXON:
                p = wilcoxon_one_sided(paired)
            else:
                p = paired_permutation_one_sided(paired, N=permutations, seed=seed)

        comparison = Comparison(test=test, top_model=top, second_model=second, n_pairs=len(case_ids),
                                p_value=p, p_rendered=render_p_value(p))
        logfire.info('Model comparison', test=test.value, top=top, second=second, p_value=p)
        return EvaluationSummary(models=result, comparison=comparison)


def write_summary(summary: EvaluationSummary, out_dir: PathLike, stem: str = "summary") -> Dict[str, Path]:
    out_dir = Path(out_dir)
    csv_path, json_path = out_dir / f"{stem}.csv", out_dir / f"{stem}.json"
    with atomic_path(csv_path) as tmp:
        summary.to_frame().to_csv(tmp, index=False)
    write_json_atomic(json_path, summary.model_dump(mode="json"))
    return {"csv": csv_path, "json": json_path}
