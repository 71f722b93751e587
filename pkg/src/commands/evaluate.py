from pathlib import Path
from typing import Optional

import logfire

from src.commands.common import PathLike
from src.config import settings
from src.stats import ComparisonTest, EvaluationSummary, compare_models, load_results, write_summary


def cmd_eval(results: PathLike, test: Optional[str] = None, bootstrap: int = settings.BOOTSTRAP_REPLICATES,
             level: float = settings.CONFIDENCE_LEVEL, seed: int = settings.DEFAULT_SEED,
             permutations: int = settings.PERMUTATIONS, out_dir: Optional[PathLike] = None) -> EvaluationSummary:
    """Summarize per-case results with bootstrap CIs and an optional top-vs-second test; writes CSV and JSON."""
    results = Path(results)
    with logfire.span('evaluate', results=str(results), test=test, bootstrap=bootstrap):
        frame = load_results(results)
        summary = compare_models(frame, ComparisonTest(test) if test else None, B=bootstrap, level=level,
                                 seed=seed, permutations=permutations)
        paths = write_summary(summary, out_dir or settings.OUTPUT_DIR, stem=f"{results.stem}_summary")

    print(summary.to_frame().to_string(index=False))
    if summary.comparison is not None:
        c = summary.comparison
        print(f"{c.test.value}: {c.top_model} > {c.second_model}, p = {c.p_rendered}")
    print(f"Summary -> {paths['csv']}, {paths['json']}")
    return summary
