"""
Evaluation metrics, bootstrap intervals and one-sided paired tests.
"""

from src.stats.metrics import accuracy, auc, dice, macro_f1
from src.stats.reporting import (
    Comparison,
    ComparisonTest,
    EvaluationSummary,
    ModelSummary,
    compare_models,
    load_results,
    render_p_value,
    write_summary,
)
from src.stats.resampling import MetricSummary, bootstrap_ci, kfold_splits
from src.stats.significance import PairedScores, paired_permutation_one_sided, wilcoxon_one_sided

__all__ = [
    'accuracy',
    'auc',
    'dice',
    'macro_f1',
    'Comparison',
    'ComparisonTest',
    'EvaluationSummary',
    'ModelSummary',
    'compare_models',
    'load_results',
    'render_p_value',
    'write_summary',
    'MetricSummary',
    'bootstrap_ci',
    'kfold_splits',
    'PairedScores',
    'paired_permutation_one_sided',
    'wilcoxon_one_sided',
]
