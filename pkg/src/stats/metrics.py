from typing import Optional, Sequence

import numpy as np
from scipy.stats import rankdata

from src.exceptions import InvalidInputError, UndefinedStatisticError


def dice(a: np.ndarray, b: np.ndarray) -> float:
    """Dice similarity 2|A∩B| / (|A| + |B|); two empty masks agree perfectly."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise InvalidInputError(f"mask shapes differ: {a.shape} vs {b.shape}")
    total = int(a.sum()) + int(b.sum())
    if total == 0:
        return 1.0
    return 2.0 * int(np.logical_and(a, b).sum()) / total


def auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """
    Area under the ROC curve in its Mann-Whitney form.

    Ties between a positive and a negative count one half, which is what
    mid-ranks give.

    Raises:
        UndefinedStatisticError: labels contain a single class
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise InvalidInputError("scores and labels must be 1-D and of equal length")
    if not np.isin(labels, (0, 1)).all():
        raise InvalidInputError("labels must be binary (0/1)")
    positive = labels == 1
    n_pos, n_neg = int(positive.sum()), int((~positive).sum())
    if n_pos == 0 or n_neg == 0:
        raise UndefinedStatisticError("AUC undefined: labels contain a single class")
    ranks = rankdata(scores, method="average")
    u = ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def _check_pair(predictions: Sequence, labels: Sequence) -> tuple:
    predictions, labels = np.asarray(predictions), np.asarray(labels)
    if predictions.shape != labels.shape or predictions.ndim != 1:
        raise InvalidInputError("predictions and labels must be 1-D and of equal length")
    if predictions.size == 0:
        raise InvalidInputError("empty input")
    return predictions, labels


def accuracy(predictions: Sequence[int], labels: Sequence[int]) -> float:
    predictions, labels = _check_pair(predictions, labels)
    return float(np.mean(predictions == labels))


def macro_f1(predictions: Sequence[int], labels: Sequence[int], n_classes: Optional[int] = None,
             exclude_absent: bool = False) -> float:
    """
    Unweighted mean of per-class F1.

    Args:
        predictions: Predicted class ids
        labels: True class ids
        n_classes: Classes 0..n_classes-1 to average over; default is every
            class seen in predictions or labels
        exclude_absent: Drop classes absent from both predictions and labels
            instead of scoring them 0

    Returns:
        float: Macro-averaged F1
    """
    predictions, labels = _check_pair(predictions, labels)
    if n_classes is None:
        classes = np.union1d(predictions, labels)
    else:
        classes = np.arange(n_classes)

    scores = []
    for cls in classes:
        predicted, actual = predictions == cls, labels == cls
        tp = int(np.sum(predicted & actual))
        fp = int(np.sum(predicted & ~actual))
        fn = int(np.sum(~predicted & actual))
        if tp + fp + fn == 0:
            if exclude_absent:
                continue
            scores.append(0.0)
            continue
        scores.append(2.0 * tp / (2 * tp + fp + fn))
    if not scores:
        raise InvalidInputError("no classes left to average")
    return float(np.mean(scores))
