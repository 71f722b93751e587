import json
from itertools import product

import numpy as np
import pandas as pd
import pytest
from scipy.stats import bootstrap, rankdata

from src.exceptions import EvaluationError, InvalidInputError, UndefinedStatisticError
from src.stats import (
    PairedScores,
    accuracy,
    auc,
    bootstrap_ci,
    compare_models,
    dice,
    kfold_splits,
    load_results,
    macro_f1,
    paired_permutation_one_sided,
    render_p_value,
    wilcoxon_one_sided,
    write_summary,
)


def test_dice_matches_the_set_definition():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        a, b = rng.random((4, 4, 4)) < 0.3, rng.random((4, 4, 4)) < 0.3
        set_a = {tuple(i) for i in np.argwhere(a)}
        set_b = {tuple(i) for i in np.argwhere(b)}
        if not set_a and not set_b:
            continue
        assert dice(a, b) == pytest.approx(2 * len(set_a & set_b) / (len(set_a) + len(set_b)))


def test_dice_edge_cases():
    empty = np.zeros((3, 3, 3), dtype=bool)
    full = np.ones((3, 3, 3), dtype=bool)
    assert dice(empty, empty) == 1.0
    assert dice(full, empty) == 0.0
    assert dice(full, full) == 1.0
    with pytest.raises(InvalidInputError):
        dice(full, np.ones((3, 3, 2), dtype=bool))


def pair_count_auc(scores, labels):
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    wins = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p in pos for n in neg)
    return wins / (len(pos) * len(neg))


def test_auc_matches_pair_counting():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        n = int(rng.integers(4, 30))
        labels = rng.integers(0, 2, size=n)
        if labels.min() == labels.max():
            continue
        # Rounded scores give plenty of ties
        scores = np.round(rng.random(n), 1)
        assert auc(scores, labels) == pytest.approx(pair_count_auc(scores, labels))


def test_auc_properties():
    labels = np.array([0, 1, 0, 1, 1, 0])
    scores = np.array([0.1, 0.9, 0.3, 0.7, 0.2, 0.6])
    assert auc(np.full(6, 0.5), labels) == 0.5
    assert auc(scores, labels) + auc(scores, 1 - labels) == pytest.approx(1.0)
    assert auc(np.exp(3 * scores), labels) == pytest.approx(auc(scores, labels))
    assert auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0
    with pytest.raises(UndefinedStatisticError):
        auc([0.1, 0.2], [1, 1])
    with pytest.raises(InvalidInputError):
        auc([0.1, 0.2], [0, 2])


def counted_f1(predictions, labels, classes, exclude_absent=False):
    scores = []
    for cls in classes:
        tp = sum(p == cls and l == cls for p, l in zip(predictions, labels))
        fp = sum(p == cls and l != cls for p, l in zip(predictions, labels))
        fn = sum(p != cls and l == cls for p, l in zip(predictions, labels))
        if tp + fp + fn == 0:
            if not exclude_absent:
                scores.append(0.0)
            continue
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        scores.append(2 * precision * recall / (precision + recall) if precision + recall else 0.0)
    return sum(scores) / len(scores)


def test_accuracy_and_macro_f1_match_counting():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        n, k = int(rng.integers(1, 40)), int(rng.integers(2, 6))
        predictions = rng.integers(0, k, size=n).tolist()
        labels = rng.integers(0, k, size=n).tolist()
        seen = sorted(set(predictions) | set(labels))
        assert accuracy(predictions, labels) == pytest.approx(sum(p == l for p, l in zip(predictions, labels)) / n)
        assert macro_f1(predictions, labels) == pytest.approx(counted_f1(predictions, labels, seen))
        assert macro_f1(predictions, labels, n_classes=k + 1) == pytest.approx(
            counted_f1(predictions, labels, range(k + 1)))
        assert macro_f1(predictions, labels, n_classes=k + 1, exclude_absent=True) == pytest.approx(
            counted_f1(predictions, labels, range(k + 1), exclude_absent=True))


def test_accuracy_and_macro_f1():
    predictions, labels = [0, 0, 1, 2], [0, 1, 1, 1]
    assert accuracy(predictions, labels) == 0.5
    per_class = [2 / 3, 1 / 2, 0.0]
    assert macro_f1(predictions, labels) == pytest.approx(np.mean(per_class))
    assert macro_f1(predictions, labels, n_classes=4) == pytest.approx(sum(per_class) / 4)
    assert macro_f1(predictions, labels, n_classes=4, exclude_absent=True) == pytest.approx(np.mean(per_class))
    assert macro_f1([1, 1], [1, 1]) == 1.0
    with pytest.raises(InvalidInputError):
        accuracy([], [])


def test_bootstrap_of_a_constant_collapses():
    summary = bootstrap_ci(np.full(40, 0.75), B=200, seed=0)
    assert (summary.estimate, summary.ci_low, summary.ci_high) == (0.75, 0.75, 0.75)
    assert summary.replicates == 200
    assert summary.n == 40


def test_bootstrap_is_deterministic_and_calibrated():
    values = np.random.default_rng(2).random(200)
    first = bootstrap_ci(values, B=2000, level=0.95, seed=7)
    assert first == bootstrap_ci(values, B=2000, level=0.95, seed=7)
    assert first.ci_low <= first.estimate <= first.ci_high
    normal_width = 2 * 1.96 * values.std(ddof=1) / np.sqrt(values.size)
    assert abs((first.ci_high - first.ci_low) - normal_width) <= 0.3 * normal_width


def test_bootstrap_skips_undefined_replicates():
    rows = np.array([[0.9, 1], [0.8, 1], [0.1, 0], [0.2, 0], [0.7, 1]])
    summary = bootstrap_ci(rows, lambda r: auc(r[:, 0], r[:, 1].astype(int)), B=300, seed=1)
    assert summary.estimate == 1.0
    assert 0 < summary.replicates < 300
    with pytest.raises(InvalidInputError):
        bootstrap_ci(np.array([]))
    with pytest.raises(InvalidInputError):
        bootstrap_ci(np.ones(3), level=1.0)

    with pytest.raises(UndefinedStatisticError):
        bootstrap_ci(rows[:2], lambda r: auc(r[:, 0], r[:, 1].astype(int)), B=50, seed=1)


def test_bootstrap_agrees_with_the_scipy_percentile_interval():
    values = np.random.default_rng(8).gamma(2.0, size=60)
    summary = bootstrap_ci(values, B=1000, level=0.9, seed=3)
    reference = bootstrap((values,), np.mean, n_resamples=1000, confidence_level=0.9, method="percentile",
                          random_state=np.random.default_rng(3))
    assert summary.ci_low == pytest.approx(reference.confidence_interval.low)
    assert summary.ci_high == pytest.approx(reference.confidence_interval.high)
    assert summary.replicates == 1000


def test_bootstrap_of_a_single_case():
    summary = bootstrap_ci([0.4], B=100)
    assert (summary.ci_low, summary.ci_high, summary.replicates, summary.n) == (0.4, 0.4, 100, 1)


def test_kfold_partitions_the_cases():
    folds = kfold_splits(23, 5, seed=3)
    assert sorted(len(f) for f in folds) == [4, 4, 5, 5, 5]
    assert sorted(np.concatenate(folds).tolist()) == list(range(23))
    assert all(np.array_equal(a, b) for a, b in zip(folds, kfold_splits(23, 5, seed=3)))
    with pytest.raises(InvalidInputError):
        kfold_splits(3, 5)


def test_wilcoxon_five_positive_pairs():
    paired = PairedScores([0.9, 0.8, 0.85, 0.7, 0.95], [0.5, 0.6, 0.55, 0.4, 0.65])
    p = wilcoxon_one_sided(paired)
    assert p == pytest.approx(1 / 32)
    assert render_p_value(p) == "0.031"

    reversed_pairs = PairedScores(paired.b, paired.a)
    # P(W+ >= 0) covers every sign pattern
    assert wilcoxon_one_sided(reversed_pairs) == 1.0


def brute_force_wilcoxon(d):
    d = d[d != 0]
    ranks = rankdata(np.abs(d))
    observed = ranks[d > 0].sum()
    hits = 0
    for signs in product((0, 1), repeat=d.size):
        hits += np.dot(signs, ranks) >= observed - 1e-9
    return hits / 2 ** d.size


def test_wilcoxon_matches_sign_enumeration():
    rng = np.random.default_rng(4)
    for i in range(200):
        n = i % 12 + 1
        a = np.round(rng.normal(0.2, 1.0, size=n), 1)
        b = np.round(rng.normal(0.0, 1.0, size=n), 1)
        if np.all(a == b):
            continue
        assert wilcoxon_one_sided(PairedScores(a, b)) == pytest.approx(brute_force_wilcoxon(a - b))


def test_wilcoxon_normal_approximation_is_close_to_exact():
    rng = np.random.default_rng(5)
    a, b = rng.normal(0.3, 1.0, size=20), rng.normal(0.0, 1.0, size=20)
    paired = PairedScores(a, b)
    assert wilcoxon_one_sided(paired, exact=False) == pytest.approx(wilcoxon_one_sided(paired, exact=True), abs=0.02)


def test_wilcoxon_needs_a_nonzero_difference():
    with pytest.raises(UndefinedStatisticError):
        wilcoxon_one_sided(PairedScores([1.0, 2.0], [1.0, 2.0]))


def test_permutation_test_enumerates_small_samples():
    assert paired_permutation_one_sided(PairedScores([1.0, 1.0, 1.0], [0.0, 0.0, 0.0])) == 1 / 8
    assert paired_permutation_one_sided(PairedScores([0.5, 0.5], [0.5, 0.5])) == 1.0


def brute_force_permutation(d):
    observed = d.mean()
    hits = sum(np.dot(signs, d) / d.size >= observed - 1e-9 for signs in product((-1.0, 1.0), repeat=d.size))
    return hits / 2 ** d.size


def test_permutation_enumeration_matches_sign_flipping():
    rng = np.random.default_rng(9)
    for n in range(1, 11):
        paired = PairedScores(rng.normal(0.3, 1.0, size=n), rng.normal(0.0, 1.0, size=n))
        assert paired_permutation_one_sided(paired, exhaustive=True) == pytest.approx(
            brute_force_permutation(paired.differences))


@pytest.mark.parametrize("n", range(1, 11))
def test_monte_carlo_permutation_agrees_with_enumeration(n):
    rng = np.random.default_rng(6 + n)
    paired = PairedScores(rng.normal(0.4, 1.0, size=n), rng.normal(0.0, 1.0, size=n))
    exact = paired_permutation_one_sided(paired, exhaustive=True)
    sampled = paired_permutation_one_sided(paired, N=10_000, seed=1, exhaustive=False)
    assert sampled == pytest.approx(exact, abs=0.02)


def test_permutation_auto_rule_samples_large_inputs():
    rng = np.random.default_rng(12)
    paired = PairedScores(rng.normal(0.5, 1.0, size=25), rng.normal(0.0, 1.0, size=25))
    p = paired_permutation_one_sided(paired, N=999, seed=2)
    # Monte Carlo p-values live on the (1 + count) / (N + 1) lattice
    assert 0 < p <= 1
    assert (p * 1000) == pytest.approx(round(p * 1000))
    assert p == paired_permutation_one_sided(paired, N=999, seed=2, exhaustive=False)
    with pytest.raises(InvalidInputError):
        paired_permutation_one_sided(PairedScores(np.ones(21), np.zeros(21)), exhaustive=True)


def test_permutation_with_more_draws_than_patterns_stays_monte_carlo():
    paired = PairedScores(np.ones(21), np.zeros(21))
    p = paired_permutation_one_sided(paired, N=2 ** 21, seed=4)
    # Only the all-positive pattern reaches the observed mean
    assert 1 / (2 ** 21 + 1) <= p < 1e-4
    small = paired_permutation_one_sided(PairedScores(np.ones(4), np.zeros(4)), N=5000, seed=4, exhaustive=False)
    assert small == pytest.approx(1 / 16, abs=0.02)


def test_paired_scores_validation():
    with pytest.raises(InvalidInputError):
        PairedScores([1.0], [1.0, 2.0])
    with pytest.raises(InvalidInputError):
        PairedScores([], [])
    with pytest.raises(InvalidInputError):
        PairedScores([np.nan], [1.0])


@pytest.mark.parametrize("p, text", [(0.0004, "<0.001"), (0.001, "0.001"), (0.5, "0.500"), (0.03125, "0.031")])
def test_p_value_rendering(p, text):
    assert render_p_value(p) == text


def value_frame():
    top = [0.9, 0.8, 0.85, 0.7, 0.95]
    second = [0.5, 0.6, 0.55, 0.4, 0.65]
    rows = [{"case_id": f"c{i}", "model_id": "lesion-aug", "value": v} for i, v in enumerate(top)]
    rows += [{"case_id": f"c{i}", "model_id": "baseline", "value": v} for i, v in enumerate(second)]
    return pd.DataFrame(rows)


def test_compare_models_ranks_and_tests_the_top_pair():
    summary = compare_models(value_frame(), test="wilcoxon", B=200, seed=0)
    assert [m.model_id for m in summary.models] == ["lesion-aug", "baseline"]
    assert summary.models[0].summary.estimate == pytest.approx(0.84)
    assert summary.comparison.top_model == "lesion-aug"
    assert summary.comparison.p_rendered == "0.031"
    assert summary.comparison.n_pairs == 5

    frame = summary.to_frame()
    assert frame.loc[frame["model_id"] == "lesion-aug", "p_rendered"].item() == "0.031"
    assert frame.loc[frame["model_id"] == "baseline", "p_value"].isna().all()


def test_compare_models_permutation_in_value_mode():
    summary = compare_models(value_frame(), test="permutation", B=100, seed=0)
    assert summary.comparison.p_value == 1 / 32


def test_compare_models_rejects_inconsistent_inputs():
    frame = value_frame()
    with pytest.raises(EvaluationError) as info:
        compare_models(frame.iloc[:-1], B=50)
    assert "c4" in str(info.value)
    with pytest.raises(EvaluationError):
        compare_models(frame[frame["model_id"] == "baseline"], test="wilcoxon", B=50)
    with pytest.raises(EvaluationError):
        compare_models(pd.concat([frame, frame.iloc[:1]]), B=50)


def score_frame():
    rng = np.random.default_rng(8)
    labels = rng.integers(0, 2, size=30)
    labels[:2] = [0, 1]
    rows = []
    for model, signal in (("sharp", 3.0), ("blunt", 0.0)):
        scores = labels * signal + rng.normal(0.0, 1.0, size=30)
        rows += [{"case_id": f"c{i}", "model_id": model, "score": s, "label": int(l)}
                 for i, (s, l) in enumerate(zip(scores, labels))]
    return pd.DataFrame(rows)


def test_score_mode_bootstraps_auc():
    summary = compare_models(score_frame(), test="permutation", B=200, seed=0, permutations=500)
    assert all(m.metric == "auc" for m in summary.models)
    assert summary.models[0].model_id == "sharp"
    assert 0.0 < summary.comparison.p_value <= 1.0
    with pytest.raises(EvaluationError):
        compare_models(score_frame(), test="wilcoxon", B=50)


def test_results_files_round_trip(tmp_path):
    csv_path = tmp_path / "results.csv"
    value_frame().to_csv(csv_path, index=False)
    frame = load_results(csv_path)
    assert set(frame["model_id"]) == {"lesion-aug", "baseline"}

    bad = tmp_path / "bad.csv"
    bad.write_text("case_id,value\nc0,1.0\n", encoding="utf-8")
    with pytest.raises(EvaluationError):
        load_results(bad)
    with pytest.raises(EvaluationError):
        load_results(tmp_path / "missing.csv")


def test_write_summary_emits_csv_and_json(tmp_path):
    summary = compare_models(value_frame(), test="wilcoxon", B=100, seed=0)
    paths = write_summary(summary, tmp_path, stem="results_summary")
    table = pd.read_csv(paths["csv"])
    assert list(table["model_id"]) == ["lesion-aug", "baseline"]
    payload = json.loads(paths["json"].read_text())
    assert payload["comparison"]["p_rendered"] == "0.031"
