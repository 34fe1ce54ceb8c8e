import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resp_screen.errors import IdMismatch, OutOfRangeProbability, ParseError, SingleClassLabels
from resp_screen.evaluation import (align, auc, evaluate, grid_rates, read_scores, roc_curve,
                                    specificity_at_sensitivity, threshold_grid, write_roc_csv, write_scores)


def rank_auc(scores, labels):
    """Mann-Whitney statistic with ties counted as one half, in percent."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    pos, neg = scores[labels == 1], scores[labels == 0]
    wins = (pos[:, None] > neg[None, :]).sum() + 0.5 * (pos[:, None] == neg[None, :]).sum()
    return 100.0 * wins / (pos.size * neg.size)


def brute_force_rates(scores, labels, thresholds):
    fpr, tpr = [], []
    n_pos = sum(1 for y in labels if y == 1)
    n_neg = len(labels) - n_pos
    for t in thresholds:
        tp = fp = 0
        for s, y in zip(scores, labels):
            if s >= t:
                if y == 1:
                    tp += 1
                else:
                    fp += 1
        fpr.append(fp / n_neg)
        tpr.append(tp / n_pos)
    return np.array(fpr), np.array(tpr)


def random_scores(rng, n, ties=True):
    labels = rng.integers(0, 2, n)
    labels[:2] = [0, 1]
    scores = rng.random(n)
    if ties:
        k = n // 4
        scores[rng.choice(n, k, replace=False)] = rng.choice(scores, k)
        scores[rng.choice(n, k, replace=False)] = np.round(rng.random(k), 2)
    return scores, labels


def test_separable_pair():
    s = evaluate([0.9, 0.1], [1, 0])
    assert (0.0, 1.0) in s.points
    assert s.auc == 100.0 and s.spec_at_80_sens == 100.0


def test_constant_scores():
    s = evaluate([0.4] * 6, [0, 1, 0, 1, 1, 0])
    assert s.points == [(0.0, 0.0), (1.0, 1.0)]
    assert s.auc == 50.0 and s.spec_at_80_sens == 0.0


def test_single_class_rejected():
    with pytest.raises(SingleClassLabels):
        roc_curve([0.1, 0.2], [1, 1])


def test_grid_endpoints():
    g = threshold_grid()
    assert g.size == 10001 and g[0] == 0.0 and g[-1] == 1.0 and g[3000] == 0.3


def test_score_of_one_still_needs_anchor():
    thr, fpr, tpr = roc_curve([1.0, 0.0], [1, 0])
    assert np.isinf(thr[0]) and (fpr[0], tpr[0]) == (0.0, 0.0)
    assert (fpr[1], tpr[1]) == (0.0, 1.0)


def test_rates_match_brute_force(rng):
    scores, labels = random_scores(rng, 20)
    grid = threshold_grid()
    fpr, tpr = grid_rates(scores, labels, grid)
    bf, bt = brute_force_rates(scores, labels, grid)
    np.testing.assert_array_equal(fpr, bf)
    np.testing.assert_array_equal(tpr, bt)


@pytest.mark.parametrize("seed", range(5))
def test_curve_monotone_and_spanning(seed):
    scores, labels = random_scores(np.random.default_rng(seed), 200)
    s = evaluate(scores, labels)
    assert s.points[0] == (0.0, 0.0) and s.points[-1] == (1.0, 1.0)
    assert np.all(np.diff(s.fpr) >= 0) and np.all(np.diff(s.tpr) >= 0)
    assert np.all(np.diff(s.thresholds) < 0)
    assert 0 <= s.auc <= 100


@pytest.mark.parametrize("seed", range(5))
def test_auc_matches_rank_statistic(seed):
    scores, labels = random_scores(np.random.default_rng(100 + seed), 200)
    assert abs(evaluate(scores, labels).auc - rank_auc(scores, labels)) <= 0.05


def test_auc_stable_under_monotone_transform(rng):
    scores, labels = random_scores(rng, 300, ties=False)
    # square root keeps grid ordering for well-separated scores; the oracle is fully invariant
    transformed = np.sqrt(scores)
    assert rank_auc(transformed, labels) == rank_auc(scores, labels)
    for s in (scores, transformed):
        assert abs(evaluate(s, labels).auc - rank_auc(scores, labels)) <= 0.05


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_label_swap_complements_auc(seed):
    scores, labels = random_scores(np.random.default_rng(seed), 60)
    a = evaluate(scores, labels).auc
    b = evaluate(scores, 1 - labels).auc
    assert abs(a + b - 100.0) <= 0.1


def test_spec_at_80_hand_walk():
    # 5 positives, 5 negatives; walking thresholds down:
    # 0.9 P, 0.8 P, 0.7 N, 0.6 P, 0.5 N, 0.4 P, 0.3 N, 0.2 P, 0.1 N, 0.05 N
    scores = [0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.05]
    labels = [1, 1, 0, 1, 0, 1, 0, 1, 0, 0]
    # TPR reaches 4/5 after 0.4, where two negatives (0.7, 0.5) are above: spec = 3/5
    s = evaluate(scores, labels)
    assert s.spec_at_80_sens == pytest.approx(60.0, abs=1e-12)
    # area: steps of height 2/5, 3/5, 4/5, 1, 1 each 1/5 wide
    assert s.auc == pytest.approx(100 * (2 + 3 + 4 + 5 + 5) / 25, abs=1e-12)


def test_spec_is_100_only_with_clean_80_percent():
    s = evaluate([0.9, 0.8, 0.7, 0.6, 0.1, 0.5], [1, 1, 1, 1, 1, 0])
    assert s.spec_at_80_sens == 100.0
    s = evaluate([0.9, 0.8, 0.7, 0.95, 0.1, 0.5], [1, 1, 1, 0, 1, 1])
    assert s.spec_at_80_sens < 100.0


def test_spec_target_validation():
    with pytest.raises(ValueError):
        specificity_at_sensitivity([0, 1], [0, 1], target=0)


def test_auc_trapezoid():
    assert auc([0, 0.5, 1], [0, 1, 1]) == 75.0


def test_score_round_trip(tmp_path, rng):
    scores = {f"id_{i:03d}": float(p) for i, p in enumerate(rng.random(100))}
    path = tmp_path / "s.csv"
    write_scores(scores, path)
    back = read_scores(path)
    assert list(back) == list(scores)
    assert max(abs(back[k] - scores[k]) for k in scores) <= 5e-7 + 1e-12


def test_score_file_rejects_out_of_range(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("id,probability\na,0.5\nb,1.5\n")
    with pytest.raises(OutOfRangeProbability):
        read_scores(path)
    with pytest.raises(OutOfRangeProbability):
        write_scores({"a": -0.1}, path)


def test_score_file_empty_and_headerless(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert read_scores(empty) == {}
    only_header = tmp_path / "header.csv"
    only_header.write_text("id,probability\n")
    assert read_scores(only_header) == {}
    headerless = tmp_path / "bad.csv"
    headerless.write_text("a,0.5\n")
    with pytest.raises(ParseError):
        read_scores(headerless)


def test_score_file_duplicate_and_garbage(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("id,probability\na,0.5\na,0.6\n")
    with pytest.raises(ParseError):
        read_scores(path)
    path.write_text("id,probability\na,half\n")
    with pytest.raises(ParseError):
        read_scores(path)


def test_align_names_missing_id():
    with pytest.raises(IdMismatch, match="c"):
        align({"a": 0.1, "b": 0.2}, {"a": 0, "b": 1, "c": 1})
    ids, s, y = align({"b": 0.2, "a": 0.1}, {"a": 0, "b": 1})
    assert ids == ["a", "b"] and list(s) == [0.1, 0.2] and list(y) == [0, 1]


def test_roc_csv(tmp_path):
    path = tmp_path / "roc.csv"
    write_roc_csv(evaluate([0.9, 0.1], [1, 0]), path)
    lines = path.read_text().splitlines()
    assert lines[0] == "threshold,fpr,tpr"
    assert lines[1] == "inf,0.000000,0.000000"
    assert lines[-1].endswith("1.000000,1.000000")
