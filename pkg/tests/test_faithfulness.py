from __future__ import annotations

import json
import random

import numpy as np
import pytest

from docsimpeval.errors import ConfigError, MetricError, ValidationError
from docsimpeval.faithfulness import (
    ConvWeights,
    QAItem,
    ScoreMatrix,
    ScoreTriple,
    f1_combine,
    load_conv_weights,
    summac_conv,
    summac_conv_scores,
    summac_histogram,
    summac_precision,
    summac_recall,
)


def test_precision_recall_worked_examples():
    m = [[0.9, 0.1], [0.2, 0.8]]
    assert summac_precision(m) == pytest.approx(0.85)
    assert summac_recall(m) == pytest.approx(0.85)
    skewed = [[0.0, 0.0], [0.9, 0.9]]
    assert summac_recall(skewed) == pytest.approx(0.45)
    assert summac_precision(skewed) == pytest.approx(0.9)


def test_recall_is_precision_of_transpose():
    rng = np.random.default_rng(17)
    for _ in range(2000):
        rows = rng.integers(1, 11)
        cols = rng.integers(1, 11)
        m = ScoreMatrix(rng.random((rows, cols)))
        assert summac_recall(m) == pytest.approx(
            summac_precision(m.transpose()), abs=1e-12
        )
        assert summac_precision(m) == pytest.approx(
            summac_recall(m.transpose()), abs=1e-12
        )


def test_scores_bounded_by_entries():
    rng = np.random.default_rng(19)
    for _ in range(500):
        m = rng.random((rng.integers(1, 8), rng.integers(1, 8)))
        lo, hi = m.min(), m.max()
        for value in (summac_precision(m), summac_recall(m)):
            assert lo - 1e-12 <= value <= hi + 1e-12


def test_monotonicity_when_raising_an_entry():
    rng = np.random.default_rng(29)
    for _ in range(300):
        m = rng.random((rng.integers(1, 6), rng.integers(1, 6)))
        i = rng.integers(0, m.shape[0])
        j = rng.integers(0, m.shape[1])
        raised = m.copy()
        raised[i, j] = min(1.0, raised[i, j] + rng.random())
        assert summac_precision(raised) >= summac_precision(m) - 1e-12
        assert summac_recall(raised) >= summac_recall(m) - 1e-12


def test_matrix_validation():
    with pytest.raises(MetricError):
        ScoreMatrix([[]])
    with pytest.raises(MetricError):
        ScoreMatrix(np.zeros((0, 3)))
    with pytest.raises(MetricError):
        ScoreMatrix([[1.2]])
    with pytest.raises(MetricError):
        ScoreMatrix([[-0.1]])
    with pytest.raises(MetricError):
        ScoreMatrix([[float("nan")]])


def test_histogram_worked_example():
    hist = summac_histogram([[0.0], [1.0]], bins=2)
    assert hist.shape == (1, 2)
    assert hist[0].tolist() == [1, 1]


def test_histogram_right_closed_last_bin():
    hist = summac_histogram([[1.0], [0.99], [0.5]], bins=10)
    assert hist[0][9] == 2
    assert hist[0][5] == 1


def test_histogram_columns_sum_to_row_count():
    rng = np.random.default_rng(37)
    for _ in range(300):
        rows = int(rng.integers(1, 12))
        cols = int(rng.integers(1, 12))
        bins = int(rng.integers(1, 9))
        hist = summac_histogram(rng.random((rows, cols)), bins=bins)
        assert hist.shape == (cols, bins)
        assert (hist.sum(axis=1) == rows).all()


def test_conv_weights_loading(tmp_path):
    path = tmp_path / "w.json"
    path.write_text(json.dumps({"bins": 3, "weights": [0.1, 0.2, 0.7]}))
    weights = load_conv_weights(path)
    assert weights.bins == 3
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"bins": 4, "weights": [1.0]}))
    with pytest.raises(ConfigError):
        load_conv_weights(bad)
    with pytest.raises(ConfigError):
        load_conv_weights(tmp_path / "missing.json")
    with pytest.raises(ConfigError):
        ConvWeights(2, (0.5, float("nan")))


def test_conv_scores():
    weights = ConvWeights(2, (0.0, 1.0))
    # column one has both rows in the upper half, column two has one
    scores = summac_conv_scores([[0.9, 0.2], [0.8, 0.9]], weights)
    assert scores.tolist() == pytest.approx([1.0, 0.5])
    assert summac_conv([[0.9, 0.2], [0.8, 0.9]], weights) == pytest.approx(0.75)
    with pytest.raises(ConfigError):
        summac_conv([[0.5]], None)


# Externally reported (P, R, F1) triples whose F1 column should be the
# harmonic fold of the other two, labeled by metric; printed values are
# rounded to 2dp.
REPORTED_PRF_TRIPLES = [
    # in-domain: summac, qafe, esa blocks
    ("summac", (0.61, 0.47, 0.53)), ("summac", (0.65, 0.47, 0.55)),
    ("summac", (0.66, 0.52, 0.58)), ("summac", (0.65, 0.50, 0.57)),
    ("summac", (0.65, 0.48, 0.56)),
    ("qafe", (3.86, 3.02, 3.39)), ("qafe", (3.95, 3.10, 3.47)),
    ("qafe", (4.00, 3.29, 3.61)), ("qafe", (3.98, 3.16, 3.52)),
    ("qafe", (3.95, 3.11, 3.48)),
    ("esa", (0.59, 0.47, 0.52)), ("esa", (0.61, 0.48, 0.53)),
    ("esa", (0.60, 0.51, 0.55)), ("esa", (0.60, 0.49, 0.54)),
    ("esa", (0.60, 0.48, 0.53)),
    # out-of-domain blocks
    ("summac", (0.70, 0.38, 0.50)), ("summac", (0.76, 0.39, 0.51)),
    ("summac", (0.73, 0.41, 0.53)), ("summac", (0.68, 0.38, 0.49)),
    ("qafe", (3.28, 2.18, 2.62)), ("qafe", (3.78, 2.11, 2.71)),
    ("qafe", (3.61, 2.28, 2.79)), ("qafe", (3.10, 2.06, 2.48)),
    ("esa", (0.58, 0.34, 0.43)), ("esa", (0.64, 0.35, 0.45)),
    ("esa", (0.62, 0.37, 0.47)), ("esa", (0.57, 0.33, 0.42)),
]

# the direct ±0.005 check is known to miss exactly these five, each
# attributable to the 2dp rounding of the P/R inputs
KNOWN_STRICT_MISSES = {
    (0.65, 0.48, 0.56),
    (0.61, 0.48, 0.53),
    (0.70, 0.38, 0.50),
    (0.76, 0.39, 0.51),
    (0.62, 0.37, 0.47),
}


def test_f1_hypothesis_reported_triples():
    # The F1 column should be the harmonic fold of P and R modulo table
    # rounding. Inputs are 2dp-rounded, so consistency means: some pair
    # within half-ulp of the printed P and R folds to within half-ulp of
    # the printed F1.
    triples = [t for _, t in REPORTED_PRF_TRIPLES]
    strict_misses = []
    for p, r, f1 in triples:
        direct = f1_combine(p, r)
        if abs(direct - f1) > 0.005:
            strict_misses.append((p, r, f1, direct))
        # interval consistency: scan the input rounding box
        steps = np.linspace(-0.005, 0.005, 21)
        consistent = any(
            abs(f1_combine(p + dp, r + dr) - f1) <= 0.005
            for dp in steps
            for dr in steps
        )
        assert consistent, (p, r, f1, direct)
    # documented negative result: the strict misses are pinned
    assert {(m[0], m[1], m[2]) for m in strict_misses} == KNOWN_STRICT_MISSES


def test_score_triple_from_pr():
    t = ScoreTriple.from_pr(4.0, 3.0)
    assert t.f1 == pytest.approx(2 * 4 * 3 / 7)


def test_qa_item_invariants():
    QAItem("q", "a", "a", 5.0, True)
    QAItem("q", "a", None, None, False)
    with pytest.raises(ValidationError):
        QAItem("q", "a", "a", None, True)
    with pytest.raises(ValidationError):
        QAItem("q", "a", None, 3.0, False)
    with pytest.raises(ValidationError):
        QAItem("q", "a", "a", 0.5, True)
