"""Faithfulness metrics over sentence-pair entailment matrices and
question-answering rounds.

The entailment matrix has one row per input sentence and one column per
output sentence. Precision asks how well each output sentence is backed
by some input sentence (column maxima); recall asks how much of the
input survives into the output (row maxima), which is exactly precision
of the transposed matrix.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .entities import f1_combine
from .errors import ConfigError, MetricError, ValidationError
from .textcore import Document

__all__ = [
    "ScoreMatrix",
    "ScoreTriple",
    "FaithfulnessScores",
    "QAItem",
    "QafeResult",
    "summac_precision",
    "summac_recall",
    "summac_histogram",
    "summac_conv_scores",
    "summac_conv",
    "ConvWeights",
    "load_conv_weights",
    "qafe_precision",
    "qafe_recall",
    "f1_combine",
]


class ScoreMatrix:
    """Dense matrix of pairwise scores in [0, 1], rows = input sentences."""

    def __init__(self, values) -> None:
        arr = np.asarray(values, dtype=float)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise MetricError("score matrix must be 2-D and non-empty")
        if not np.all(np.isfinite(arr)):
            raise MetricError("score matrix entries must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise MetricError("score matrix entries must lie in [0, 1]")
        self.values = arr

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def transpose(self) -> "ScoreMatrix":
        return ScoreMatrix(self.values.T)


def _as_matrix(matrix) -> ScoreMatrix:
    return matrix if isinstance(matrix, ScoreMatrix) else ScoreMatrix(matrix)


def summac_precision(matrix) -> float:
    """Mean over output sentences of their best supporting input score."""
    m = _as_matrix(matrix)
    return float(np.mean(np.max(m.values, axis=0)))


def summac_recall(matrix) -> float:
    """Mean over input sentences of their best-covered output score."""
    m = _as_matrix(matrix)
    return float(np.mean(np.max(m.values, axis=1)))


def summac_histogram(matrix, bins: int) -> np.ndarray:
    """Per-column histograms of the score distribution.

    Equal-width bins over [0, 1]; the last bin is closed on the right so
    a score of exactly 1.0 lands in it. Returns an int array of shape
    (columns, bins) whose rows each sum to the row count of the matrix.
    """
    m = _as_matrix(matrix)
    if bins < 1:
        raise MetricError("bins must be >= 1")
    rows, cols = m.shape
    out = np.empty((cols, bins), dtype=int)
    for j in range(cols):
        counts, _ = np.histogram(m.values[:, j], bins=bins, range=(0.0, 1.0))
        out[j] = counts
    return out


@dataclass(frozen=True)
class ConvWeights:
    bins: int
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.bins < 1:
            raise ConfigError("bins must be >= 1")
        if len(self.weights) != self.bins:
            raise ConfigError(
                f"{len(self.weights)} weights for {self.bins} bins"
            )
        if any(not math.isfinite(w) for w in self.weights):
            raise ConfigError("weights must be finite")


def load_conv_weights(path: str | Path) -> ConvWeights:
    """Load trained histogram weights: {"bins": int, "weights": [...]}."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot load conv weights from {path}: {exc}") from exc
    if not isinstance(data, dict) or "bins" not in data or "weights" not in data:
        raise ConfigError(f"{path}: need 'bins' and 'weights'")
    return ConvWeights(int(data["bins"]), tuple(float(w) for w in data["weights"]))


def summac_conv_scores(matrix, weights: ConvWeights | None) -> np.ndarray:
    """Per-column score from the weighted histogram frequencies."""
    if weights is None:
        raise ConfigError("histogram scoring requires loaded conv weights")
    m = _as_matrix(matrix)
    rows, _ = m.shape
    hist = summac_histogram(m, weights.bins).astype(float) / rows
    return hist @ np.asarray(weights.weights)


def summac_conv(matrix, weights: ConvWeights | None) -> float:
    return float(np.mean(summac_conv_scores(matrix, weights)))


@dataclass(frozen=True)
class ScoreTriple:
    p: float
    r: float
    f1: float

    @classmethod
    def from_pr(cls, p: float, r: float) -> "ScoreTriple":
        return cls(p, r, f1_combine(p, r))


@dataclass(frozen=True)
class FaithfulnessScores:
    summac: ScoreTriple | None
    qafe: ScoreTriple | None


@dataclass(frozen=True)
class QAItem:
    question: str
    gold_answer: str
    predicted_answer: str | None
    overlap: float | None
    answerable: bool

    def __post_init__(self) -> None:
        if self.answerable and self.overlap is None:
            raise ValidationError("answerable item must carry an overlap score")
        if not self.answerable and self.overlap is not None:
            raise ValidationError("unanswerable item must not carry an overlap score")
        if self.overlap is not None and not 1.0 <= self.overlap <= 5.0:
            raise ValidationError(f"overlap outside the 1..5 scale: {self.overlap}")


@dataclass(frozen=True)
class QafeResult:
    score: float | None
    items: tuple[QAItem, ...]


def _qafe_round(question_doc: Document, context_doc: Document, scorer) -> QafeResult:
    """One QA round: generate from question_doc, answer from context_doc.

    Unanswerable questions are filtered out before overlap scoring; when
    nothing survives, the score is the missing-value sentinel (None),
    never 0.
    """
    generated = scorer.score_task("qg", [{"text": question_doc.raw}])[0]
    raw_items = generated.get("items", [])
    pairs: list[tuple[str, str]] = []
    for entry in raw_items:
        question = entry.get("question")
        answer = entry.get("answer")
        if not isinstance(question, str) or not isinstance(answer, str):
            raise MetricError("qg items need string 'question' and 'answer'")
        pairs.append((question, answer))
    if not pairs:
        return QafeResult(score=None, items=())
    context = context_doc.raw
    filter_results = scorer.score_task(
        "filter", [{"question": q, "context": context} for q, _ in pairs]
    )
    answerable = [bool(res.get("answerable")) for res in filter_results]
    kept = [i for i, ok in enumerate(answerable) if ok]
    qa_results = scorer.score_task(
        "qa", [{"question": pairs[i][0], "context": context} for i in kept]
    )
    predicted = {i: str(res.get("answer", "")) for i, res in zip(kept, qa_results)}
    lerc_results = scorer.score_task(
        "lerc",
        [
            {
                "question": pairs[i][0],
                "context": context,
                "gold": pairs[i][1],
                "predicted": predicted[i],
            }
            for i in kept
        ],
    )
    overlaps = {}
    for i, res in zip(kept, lerc_results):
        value = res.get("overlap")
        if not isinstance(value, (int, float)):
            raise MetricError("lerc result needs a numeric 'overlap'")
        overlaps[i] = float(value)
    items = tuple(
        QAItem(
            question=q,
            gold_answer=a,
            predicted_answer=predicted.get(i),
            overlap=overlaps.get(i),
            answerable=i in predicted,
        )
        for i, (q, a) in enumerate(pairs)
    )
    if not kept:
        return QafeResult(score=None, items=items)
    score = math.fsum(overlaps[i] for i in kept) / len(kept)
    return QafeResult(score=score, items=items)


def qafe_precision(source: Document, output: Document, scorer) -> QafeResult:
    """Questions from the output, answered against the source."""
    return _qafe_round(output, source, scorer)


def qafe_recall(source: Document, output: Document, scorer) -> QafeResult:
    """Questions from the source, answered against the output."""
    return _qafe_round(source, output, scorer)
