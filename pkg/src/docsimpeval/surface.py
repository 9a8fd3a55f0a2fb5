"""Surface metrics: readability (FKGL), input overlap (BLEU), lengths."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import MetricError
from .textcore import Document, doc_stats

# Flesch-Kincaid grade-level coefficients, pinned as defaults.
FKGL_SENTENCE_WEIGHT = 0.39
FKGL_SYLLABLE_WEIGHT = 11.8
FKGL_INTERCEPT = -15.59

BLEU_MAX_ORDER = 4


@dataclass(frozen=True)
class SurfaceReport:
    fkgl: float
    bleu_c: float
    tokens: float
    sents: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.bleu_c <= 100.0:
            raise MetricError(f"bleu_c out of range: {self.bleu_c}")
        if self.tokens <= 0 or self.sents <= 0:
            raise MetricError("token and sentence means must be positive")


def fkgl(
    doc: Document,
    *,
    sentence_weight: float = FKGL_SENTENCE_WEIGHT,
    syllable_weight: float = FKGL_SYLLABLE_WEIGHT,
    intercept: float = FKGL_INTERCEPT,
) -> float:
    """Flesch-Kincaid grade level of one document."""
    stats = doc_stats(doc)
    if stats.word_count == 0:
        raise MetricError("fkgl needs at least one word token")
    if stats.sentence_count == 0:
        raise MetricError("fkgl needs at least one sentence")
    words_per_sentence = stats.word_count / stats.sentence_count
    syllables_per_word = stats.syllable_count / stats.word_count
    return (
        sentence_weight * words_per_sentence
        + syllable_weight * syllables_per_word
        + intercept
    )


def ngram_counts(tokens: Sequence[str], order: int) -> Counter:
    return Counter(
        tuple(tokens[i : i + order]) for i in range(len(tokens) - order + 1)
    )


def clipped_ngram_stats(
    hypothesis: Sequence[str],
    reference: Sequence[str],
    max_order: int = BLEU_MAX_ORDER,
) -> list[tuple[int, int]]:
    """Per-order (clipped match count, hypothesis n-gram total) pairs."""
    stats = []
    for order in range(1, max_order + 1):
        hyp_counts = ngram_counts(hypothesis, order)
        ref_counts = ngram_counts(reference, order)
        clipped = sum(
            min(count, ref_counts[gram]) for gram, count in hyp_counts.items()
        )
        total = max(len(hypothesis) - order + 1, 0)
        stats.append((clipped, total))
    return stats


def bleu_score(
    hypothesis: Sequence[str],
    reference: Sequence[str],
    *,
    max_order: int = BLEU_MAX_ORDER,
    smoothing: bool = True,
) -> float:
    """Single-reference BLEU on a 0..100 scale.

    Uniform weights over orders 1..max_order, clipped modified precision,
    brevity penalty exp(1 - r/c) when the hypothesis is shorter. When any
    raw clipped count is zero and smoothing is on, orders >= 2 get add-one
    smoothing on both numerator and denominator; order 1 never does, so
    sharing no unigram with the reference still scores 0.
    """
    if not hypothesis or not reference:
        raise MetricError("bleu needs non-empty token sequences")
    stats = clipped_ngram_stats(hypothesis, reference, max_order)
    smooth = smoothing and any(clipped == 0 for clipped, _ in stats)
    log_sum = 0.0
    for order, (clipped, total) in enumerate(stats, start=1):
        if smooth and order >= 2:
            clipped += 1
            total += 1
        if clipped == 0 or total == 0:
            return 0.0
        log_sum += math.log(clipped / total) / max_order
    hyp_len, ref_len = len(hypothesis), len(reference)
    if hyp_len < ref_len:
        brevity = math.exp(1.0 - ref_len / hyp_len)
    else:
        brevity = 1.0
    return 100.0 * brevity * math.exp(log_sum)


def bleu_c(output: Document, source: Document, *, smoothing: bool = True) -> float:
    """BLEU of the whole output against the whole input as sole reference.

    High values mean the output copies its input; read as conservatism,
    not quality.
    """
    return bleu_score(
        output.token_surfaces(), source.token_surfaces(), smoothing=smoothing
    )


def length_stats(docs: Iterable[Document]) -> tuple[float, float]:
    """Mean token count and mean sentence count over a batch."""
    token_counts: list[int] = []
    sent_counts: list[int] = []
    for doc in docs:
        stats = doc_stats(doc)
        token_counts.append(stats.token_count)
        sent_counts.append(stats.sentence_count)
    if not token_counts:
        raise MetricError("length_stats needs at least one document")
    n = len(token_counts)
    return math.fsum(token_counts) / n, math.fsum(sent_counts) / n


def surface_report(
    pairs: Sequence[tuple[Document, Document]], *, smoothing: bool = True
) -> SurfaceReport:
    """Batch surface metrics over (output, source) document pairs."""
    if not pairs:
        raise MetricError("surface_report needs at least one pair")
    outputs = [out for out, _ in pairs]
    fkgl_mean = math.fsum(fkgl(out) for out in outputs) / len(pairs)
    bleu_mean = math.fsum(
        bleu_c(out, src, smoothing=smoothing) for out, src in pairs
    ) / len(pairs)
    tokens, sents = length_stats(outputs)
    return SurfaceReport(fkgl=fkgl_mean, bleu_c=bleu_mean, tokens=tokens, sents=sents)
