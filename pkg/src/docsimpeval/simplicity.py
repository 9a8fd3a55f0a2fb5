"""Simplicity scoring: per-sentence levels rolled up to documents and
batches, plus the error-versus-target aggregation and its rendering."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import IngestionError, MetricError, ValidationError


@dataclass(frozen=True)
class SentenceSLE:
    sentence_index: int
    sle: float

    def __post_init__(self) -> None:
        if self.sentence_index < 0:
            raise ValidationError("sentence_index must be non-negative")
        if not math.isfinite(self.sle):
            raise ValidationError("sle must be finite")


@dataclass(frozen=True)
class TargetLevel:
    level: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.level):
            raise ValidationError("target level must be finite")


def _level_value(target: "TargetLevel | float") -> float:
    return target.level if isinstance(target, TargetLevel) else float(target)


def sle_doc(
    scores: Sequence[SentenceSLE | float],
    expected_sentence_count: int | None = None,
) -> float:
    """Document simplicity level: mean of its sentence scores."""
    values = [s.sle if isinstance(s, SentenceSLE) else float(s) for s in scores]
    if not values:
        raise MetricError("sle_doc needs at least one sentence score")
    if expected_sentence_count is not None and len(values) != expected_sentence_count:
        raise MetricError(
            f"got {len(values)} sentence scores for {expected_sentence_count} sentences"
        )
    return math.fsum(values) / len(values)


def epsilon_sle(batch: Iterable[tuple[float, "TargetLevel | float"]]) -> float:
    """Mean absolute deviation of document levels from their targets."""
    errors = [abs(doc_level - _level_value(target)) for doc_level, target in batch]
    if not errors:
        raise MetricError("epsilon_sle needs at least one document")
    return math.fsum(errors) / len(errors)


@dataclass(frozen=True)
class LevelCell:
    epsilon: float
    raw_mean: float
    count: int


@dataclass(frozen=True)
class LevelReport:
    per_level: dict[float, LevelCell]
    total_epsilon: float
    total_raw_mean: float
    total_count: int


def level_grouped_report(
    batch: Sequence[tuple[float, "TargetLevel | float"]],
) -> LevelReport:
    """Group (document level, target) pairs by target level.

    Each level reports its own error and raw mean; the total row is the
    error over the whole batch, so it is the count-weighted combination
    of the per-level errors.
    """
    if not batch:
        raise MetricError("level_grouped_report needs at least one document")
    grouped: dict[float, list[float]] = {}
    raw: dict[float, list[float]] = {}
    for doc_level, target in batch:
        level = _level_value(target)
        grouped.setdefault(level, []).append(abs(doc_level - level))
        raw.setdefault(level, []).append(doc_level)
    per_level = {
        level: LevelCell(
            epsilon=math.fsum(errs) / len(errs),
            raw_mean=math.fsum(raw[level]) / len(raw[level]),
            count=len(errs),
        )
        for level, errs in grouped.items()
    }
    all_errors = [e for errs in grouped.values() for e in errs]
    all_raw = [v for vals in raw.values() for v in vals]
    return LevelReport(
        per_level=per_level,
        total_epsilon=math.fsum(all_errors) / len(all_errors),
        total_raw_mean=math.fsum(all_raw) / len(all_raw),
        total_count=len(all_errors),
    )


def format_level_cell(epsilon: float, raw_mean: float) -> str:
    """Render an error cell with its raw mean alongside, e.g. '0.22 (1.12)'."""
    return f"{epsilon:.2f} ({raw_mean:.2f})"


def load_sle_scores(path: str | Path) -> dict[tuple[str, str | None], list[float]]:
    """Read precomputed per-sentence scores.

    Lines look like {"doc_id": ..., "sle": [...]} with an optional
    "system" key; entries without one match any system for that doc.
    """
    table: dict[tuple[str, str | None], list[float]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestionError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            doc_id = record.get("doc_id")
            scores = record.get("sle")
            if not isinstance(doc_id, str) or not isinstance(scores, list):
                raise IngestionError(
                    f"{path}:{lineno}: need string 'doc_id' and list 'sle'"
                )
            values = [float(v) for v in scores]
            if any(not math.isfinite(v) for v in values):
                raise IngestionError(f"{path}:{lineno}: non-finite score")
            system = record.get("system")
            key = (doc_id, system if isinstance(system, str) else None)
            if key in table:
                raise IngestionError(f"{path}:{lineno}: duplicate entry for {key}")
            table[key] = values
    return table


def lookup_sle_scores(
    table: dict[tuple[str, str | None], list[float]], doc_id: str, system: str
) -> list[float] | None:
    """System-specific entries win over system-agnostic ones."""
    if (doc_id, system) in table:
        return table[(doc_id, system)]
    return table.get((doc_id, None))
