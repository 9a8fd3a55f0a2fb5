"""Binary human-rating aggregation and significance versus the best system."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from scipy.stats import t as student_t

from .errors import IngestionError, ReportError, ValidationError

DIMENSIONS = ("fluency", "faithfulness", "simplicity")
SIGNIFICANCE_LEVEL = 0.05
MEAN_DECIMALS = 3


@dataclass(frozen=True)
class HumanRating:
    system: str
    item_id: str
    dimension: str
    rating: bool
    annotator: str

    def __post_init__(self) -> None:
        if self.dimension not in DIMENSIONS:
            raise ValidationError(
                f"dimension {self.dimension!r} not in {DIMENSIONS}"
            )
        for field in ("system", "item_id", "annotator"):
            if not getattr(self, field):
                raise ValidationError(f"rating field {field!r} is empty")
        if not isinstance(self.rating, bool):
            raise ValidationError("rating must be a boolean")

    @property
    def key(self) -> tuple[str, str, str, str]:
        return (self.system, self.item_id, self.dimension, self.annotator)


def check_unique(ratings: Iterable[HumanRating]) -> None:
    """One judgment per (system, item, dimension, annotator)."""
    seen: set[tuple[str, str, str, str]] = set()
    for rating in ratings:
        if rating.key in seen:
            raise ReportError(f"duplicate rating for {rating.key}")
        seen.add(rating.key)


def load_ratings(path: str | Path) -> list[HumanRating]:
    ratings: list[HumanRating] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestionError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            try:
                ratings.append(HumanRating(
                    system=record["system"],
                    item_id=record["item_id"],
                    dimension=record["dimension"],
                    rating=record["rating"],
                    annotator=record["annotator"],
                ))
            except (KeyError, TypeError, ValidationError) as exc:
                raise IngestionError(f"{path}:{lineno}: bad rating: {exc}") from exc
    if not ratings:
        raise IngestionError(f"{path}: no ratings found")
    check_unique(ratings)
    return ratings


def rating_vectors(
    ratings: Sequence[HumanRating],
) -> dict[str, dict[str, list[int]]]:
    """Group into {system: {dimension: 0/1 vector}} in input order."""
    check_unique(ratings)
    table: dict[str, dict[str, list[int]]] = {}
    for rating in ratings:
        per_system = table.setdefault(rating.system, {})
        per_system.setdefault(rating.dimension, []).append(int(rating.rating))
    return table


def proportion(vector: Sequence[int]) -> float:
    if not vector:
        raise ReportError("cannot take a proportion of zero ratings")
    return sum(vector) / len(vector)


def mean_of_dimensions(scores: Sequence[float]) -> float:
    """Unweighted mean over dimension proportions, at table precision."""
    if not scores:
        raise ReportError("no dimension scores to average")
    return round(math.fsum(scores) / len(scores), MEAN_DECIMALS)


@dataclass(frozen=True)
class SystemScores:
    system: str
    proportions: Mapping[str, float]
    counts: Mapping[str, int]
    mean: float


def human_eval_scores(ratings: Sequence[HumanRating]) -> list[SystemScores]:
    """Per-system dimension proportions plus the mean column, systems in
    first-appearance order."""
    if not ratings:
        raise ReportError("no ratings supplied")
    vectors = rating_vectors(ratings)
    results = []
    for system, per_dim in vectors.items():
        props = {
            dim: proportion(vec)
            for dim, vec in per_dim.items()
        }
        counts = {dim: len(vec) for dim, vec in per_dim.items()}
        results.append(SystemScores(
            system=system,
            proportions=props,
            counts=counts,
            mean=mean_of_dimensions(list(props.values())),
        ))
    return results


@dataclass(frozen=True)
class WelchResult:
    t_stat: float | None
    df: float | None
    p_value: float | None

    @property
    def testable(self) -> bool:
        return self.p_value is not None


def welch_t_test(a: Sequence[float], b: Sequence[float]) -> WelchResult:
    """Two-sided unequal-variance two-sample t-test.

    Degenerate inputs (either sample below two observations, or both
    samples constant with different means) are untestable rather than
    an arbitrary p; two constant samples with equal means agree exactly,
    so p is 1."""
    n1, n2 = len(a), len(b)
    if n1 < 2 or n2 < 2:
        return WelchResult(None, None, None)
    m1 = math.fsum(a) / n1
    m2 = math.fsum(b) / n2
    v1 = math.fsum((x - m1) ** 2 for x in a) / (n1 - 1)
    v2 = math.fsum((x - m2) ** 2 for x in b) / (n2 - 1)
    se1 = v1 / n1
    se2 = v2 / n2
    pooled = se1 + se2
    if pooled == 0.0:
        if m1 == m2:
            return WelchResult(0.0, None, 1.0)
        return WelchResult(None, None, None)
    t_stat = (m1 - m2) / math.sqrt(pooled)
    df = pooled ** 2 / (se1 ** 2 / (n1 - 1) + se2 ** 2 / (n2 - 1))
    p_value = 2.0 * float(student_t.sf(abs(t_stat), df))
    return WelchResult(t_stat, df, min(p_value, 1.0))


@dataclass(frozen=True)
class SignificanceCell:
    system: str
    dimension: str
    proportion: float
    p_value: float | None
    is_best: bool
    starred: bool
    untestable: bool


def significance_vs_best(
    ratings: Sequence[HumanRating],
) -> list[SignificanceCell]:
    """Test every (system, dimension) vector against the top system on
    that dimension. The top system is unmarked; degenerate comparisons
    come back flagged untestable and never starred. Ties for the top are
    broken by first appearance."""
    vectors = rating_vectors(ratings)
    if not vectors:
        raise ReportError("no ratings supplied")
    systems = list(vectors)
    dimensions = [d for d in DIMENSIONS
                  if any(d in vectors[s] for s in systems)]
    cells: list[SignificanceCell] = []
    for dimension in dimensions:
        scored = [(s, vectors[s][dimension]) for s in systems
                  if dimension in vectors[s]]
        best_system, best_vector = max(
            scored, key=lambda pair: proportion(pair[1])
        )
        for system, vector in scored:
            prop = proportion(vector)
            if system == best_system:
                cells.append(SignificanceCell(
                    system, dimension, prop,
                    p_value=None, is_best=True,
                    starred=False, untestable=False,
                ))
                continue
            result = welch_t_test(vector, best_vector)
            cells.append(SignificanceCell(
                system, dimension, prop,
                p_value=result.p_value,
                is_best=False,
                starred=result.testable
                and result.p_value < SIGNIFICANCE_LEVEL,
                untestable=not result.testable,
            ))
    return cells


def render_humaneval_markdown(ratings: Sequence[HumanRating]) -> str:
    """Rating table: one row per system, one column per dimension plus
    the mean; starred cells differ significantly from the best system."""
    scores = human_eval_scores(ratings)
    cells = {
        (c.system, c.dimension): c for c in significance_vs_best(ratings)
    }
    dims = [d for d in DIMENSIONS
            if any(d in s.proportions for s in scores)]
    header = "| System | " + " | ".join(d.capitalize() for d in dims)
    header += " | Mean |"
    rule = "|---" * (len(dims) + 2) + "|"
    lines = [header, rule]
    for entry in scores:
        row = [entry.system]
        for dim in dims:
            if dim not in entry.proportions:
                row.append("-")
                continue
            cell = cells[(entry.system, dim)]
            text = f"{entry.proportions[dim]:.3f}"
            if cell.starred:
                text += "*"
            elif cell.untestable:
                text += " (untestable)"
            row.append(text)
        row.append(f"{entry.mean:.3f}")
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"
