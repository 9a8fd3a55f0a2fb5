"""Entity-level adequacy: extraction, normalization, set precision/recall."""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Iterable

from .errors import MetricError, ValidationError
from .textcore import WORD, Document

HEURISTIC = "heuristic"
EXTERNAL_NER = "external_ner"

_EDGE_PUNCT = string.punctuation + "‘’“”«»"

# Words that start sentences so often that a lone capitalized occurrence
# carries no entity signal. Only consulted for single-token runs at the
# start of a sentence.
DEFAULT_STOP_WORDS = frozenset(
    {
        "the", "a", "an", "this", "that", "these", "those", "it", "its",
        "he", "she", "they", "we", "i", "you", "his", "her", "their", "our",
        "in", "on", "at", "by", "for", "from", "with", "as", "but", "and",
        "or", "so", "if", "when", "while", "after", "before", "however",
        "although", "also", "then", "there", "here", "not", "no", "to", "of",
        "some", "many", "most", "one", "two", "both", "all", "each",
    }
)


@dataclass(frozen=True)
class EntitySet:
    entities: frozenset[str]
    provenance: str

    def __post_init__(self) -> None:
        if self.provenance not in (HEURISTIC, EXTERNAL_NER):
            raise ValidationError(f"unknown provenance: {self.provenance!r}")
        for ent in self.entities:
            if normalize_entity(ent) != ent:
                raise ValidationError(f"entity not normalized: {ent!r}")


@dataclass(frozen=True)
class PRF:
    p: float
    r: float
    f1: float

    def __post_init__(self) -> None:
        for name, value in (("p", self.p), ("r", self.r), ("f1", self.f1)):
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"{name} out of [0, 1]: {value}")

    @classmethod
    def from_pr(cls, p: float, r: float) -> "PRF":
        return cls(p, r, 2 * p * r / (p + r) if p + r > 0 else 0.0)


def normalize_entity(raw: str) -> str:
    """Casefold, strip edge punctuation, collapse internal whitespace."""
    collapsed = " ".join(raw.split())
    return collapsed.casefold().strip(_EDGE_PUNCT).strip()


def entity_set(strings: Iterable[str], provenance: str) -> EntitySet:
    normalized = {normalize_entity(s) for s in strings}
    normalized.discard("")
    return EntitySet(frozenset(normalized), provenance)


def extract_entities_heuristic(
    doc: Document, stop_words: frozenset[str] = DEFAULT_STOP_WORDS
) -> EntitySet:
    """Capitalized-span entity candidates.

    Maximal runs of capitalized word tokens form candidates; a run that is
    just the first word of its sentence is dropped when that word is a
    stop word. Case yields set semantics via normalization.
    """
    found: set[str] = set()
    for sent in doc.sentences:
        first_word_pos = next(
            (i for i, t in enumerate(sent.tokens) if t.kind == WORD), None
        )
        run: list[tuple[int, str]] = []
        for pos, tok in enumerate(list(sent.tokens) + [None]):
            capitalized = (
                tok is not None and tok.kind == WORD and tok.surface[0].isupper()
            )
            if capitalized:
                run.append((pos, tok.surface))
                continue
            if run:
                sentence_initial_stop = (
                    len(run) == 1
                    and run[0][0] == first_word_pos
                    and run[0][1].casefold() in stop_words
                )
                if not sentence_initial_stop:
                    found.add(normalize_entity(" ".join(s for _, s in run)))
                run = []
    found.discard("")
    return EntitySet(frozenset(found), HEURISTIC)


def esa(input_entities: EntitySet, output_entities: EntitySet) -> PRF:
    """Entity-set precision (kept fraction of output entities that are from
    the input) and recall (input entities preserved in the output).

    An empty denominator scores 1.0 only when both sets are empty,
    otherwise 0.0.
    """
    inp, out = input_entities.entities, output_entities.entities
    overlap = len(inp & out)
    if not inp and not out:
        return PRF.from_pr(1.0, 1.0)
    p = overlap / len(out) if out else 0.0
    r = overlap / len(inp) if inp else 0.0
    return PRF.from_pr(p, r)


def f1_combine(p: float, r: float) -> float:
    """Harmonic combination used everywhere a P/R pair is folded to one value."""
    if p < 0 or r < 0:
        raise MetricError("f1_combine needs non-negative inputs")
    return 2 * p * r / (p + r) if p + r > 0 else 0.0
