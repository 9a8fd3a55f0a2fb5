"""Document model: tokenization, sentence segmentation, syllables, counts.

Everything downstream (readability, overlap metrics, entity extraction,
per-sentence scoring) consumes the ``Document`` produced here, so the rules
in this module are deliberately plain and deterministic: no model calls, no
locale dependence, no randomness.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .errors import IngestionError, ValidationError

WORD = "word"
NUMBER = "number"
PUNCTUATION = "punctuation"

# Apostrophes that may appear inside a word token ("don't", "O'Brien").
_APOSTROPHES = ("'", "’")

# Titles and common abbreviations whose trailing period does not end a
# sentence. Callers may pass their own list; matching is case-insensitive.
DEFAULT_ABBREVIATIONS = frozenset(
    {
        "Mr.", "Mrs.", "Ms.", "Dr.", "Prof.", "St.", "Mt.", "Gen.", "Sen.",
        "Rep.", "Gov.", "Jr.", "Sr.", "vs.", "etc.", "e.g.", "i.e.", "cf.",
        "approx.", "no.", "vol.", "fig.", "ca.", "Inc.", "Ltd.", "Co.",
    }
)

_TERMINALS = ".!?"
_CLOSERS = "\"')]’”"

_PARA_SEP = re.compile(r"\n[ \t\r]*\n[ \t\r\n]*")


@dataclass(frozen=True)
class Token:
    surface: str
    kind: str
    char_span: tuple[int, int]

    def __post_init__(self) -> None:
        if not self.surface:
            raise ValidationError("token surface must be non-empty")
        if self.kind not in (WORD, NUMBER, PUNCTUATION):
            raise ValidationError(f"unknown token kind: {self.kind!r}")
        start, end = self.char_span
        if not (0 <= start < end):
            raise ValidationError(f"bad char span: {self.char_span!r}")


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]
    index: int
    text: str

    def __post_init__(self) -> None:
        if not self.tokens:
            raise ValidationError("sentence must contain at least one token")
        if self.index < 0:
            raise ValidationError("sentence index must be non-negative")


@dataclass(frozen=True)
class Document:
    sentences: tuple[Sentence, ...]
    paragraph_breaks: tuple[int, ...]
    raw: str

    def __post_init__(self) -> None:
        if not self.sentences:
            raise ValidationError("document must contain at least one sentence")
        for pos, sent in enumerate(self.sentences):
            if sent.index != pos:
                raise ValidationError("sentence indices must match their positions")
        breaks = self.paragraph_breaks
        if not breaks or breaks[0] != 0:
            raise ValidationError("paragraph_breaks must start at sentence 0")
        for a, b in zip(breaks, breaks[1:]):
            if b <= a:
                raise ValidationError("paragraph_breaks must be strictly increasing")
        if breaks[-1] >= len(self.sentences):
            raise ValidationError("paragraph break beyond last sentence")

    @property
    def paragraph_count(self) -> int:
        return len(self.paragraph_breaks)

    def token_surfaces(self) -> list[str]:
        return [t.surface for s in self.sentences for t in s.tokens]

    def sentence_texts(self) -> list[str]:
        return [s.text for s in self.sentences]


@dataclass(frozen=True)
class DocStats:
    token_count: int
    word_count: int
    sentence_count: int
    syllable_count: int


def tokenize(text: str, offset: int = 0) -> list[Token]:
    """Split text into word / number / punctuation tokens with char spans.

    Words are maximal alphabetic runs, allowing internal apostrophes
    followed by a letter. Numbers are digit runs, allowing a '.' or ','
    separator when flanked by digits on both sides. Every other
    non-whitespace character becomes a single punctuation token.
    """
    tokens: list[Token] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        start = i
        if ch.isdecimal():
            i += 1
            while i < n:
                c = text[i]
                if c.isdecimal():
                    i += 1
                elif c in ".," and i + 1 < n and text[i + 1].isdecimal():
                    i += 2
                else:
                    break
            kind = NUMBER
        elif ch.isalpha():
            i += 1
            while i < n:
                c = text[i]
                if c.isalpha():
                    i += 1
                elif c in _APOSTROPHES and i + 1 < n and text[i + 1].isalpha():
                    i += 2
                else:
                    break
            kind = WORD
        else:
            i += 1
            kind = PUNCTUATION
        tokens.append(Token(text[start:i], kind, (offset + start, offset + i)))
    return tokens


def _paragraph_spans(text: str) -> list[tuple[int, int]]:
    spans: list[tuple[int, int]] = []
    pos = 0
    for m in _PARA_SEP.finditer(text):
        if text[pos : m.start()].strip():
            spans.append((pos, m.start()))
        pos = m.end()
    if text[pos:].strip():
        spans.append((pos, len(text)))
    return spans


def _is_abbreviation(text: str, period_pos: int, abbreviations: frozenset[str]) -> bool:
    # Reconstruct the word ending at this period, dots included, so that
    # multi-dot forms like "e.g." match as a whole.
    j = period_pos
    while j > 0 and (text[j - 1].isalpha() or text[j - 1] == "."):
        j -= 1
    candidate = text[j : period_pos + 1]
    if not candidate or candidate == ".":
        return False
    lowered = {a.lower() for a in abbreviations}
    return candidate.lower() in lowered


def _sentence_spans(
    text: str, start: int, end: int, abbreviations: frozenset[str]
) -> Iterator[tuple[int, int]]:
    sent_start = start
    i = start
    while i < end:
        if text[i] in _TERMINALS:
            run_end = i
            while run_end + 1 < end and text[run_end + 1] in _TERMINALS:
                run_end += 1
            close_end = run_end
            while close_end + 1 < end and text[close_end + 1] in _CLOSERS:
                close_end += 1
            j = close_end + 1
            if j < end and text[j].isspace():
                k = j
                while k < end and text[k].isspace():
                    k += 1
                next_starts_sentence = k < end and (
                    text[k].isupper() or text[k].isdecimal()
                )
                is_abbrev = (
                    run_end == i
                    and text[i] == "."
                    and _is_abbreviation(text, i, abbreviations)
                )
                if next_starts_sentence and not is_abbrev:
                    yield sent_start, close_end + 1
                    sent_start = k
                    i = k
                    continue
            i = run_end + 1
        else:
            i += 1
    if sent_start < end:
        yield sent_start, end


def segment_sentences(
    text: str, abbreviations: Iterable[str] | None = None
) -> Document:
    """Build a Document from raw text.

    Paragraphs are separated by blank lines; sentences end at '.', '!'
    or '?' followed by whitespace and an upper-case or numeric start,
    unless the period belongs to a listed abbreviation.
    """
    if not text or not text.strip():
        raise IngestionError("empty or whitespace-only text")
    abbr = (
        DEFAULT_ABBREVIATIONS
        if abbreviations is None
        else frozenset(abbreviations)
    )
    sentences: list[Sentence] = []
    breaks: list[int] = []
    for pstart, pend in _paragraph_spans(text):
        first_in_para = True
        for sstart, send in _sentence_spans(text, pstart, pend, abbr):
            toks = tokenize(text[sstart:send], offset=sstart)
            if not toks:
                continue
            if first_in_para:
                breaks.append(len(sentences))
                first_in_para = False
            sentences.append(
                Sentence(tuple(toks), len(sentences), text[sstart:send].strip())
            )
    if not sentences:
        raise IngestionError("no sentences survived segmentation")
    return Document(tuple(sentences), tuple(breaks), text)


def document_from_sentences(
    sentence_texts: Iterable[str],
    paragraph_breaks: Iterable[int] | None = None,
) -> Document:
    """Build a Document from pre-segmented sentences.

    Pre-segmentation wins over our own segmenter: each string becomes
    exactly one sentence. A synthetic raw form joins sentences with a
    space inside paragraphs and a blank line between them.
    """
    texts = [t.strip() for t in sentence_texts]
    if not texts:
        raise IngestionError("pre-segmented document has no sentences")
    if any(not t for t in texts):
        raise IngestionError("pre-segmented document contains an empty sentence")
    n = len(texts)
    if paragraph_breaks is None:
        break_list = [0]
    else:
        break_list = [int(b) for b in paragraph_breaks]
        if not break_list or break_list[0] != 0:
            raise IngestionError("paragraph_breaks must start at 0")
        if any(b <= a for a, b in zip(break_list, break_list[1:])):
            raise IngestionError("paragraph_breaks must be strictly increasing")
        if break_list[-1] >= n:
            raise IngestionError("paragraph break beyond last sentence")
    break_set = set(break_list)
    parts: list[str] = []
    offsets: list[int] = []
    pos = 0
    for idx, t in enumerate(texts):
        if idx > 0:
            sep = "\n\n" if idx in break_set else " "
            parts.append(sep)
            pos += len(sep)
        offsets.append(pos)
        parts.append(t)
        pos += len(t)
    raw = "".join(parts)
    sentences = []
    for idx, t in enumerate(texts):
        toks = tokenize(t, offset=offsets[idx])
        if not toks:
            raise IngestionError(f"sentence {idx} contains no tokens")
        sentences.append(Sentence(tuple(toks), idx, t))
    return Document(tuple(sentences), tuple(break_list), raw)


def document_from_record(record: dict) -> Document:
    """Ingest one corpus record: {"text": ...} or {"sentences": [...]}."""
    if "sentences" in record:
        return document_from_sentences(
            record["sentences"], record.get("paragraph_breaks")
        )
    if "text" in record:
        text = record["text"]
        if not isinstance(text, str):
            raise IngestionError("'text' must be a string")
        return segment_sentences(text)
    raise IngestionError("record has neither 'text' nor 'sentences'")


def read_corpus(path: str | Path) -> dict[str, Document]:
    """Read a JSON-Lines corpus into {doc_id: Document}."""
    docs: dict[str, Document] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestionError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            doc_id = record.get("id")
            if not isinstance(doc_id, str) or not doc_id:
                raise IngestionError(f"{path}:{lineno}: missing or invalid 'id'")
            if doc_id in docs:
                raise IngestionError(f"{path}:{lineno}: duplicate doc id {doc_id!r}")
            try:
                docs[doc_id] = document_from_record(record)
            except IngestionError as exc:
                raise IngestionError(f"{path}:{lineno}: doc {doc_id!r}: {exc}") from exc
    if not docs:
        raise IngestionError(f"{path}: corpus is empty")
    return docs


_SYLLABLE_VOWELS = frozenset("aeiouy")


def syllable_count(word: str) -> int:
    """Heuristic syllable count for one word surface.

    Counts maximal vowel-group runs (a, e, i, o, u, y) after case
    folding, subtracts a silent trailing 'e' unless it closes a
    consonant + "le" ending ("table"), and never returns less than 1.
    """
    w = word.casefold()
    count = 0
    prev_vowel = False
    for ch in w:
        is_vowel = ch in _SYLLABLE_VOWELS
        if is_vowel and not prev_vowel:
            count += 1
        prev_vowel = is_vowel
    if count > 1 and w.endswith("e"):
        keeps_e = (
            len(w) >= 3
            and w[-2] == "l"
            and w[-3].isalpha()
            and w[-3] not in _SYLLABLE_VOWELS
        )
        if not keeps_e:
            count -= 1
    return max(count, 1)


def doc_stats(doc: Document) -> DocStats:
    """Token, word, sentence and syllable totals for a document.

    Words count word and number tokens; syllables accumulate over word
    tokens only.
    """
    token_count = 0
    word_count = 0
    syllables = 0
    for sent in doc.sentences:
        for tok in sent.tokens:
            token_count += 1
            if tok.kind in (WORD, NUMBER):
                word_count += 1
            if tok.kind == WORD:
                syllables += syllable_count(tok.surface)
    return DocStats(token_count, word_count, len(doc.sentences), syllables)


def concat_documents(a: Document, b: Document) -> Document:
    """Concatenate two documents (used to check stats additivity)."""
    sentences = []
    for idx, s in enumerate(a.sentences + b.sentences):
        sentences.append(Sentence(s.tokens, idx, s.text))
    offset = len(a.sentences)
    breaks = tuple(a.paragraph_breaks) + tuple(
        offset + p for p in b.paragraph_breaks
    )
    return Document(tuple(sentences), breaks, a.raw + "\n\n" + b.raw)
