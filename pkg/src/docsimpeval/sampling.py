"""Eligibility filtering and seeded stratified corpus sampling."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import ConfigError, IngestionError, SamplingError
from .textcore import Document

MIN_SENTENCES = 10
MIN_PARAGRAPHS = 3

# Semantic article types grouped into broad categories; kept as plain
# config so deployments can regroup without touching code.
DEFAULT_CATEGORY_MAP: dict[str, tuple[str, ...]] = {
    "Biographical": ("Human", "Musical Group", "Fictional Human"),
    "Location": ("City", "Village", "Commune of France", "City in the United States"),
    "Media": ("Film", "Video Game", "Literary Work", "Television Series"),
    "Science": ("Taxon", "Class of Disease", "Chemical Compound",
                "Class of Anatomical Entity"),
    "Industry": ("Business", "Profession", "Organization", "Automobile Model"),
}


@dataclass(frozen=True)
class ArticleMeta:
    doc_id: str
    semantic_type: str
    category: str


def eligibility_filter(doc: Document) -> bool:
    """Long enough to evaluate at document scope: both bounds inclusive."""
    return (
        len(doc.sentences) >= MIN_SENTENCES
        and doc.paragraph_count >= MIN_PARAGRAPHS
    )


def build_type_index(category_map: Mapping[str, Sequence[str]]) -> dict[str, str]:
    """Invert {category: [types]} to {type: category}; overlaps are config bugs."""
    if not category_map:
        raise ConfigError("category map is empty")
    index: dict[str, str] = {}
    for category, types in category_map.items():
        if not types:
            raise ConfigError(f"category {category!r} lists no types")
        for semantic_type in types:
            if semantic_type in index:
                raise ConfigError(
                    f"semantic type {semantic_type!r} appears in both "
                    f"{index[semantic_type]!r} and {category!r}"
                )
            index[semantic_type] = category
    return index


def load_category_map(path: str | Path) -> dict[str, tuple[str, ...]]:
    """Load {"categories": {name: [types...]}} and validate it."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot load category map from {path}: {exc}") from exc
    categories = data.get("categories") if isinstance(data, dict) else None
    if not isinstance(categories, dict):
        raise ConfigError(f"{path}: need a 'categories' object")
    result = {
        str(name): tuple(str(t) for t in types)
        for name, types in categories.items()
    }
    build_type_index(result)
    return result


def load_metadata(path: str | Path) -> dict[str, str]:
    """Read the {"doc_id", "semantic_type"} sidecar into a lookup table."""
    table: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestionError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            doc_id = record.get("doc_id")
            semantic_type = record.get("semantic_type")
            if not isinstance(doc_id, str) or not isinstance(semantic_type, str):
                raise IngestionError(
                    f"{path}:{lineno}: need string 'doc_id' and 'semantic_type'"
                )
            if doc_id in table:
                raise IngestionError(f"{path}:{lineno}: duplicate doc_id {doc_id!r}")
            table[doc_id] = semantic_type
    return table


def annotate_pool(
    doc_ids: Iterable[str],
    metadata: Mapping[str, str],
    category_map: Mapping[str, Sequence[str]] | None = None,
) -> list[ArticleMeta]:
    """Join doc ids with semantic types; unmapped types are config errors,
    docs without metadata are silently outside the pool."""
    index = build_type_index(category_map or DEFAULT_CATEGORY_MAP)
    pool = []
    for doc_id in doc_ids:
        semantic_type = metadata.get(doc_id)
        if semantic_type is None:
            continue
        category = index.get(semantic_type)
        if category is None:
            raise ConfigError(
                f"semantic type {semantic_type!r} (doc {doc_id!r}) is not in "
                "the category map"
            )
        pool.append(ArticleMeta(doc_id, semantic_type, category))
    return pool


def stratified_sample(
    pool: Sequence[ArticleMeta],
    quota_per_category: int,
    seed: int,
    total: int | None = None,
) -> list[str]:
    """Draw quota_per_category doc ids from every category, without
    replacement, deterministically for a given seed. The manifest comes
    back sorted by doc id."""
    if quota_per_category < 1:
        raise SamplingError("quota_per_category must be >= 1")
    by_category: dict[str, list[str]] = {}
    for meta in pool:
        by_category.setdefault(meta.category, []).append(meta.doc_id)
    if not by_category:
        raise SamplingError("sampling pool is empty")
    if total is not None and total != quota_per_category * len(by_category):
        raise SamplingError(
            f"total {total} != quota {quota_per_category} x "
            f"{len(by_category)} categories"
        )
    rng = random.Random(seed)
    chosen: list[str] = []
    # iterate categories in sorted order so RNG consumption is stable
    for category in sorted(by_category):
        members = sorted(by_category[category])
        if len(set(members)) != len(members):
            raise SamplingError(f"duplicate doc ids in category {category!r}")
        if len(members) < quota_per_category:
            raise SamplingError(
                f"category {category!r} has {len(members)} eligible docs, "
                f"needs {quota_per_category}"
            )
        chosen.extend(rng.sample(members, quota_per_category))
    return sorted(chosen)
