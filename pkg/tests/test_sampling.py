import json

import pytest

from docsimpeval.errors import ConfigError, IngestionError, SamplingError
from docsimpeval.sampling import (
    DEFAULT_CATEGORY_MAP,
    ArticleMeta,
    annotate_pool,
    build_type_index,
    eligibility_filter,
    load_category_map,
    load_metadata,
    stratified_sample,
)
from docsimpeval.textcore import document_from_sentences


def make_doc(n_sentences: int, n_paragraphs: int):
    texts = [f"Sentence number {i} here." for i in range(n_sentences)]
    breaks = list(range(n_paragraphs))
    return document_from_sentences(texts, breaks)


class TestEligibility:
    def test_boundary_is_inclusive(self):
        assert eligibility_filter(make_doc(10, 3))

    def test_nine_sentences_rejected(self):
        assert not eligibility_filter(make_doc(9, 3))

    def test_two_paragraphs_rejected(self):
        assert not eligibility_filter(make_doc(10, 2))

    def test_both_above_threshold(self):
        assert eligibility_filter(make_doc(25, 7))

    def test_both_below_threshold(self):
        assert not eligibility_filter(make_doc(4, 1))


class TestCategoryMap:
    def test_default_map_covers_nineteen_types(self):
        index = build_type_index(DEFAULT_CATEGORY_MAP)
        assert len(index) == 19
        assert set(DEFAULT_CATEGORY_MAP) == {
            "Biographical", "Location", "Media", "Science", "Industry",
        }
        assert index["Human"] == "Biographical"
        assert index["Commune of France"] == "Location"
        assert index["Automobile Model"] == "Industry"

    def test_overlapping_type_rejected(self):
        bad = {"A": ("Human",), "B": ("Human",)}
        with pytest.raises(ConfigError):
            build_type_index(bad)

    def test_empty_category_rejected(self):
        with pytest.raises(ConfigError):
            build_type_index({"A": ()})

    def test_empty_map_rejected(self):
        with pytest.raises(ConfigError):
            build_type_index({})

    def test_load_category_map_round_trip(self, tmp_path):
        path = tmp_path / "cats.json"
        path.write_text(json.dumps(
            {"categories": {"X": ["T1", "T2"], "Y": ["T3"]}}
        ), encoding="utf-8")
        loaded = load_category_map(path)
        assert loaded == {"X": ("T1", "T2"), "Y": ("T3",)}

    def test_load_category_map_requires_categories_key(self, tmp_path):
        path = tmp_path / "cats.json"
        path.write_text(json.dumps({"nope": 1}), encoding="utf-8")
        with pytest.raises(ConfigError):
            load_category_map(path)

    def test_load_category_map_bad_json(self, tmp_path):
        path = tmp_path / "cats.json"
        path.write_text("{", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_category_map(path)


class TestMetadata:
    def test_load_and_skip_blank_lines(self, tmp_path):
        path = tmp_path / "meta.jsonl"
        path.write_text(
            '{"doc_id": "d1", "semantic_type": "Human"}\n'
            "\n"
            '{"doc_id": "d2", "semantic_type": "Film"}\n',
            encoding="utf-8",
        )
        assert load_metadata(path) == {"d1": "Human", "d2": "Film"}

    def test_duplicate_doc_id_rejected(self, tmp_path):
        path = tmp_path / "meta.jsonl"
        path.write_text(
            '{"doc_id": "d1", "semantic_type": "Human"}\n'
            '{"doc_id": "d1", "semantic_type": "Film"}\n',
            encoding="utf-8",
        )
        with pytest.raises(IngestionError):
            load_metadata(path)

    def test_bad_json_line_rejected(self, tmp_path):
        path = tmp_path / "meta.jsonl"
        path.write_text("not json\n", encoding="utf-8")
        with pytest.raises(IngestionError):
            load_metadata(path)

    def test_missing_field_rejected(self, tmp_path):
        path = tmp_path / "meta.jsonl"
        path.write_text('{"doc_id": "d1"}\n', encoding="utf-8")
        with pytest.raises(IngestionError):
            load_metadata(path)


class TestAnnotatePool:
    def test_joins_and_skips_unknown_docs(self):
        metadata = {"d1": "Human", "d2": "Film"}
        pool = annotate_pool(["d1", "d2", "d3"], metadata)
        assert pool == [
            ArticleMeta("d1", "Human", "Biographical"),
            ArticleMeta("d2", "Film", "Media"),
        ]

    def test_unmapped_semantic_type_is_config_error(self):
        with pytest.raises(ConfigError):
            annotate_pool(["d1"], {"d1": "Asteroid"})

    def test_custom_map(self):
        pool = annotate_pool(
            ["d1"], {"d1": "Asteroid"}, {"Space": ("Asteroid",)}
        )
        assert pool == [ArticleMeta("d1", "Asteroid", "Space")]


def big_pool():
    pool = []
    types = {
        "Biographical": "Human",
        "Location": "City",
        "Media": "Film",
        "Science": "Taxon",
        "Industry": "Business",
    }
    for cat, semantic_type in types.items():
        for i in range(12):
            pool.append(ArticleMeta(f"{cat.lower()}-{i:02d}", semantic_type, cat))
    return pool


class TestStratifiedSample:
    def test_exact_quota_per_category(self):
        chosen = stratified_sample(big_pool(), 4, seed=7)
        assert len(chosen) == 20
        by_prefix = {}
        for doc_id in chosen:
            by_prefix.setdefault(doc_id.split("-")[0], 0)
            by_prefix[doc_id.split("-")[0]] += 1
        assert all(count == 4 for count in by_prefix.values())

    def test_output_sorted_and_unique(self):
        chosen = stratified_sample(big_pool(), 4, seed=7)
        assert chosen == sorted(chosen)
        assert len(set(chosen)) == len(chosen)

    def test_same_seed_same_sample(self):
        a = stratified_sample(big_pool(), 4, seed=123)
        b = stratified_sample(big_pool(), 4, seed=123)
        assert a == b

    def test_pool_order_does_not_matter(self):
        pool = big_pool()
        shuffled = list(reversed(pool))
        assert stratified_sample(pool, 4, seed=5) == stratified_sample(
            shuffled, 4, seed=5
        )

    def test_different_seeds_differ(self):
        samples = {
            tuple(stratified_sample(big_pool(), 4, seed=s)) for s in range(8)
        }
        assert len(samples) > 1

    def test_deficient_category_named_in_error(self):
        pool = big_pool()
        pool = [m for m in pool if not (m.category == "Science"
                                        and m.doc_id >= "science-02")]
        with pytest.raises(SamplingError, match="Science"):
            stratified_sample(pool, 4, seed=1)

    def test_quota_equal_to_category_size_takes_all(self):
        chosen = stratified_sample(big_pool(), 12, seed=3)
        assert len(chosen) == 60
        assert chosen == sorted(m.doc_id for m in big_pool())

    def test_total_cross_check(self):
        stratified_sample(big_pool(), 4, seed=1, total=20)
        with pytest.raises(SamplingError):
            stratified_sample(big_pool(), 4, seed=1, total=21)

    def test_empty_pool_rejected(self):
        with pytest.raises(SamplingError):
            stratified_sample([], 1, seed=0)

    def test_zero_quota_rejected(self):
        with pytest.raises(SamplingError):
            stratified_sample(big_pool(), 0, seed=0)

    def test_duplicate_doc_ids_rejected(self):
        pool = big_pool() + [ArticleMeta("media-00", "Film", "Media")]
        with pytest.raises(SamplingError):
            stratified_sample(pool, 2, seed=0)
