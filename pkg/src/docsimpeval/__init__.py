"""Reference-less evaluation toolkit for document-level text simplification.

Meaning preservation is scored against the input document (entity-set
adequacy, entailment-matrix faithfulness, QA-based checks, conservativity
diagnostics); simplicity is scored as readability and distance from a
target reading level. Model-backed signals arrive through a line-oriented
scorer protocol so runs replay deterministically from recorded fixtures.
"""

from .errors import (
    ConfigError,
    FixtureMiss,
    IngestionError,
    MetricError,
    ReportError,
    SamplingError,
    ScorerError,
    ToolError,
    TransportError,
    ValidationError,
)
from .textcore import (
    Document,
    DocStats,
    Sentence,
    Token,
    concat_documents,
    doc_stats,
    document_from_record,
    document_from_sentences,
    read_corpus,
    segment_sentences,
    syllable_count,
    tokenize,
)
from .surface import bleu_c, bleu_score, fkgl, length_stats, surface_report
from .entities import (
    EntitySet,
    PRF,
    entity_set,
    esa,
    extract_entities_heuristic,
    f1_combine,
    normalize_entity,
)
from .simplicity import (
    SentenceSLE,
    TargetLevel,
    epsilon_sle,
    format_level_cell,
    level_grouped_report,
    load_sle_scores,
    sle_doc,
)
from .faithfulness import (
    QafeResult,
    ScoreMatrix,
    ScoreTriple,
    load_conv_weights,
    qafe_precision,
    qafe_recall,
    summac_conv,
    summac_histogram,
    summac_precision,
    summac_recall,
)
from .scorer import (
    CacheStore,
    FixtureTransport,
    ScorerClient,
    ScorerRequest,
    ScorerResponse,
    SubprocessTransport,
    canonical_payload,
    load_fixture,
    request_id,
    write_fixture,
)
from .sampling import (
    ArticleMeta,
    DEFAULT_CATEGORY_MAP,
    annotate_pool,
    eligibility_filter,
    load_category_map,
    load_metadata,
    stratified_sample,
)
from .humaneval import (
    DIMENSIONS,
    HumanRating,
    human_eval_scores,
    load_ratings,
    significance_vs_best,
    welch_t_test,
)
from .harness import (
    ALL_METRICS,
    EvalInstance,
    RunConfig,
    delta_report,
    load_outputs,
    load_report,
    parse_report,
    render_delta_markdown,
    render_report_json,
    render_report_markdown,
    run_evaluation,
)

__version__ = "0.1.0"
