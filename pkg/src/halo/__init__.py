"""Reference-free hallucination scoring from language-model inference traces."""

from .config import DEFAULT_GAMMA, DEFAULT_RHO, ConfigError, PipelineConfig
from .correction import CorrectedDistribution, apply_idf, candidate_set, corrected_token_inputs, renormalize
from .harness import (
    ABLATION_LADDER,
    AblationReport,
    AblationRow,
    EvaluationError,
    SentenceTask,
    build_sentence_tasks,
    compute_metrics,
    passage_gold,
    report_to_dict,
    report_to_markdown,
    run_ablation,
    run_pipeline,
)
from .metrics import (
    MetricUndefinedError,
    RankedSample,
    average_precision,
    balanced_accuracy,
    best_balanced_accuracy,
    pearson,
    spearman,
)
from .propagation import normalize_weights, propagate
from .scoring import ScoreSet, TokenScore, passage_score, sentence_score, serialize_score_set, token_score
from .trace import (
    AnnotationFormatError,
    AnnotationSet,
    AttentionRow,
    IdfFormatError,
    IdfTable,
    PassageTrace,
    TokenRecord,
    TraceFormatError,
    build_idf_table,
    parse_annotations,
    parse_idf,
    parse_trace,
    serialize_idf,
    serialize_trace,
    validate_trace,
)

__version__ = "0.1.0"
