"""Evaluation harness: sentence classes, passage gold scores, ablation ladder."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .config import ConfigError, PipelineConfig
from .correction import corrected_token_inputs
from .metrics import RankedSample, average_precision, pearson, spearman
from .propagation import propagate
from .scoring import ScoreSet, TokenScore, passage_score, sentence_score, token_score
from .trace import AnnotationSet, IdfTable, PassageTrace

LABEL_SEVERITY = {"accurate": 0.0, "minor_inaccurate": 0.5, "major_inaccurate": 1.0}

METRIC_KEYS = ("nonfactual_ap", "nonfactual_star_ap", "factual_ap", "pearson", "spearman")
METRIC_HEADERS = ("NoFac", "NoFac*", "Fact", "Pear.", "Spear.")

# Cumulative feature ladder: row label, toggles, and which trace variant the
# row is scored on. Entity-type provision changes the conditioning context,
# so the last two rows require traces extracted with type tags.
ABLATION_LADDER: tuple[tuple[str, dict, str], ...] = (
    ("avg(h)", {"use_keywords": False, "use_penalty": False, "use_type": False, "use_idf": False}, "plain"),
    ("+keyword", {"use_keywords": True, "use_penalty": False, "use_type": False, "use_idf": False}, "plain"),
    ("+penalty", {"use_keywords": True, "use_penalty": True, "use_type": False, "use_idf": False}, "plain"),
    ("+entity type", {"use_keywords": True, "use_penalty": True, "use_type": True, "use_idf": False}, "typed"),
    ("+token idf", {"use_keywords": True, "use_penalty": True, "use_type": True, "use_idf": True}, "typed"),
)


class EvaluationError(ValueError):
    """Raised when traces, annotations, and configs do not line up."""


@dataclass(frozen=True, slots=True)
class SentenceTask:
    class_name: str
    samples: tuple[RankedSample, ...]


@dataclass(frozen=True, slots=True)
class AblationRow:
    label: str
    variant: str
    config: PipelineConfig
    metrics: Mapping[str, float]


@dataclass(frozen=True, slots=True)
class AblationReport:
    gamma: float
    rho: float
    rows: tuple[AblationRow, ...]


def passage_gold(labels: Sequence[str]) -> float:
    """Human judgement of a passage as the mean sentence severity."""
    if not labels:
        raise EvaluationError("passage has no sentence labels")
    return sum(LABEL_SEVERITY[label] for label in labels) / len(labels)


def run_pipeline(trace: PassageTrace, idf_table: IdfTable | None, config: PipelineConfig) -> ScoreSet:
    """Score one passage: corrected inputs, token scores, propagation, aggregation."""
    if config.use_type and trace.variant != "typed":
        raise ConfigError(
            f"passage {trace.passage_id!r}: entity-type correction requires a typed trace "
            f"(got variant {trace.variant!r})"
        )
    h = []
    for tok in trace.tokens:
        prob, entropy_term = corrected_token_inputs(tok, idf_table, config)
        h.append(token_score(prob, entropy_term))
    if config.use_penalty:
        h_hat, penalties = propagate(h, trace.tokens, trace.attention, config.gamma)
    else:
        h_hat, penalties = list(h), [0.0] * len(h)
    sentences = tuple(
        sentence_score(h_hat, trace.tokens, s, keyword_weighted=config.use_keywords)
        for s in range(trace.num_sentences)
    )
    return ScoreSet(
        passage_id=trace.passage_id,
        fingerprint=config.fingerprint(),
        token_scores=tuple(
            TokenScore(index=i, h=h[i], h_hat=h_hat[i], penalty=penalties[i]) for i in range(len(h))
        ),
        sentence_scores=sentences,
        passage_score=passage_score(h_hat, trace.tokens, keyword_weighted=config.use_keywords),
    )


def _check_alignment(annotations: AnnotationSet, score_sets: Mapping[str, ScoreSet]) -> list[str]:
    ids = sorted(annotations.passages)
    missing = [pid for pid in ids if pid not in score_sets]
    if missing:
        raise EvaluationError(f"no scores for annotated passages: {', '.join(missing)}")
    for pid in ids:
        want = len(annotations.passages[pid])
        got = len(score_sets[pid].sentence_scores)
        if want != got:
            raise EvaluationError(f"passage {pid!r}: {want} annotated sentences but {got} scored")
    return ids


def build_sentence_tasks(
    annotations: AnnotationSet,
    score_sets: Mapping[str, ScoreSet],
) -> tuple[SentenceTask, SentenceTask, SentenceTask]:
    """Construct the nonfactual, nonfactual_star, and factual ranking tasks.

    nonfactual: positives are major/minor sentences. factual: positives are
    accurate sentences, ranked by negated score. nonfactual_star: passages
    whose every sentence is major are dropped, remaining major sentences are
    the positives.
    """
    ids = _check_alignment(annotations, score_sets)
    nonfactual: list[RankedSample] = []
    star: list[RankedSample] = []
    factual: list[RankedSample] = []
    for pid in ids:
        labels = annotations.passages[pid]
        scores = score_sets[pid].sentence_scores
        all_major = all(label == "major_inaccurate" for label in labels)
        for k, (label, score) in enumerate(zip(labels, scores)):
            nonfactual.append(
                RankedSample(score, int(label != "accurate"), passage_id=pid, sentence_index=k)
            )
            factual.append(
                RankedSample(-score, int(label == "accurate"), passage_id=pid, sentence_index=k)
            )
            if not all_major:
                star.append(
                    RankedSample(score, int(label == "major_inaccurate"), passage_id=pid, sentence_index=k)
                )
    return (
        SentenceTask("nonfactual", tuple(nonfactual)),
        SentenceTask("nonfactual_star", tuple(star)),
        SentenceTask("factual", tuple(factual)),
    )


def compute_metrics(annotations: AnnotationSet, score_sets: Mapping[str, ScoreSet]) -> dict[str, float]:
    """The five report metrics (raw values: AP in [0,1], correlations in [-1,1])."""
    ids = _check_alignment(annotations, score_sets)
    nonfactual, star, factual = build_sentence_tasks(annotations, score_sets)
    gold = [passage_gold(annotations.passages[pid]) for pid in ids]
    predicted = [score_sets[pid].passage_score for pid in ids]
    return {
        "nonfactual_ap": average_precision(nonfactual.samples),
        "nonfactual_star_ap": average_precision(star.samples),
        "factual_ap": average_precision(factual.samples),
        "pearson": pearson(predicted, gold),
        "spearman": spearman(predicted, gold),
    }


ScoreMapFn = Callable[[Mapping[str, PassageTrace], PipelineConfig], Mapping[str, ScoreSet]]


def _serial_score_map(idf_table: IdfTable | None) -> ScoreMapFn:
    def scorer(subset: Mapping[str, PassageTrace], config: PipelineConfig) -> dict[str, ScoreSet]:
        return {pid: run_pipeline(trace, idf_table, config) for pid, trace in subset.items()}

    return scorer


def run_ablation(
    plain_traces: Mapping[str, PassageTrace],
    typed_traces: Mapping[str, PassageTrace],
    annotations: AnnotationSet,
    idf_table: IdfTable | None,
    gamma: float,
    rho: float,
    score_map_fn: ScoreMapFn | None = None,
) -> AblationReport:
    """Score the five cumulative feature rows and collect their metrics.

    score_map_fn may be supplied to parallelize per-passage scoring; it must
    be equivalent to calling run_pipeline on each trace.
    """
    ids = sorted(annotations.passages)
    for name, traces in (("plain", plain_traces), ("typed", typed_traces)):
        missing = [pid for pid in ids if pid not in traces]
        if missing:
            raise EvaluationError(f"missing {name} traces for passages: {', '.join(missing)}")
    if score_map_fn is None:
        score_map_fn = _serial_score_map(idf_table)

    rows = []
    for label, toggles, variant in ABLATION_LADDER:
        config = PipelineConfig(gamma=gamma, rho=rho, **toggles)
        traces = plain_traces if variant == "plain" else typed_traces
        score_sets = score_map_fn({pid: traces[pid] for pid in ids}, config)
        rows.append(
            AblationRow(label=label, variant=variant, config=config, metrics=compute_metrics(annotations, score_sets))
        )
    return AblationReport(gamma=gamma, rho=rho, rows=tuple(rows))


def _round9(x: float) -> float:
    return round(x, 9)


def metrics_to_dict(metrics: Mapping[str, float]) -> dict[str, float]:
    return {key: _round9(metrics[key]) for key in METRIC_KEYS}


def report_to_dict(report: AblationReport) -> dict:
    return {
        "gamma": report.gamma,
        "rho": report.rho,
        "rows": [
            {
                "label": row.label,
                "variant": row.variant,
                "config": row.config.to_dict(),
                "metrics": metrics_to_dict(row.metrics),
            }
            for row in report.rows
        ],
    }


def _markdown_table(rows: Sequence[tuple[str, Mapping[str, float]]]) -> str:
    # Reported numbers are the raw values scaled by 100, two decimals.
    lines = [
        "| Method | " + " | ".join(METRIC_HEADERS) + " |",
        "|" + "---|" * (len(METRIC_HEADERS) + 1),
    ]
    for label, metrics in rows:
        cells = " | ".join(f"{100.0 * metrics[key]:.2f}" for key in METRIC_KEYS)
        lines.append(f"| {label} | {cells} |")
    return "\n".join(lines) + "\n"


def report_to_markdown(report: AblationReport) -> str:
    return _markdown_table([(row.label, row.metrics) for row in report.rows])


def evaluation_to_dict(config: PipelineConfig, metrics: Mapping[str, float], num_passages: int) -> dict:
    return {
        "config": config.to_dict(),
        "num_passages": num_passages,
        "metrics": metrics_to_dict(metrics),
    }


def evaluation_to_markdown(config: PipelineConfig, metrics: Mapping[str, float]) -> str:
    return _markdown_table([(config.fingerprint(), metrics)])
