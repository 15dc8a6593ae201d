"""Token, sentence, and passage hallucination scores."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

from .config import PipelineConfig
from .trace import TokenRecord

# Serialized floats are rounded to this many decimals so score files are
# byte-stable across runs and platforms.
SERIALIZED_DECIMALS = 9


@dataclass(frozen=True, slots=True)
class TokenScore:
    index: int
    h: float
    h_hat: float
    penalty: float


@dataclass(frozen=True, slots=True)
class ScoreSet:
    """All scores computed for one passage under one configuration."""

    passage_id: str
    fingerprint: str
    token_scores: tuple[TokenScore, ...]
    sentence_scores: tuple[float, ...]
    passage_score: float


def token_score(prob: float, entropy_term: float) -> float:
    """Negative log probability plus the exponentiated-entropy term."""
    if prob <= 0.0:
        raise ValueError(f"token probability must be positive (got {prob}); realized token lost upstream")
    if prob > 1.0:
        raise ValueError(f"token probability must be <= 1 (got {prob})")
    if entropy_term < 1.0:
        raise ValueError(f"entropy term must be >= 1 (got {entropy_term})")
    return -math.log(prob) + entropy_term


def _aggregate(scores: Sequence[float], tokens: Sequence[TokenRecord], keyword_weighted: bool, what: str) -> float:
    non_tag = [k for k, t in enumerate(tokens) if not t.is_tag]
    if not non_tag:
        raise ValueError(f"{what} has no non-tag tokens")
    if keyword_weighted:
        kw = [k for k in non_tag if tokens[k].is_keyword]
        if kw:
            return sum(scores[k] for k in kw) / len(kw)
    # Zero-keyword fallback and the keyword-weighting-off mode both reduce
    # to the plain mean over non-tag tokens.
    return sum(scores[k] for k in non_tag) / len(non_tag)


def sentence_score(
    scores: Sequence[float],
    tokens: Sequence[TokenRecord],
    sentence_index: int,
    *,
    keyword_weighted: bool = True,
) -> float:
    """Mean score over the sentence's keyword tokens (tag tokens never count).

    Sentences without keywords fall back to the mean over all non-tag tokens.
    """
    members = [k for k, t in enumerate(tokens) if t.sentence_index == sentence_index]
    if not members:
        raise ValueError(f"sentence {sentence_index} has no tokens")
    return _aggregate(
        [scores[k] for k in members],
        [tokens[k] for k in members],
        keyword_weighted,
        f"sentence {sentence_index}",
    )


def passage_score(
    scores: Sequence[float],
    tokens: Sequence[TokenRecord],
    *,
    keyword_weighted: bool = True,
) -> float:
    """Mean score over keyword tokens of the whole passage, same fallback rule."""
    if not tokens:
        raise ValueError("empty passage")
    return _aggregate(scores, tokens, keyword_weighted, "passage")


def _round(x: float) -> float:
    return round(x, SERIALIZED_DECIMALS)


def score_set_to_dict(score_set: ScoreSet, config: PipelineConfig) -> dict:
    if config.fingerprint() != score_set.fingerprint:
        raise ValueError("score set was computed under a different configuration")
    return {
        "passage_id": score_set.passage_id,
        "config": config.to_dict(),
        "tokens": [
            {"index": t.index, "h": _round(t.h), "h_hat": _round(t.h_hat), "penalty": _round(t.penalty)}
            for t in score_set.token_scores
        ],
        "sentence_scores": [_round(s) for s in score_set.sentence_scores],
        "passage_score": _round(score_set.passage_score),
    }


def serialize_score_set(score_set: ScoreSet, config: PipelineConfig) -> str:
    return json.dumps(score_set_to_dict(score_set, config), ensure_ascii=False, indent=1)
