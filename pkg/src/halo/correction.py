"""Probability correction: candidate-set renormalization and IDF reweighting.

Both corrections operate on the stored truncated candidate distribution; the
normalization therefore runs over the candidate set, and the approximation
error against a full-vocabulary sum is bounded by the trace's tail_mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .config import ConfigError, PipelineConfig
from .trace import IdfTable, TokenRecord

# IDF weights are floored at this fraction of the largest idf in the
# candidate set, so the realized token keeps positive mass even when its own
# idf is exactly zero (a token present in every corpus document). A relative
# floor keeps the reweighting invariant under scaling of the whole table.
IDF_FLOOR_RATIO = 1e-9


@dataclass(frozen=True, slots=True)
class CorrectedDistribution:
    """A renormalized candidate distribution and its derived per-token inputs."""

    entries: tuple[tuple[str, float], ...]
    realized_prob: float
    entropy_term: float


def candidate_set(
    candidates: tuple[tuple[str, float], ...],
    realized: str,
    rho: float,
) -> list[tuple[str, float]]:
    """Entries with probability strictly above rho, plus the realized token."""
    kept = [(text, prob) for text, prob in candidates if prob > rho or text == realized]
    if not any(text == realized for text, _ in kept):
        raise ValueError(f"realized token {realized!r} absent from candidates")
    return kept


def _entropy_term(probs: list[float]) -> float:
    bits = -sum(p * math.log2(p) for p in probs if p > 0.0)
    return 2.0 ** bits


def renormalize(subset: list[tuple[str, float]], realized: str) -> CorrectedDistribution:
    """Divide the subset by its total mass so it sums to one."""
    total = sum(prob for _, prob in subset)
    if total <= 0.0:
        raise ValueError("candidate subset has zero total mass")
    entries = tuple((text, prob / total) for text, prob in subset)
    realized_prob = next(prob for text, prob in entries if text == realized)
    return CorrectedDistribution(
        entries=entries,
        realized_prob=realized_prob,
        entropy_term=_entropy_term([p for _, p in entries]),
    )


def apply_idf(dist: CorrectedDistribution, idf_table: IdfTable, realized: str) -> CorrectedDistribution:
    """Reweight each candidate by its IDF and renormalize over the set.

    A uniform IDF profile (including all-zero) cancels out, so the
    distribution is returned unchanged in that case.
    """
    idfs = [idf_table.idf(text) for text, _ in dist.entries]
    if max(idfs) == min(idfs):
        return dist
    floor = IDF_FLOOR_RATIO * max(idfs)
    weights = [prob * max(idf, floor) for (_, prob), idf in zip(dist.entries, idfs)]
    total = sum(weights)
    entries = tuple((text, w / total) for (text, _), w in zip(dist.entries, weights))
    realized_prob = next(prob for text, prob in entries if text == realized)
    return CorrectedDistribution(
        entries=entries,
        realized_prob=realized_prob,
        entropy_term=_entropy_term([p for _, p in entries]),
    )


def corrected_token_inputs(
    token: TokenRecord,
    idf_table: IdfTable | None,
    config: PipelineConfig,
) -> tuple[float, float]:
    """(probability, entropy term) feeding the token score under this config.

    With both corrections off this is the stored raw pair; otherwise the
    candidate set is thresholded at rho, renormalized, and optionally
    IDF-reweighted, and both outputs are read off the corrected distribution.
    """
    if not config.use_type and not config.use_idf:
        return math.exp(token.logprob), token.entropy_term
    dist = renormalize(candidate_set(token.candidates, token.text, config.rho), token.text)
    if config.use_idf:
        if idf_table is None:
            raise ConfigError("IDF correction enabled but no IDF table provided")
        dist = apply_idf(dist, idf_table, token.text)
    return dist.realized_prob, dist.entropy_term
