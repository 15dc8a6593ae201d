"""Penalty propagation through pooled attention between keyword tokens.

Penalties accumulate left to right: each keyword token receives the
attention-weighted sum of the already-penalized scores of its preceding
keywords, scaled by the decay coefficient. Because attention is causal, a
single pass is the exact recursion; multi-hop decay emerges from reusing
penalized scores.
"""

from __future__ import annotations

from typing import Sequence

from .trace import AttentionRow, TokenRecord


def normalize_weights(row: AttentionRow) -> list[tuple[int, float]]:
    """Proportionally normalize a row; a zero-sum row carries no penalty."""
    total = sum(att for _, att in row.weights)
    if total <= 0.0:
        return []
    return [(j, att / total) for j, att in row.weights]


def propagate(
    h: Sequence[float],
    tokens: Sequence[TokenRecord],
    attention: Sequence[AttentionRow],
    gamma: float,
) -> tuple[list[float], list[float]]:
    """Return (penalized scores, raw penalties), index-aligned with tokens.

    Non-keyword and tag tokens pass through unchanged. The result does not
    depend on the order attention rows are supplied in.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1] (got {gamma})")
    if len(h) != len(tokens):
        raise ValueError("scores and tokens must align")

    rows: dict[int, AttentionRow] = {}
    for row in attention:
        tok = tokens[row.i]
        if not tok.is_keyword or tok.is_tag:
            raise ValueError(f"attention row for non-keyword token {row.i}")
        if row.i in rows:
            raise ValueError(f"duplicate attention row for token {row.i}")
        for j, _ in row.weights:
            if j >= row.i:
                raise ValueError(f"attention row {row.i} references non-preceding token {j}")
            if not tokens[j].is_keyword or tokens[j].is_tag:
                raise ValueError(f"attention row {row.i} references non-keyword token {j}")
        rows[row.i] = row

    h_hat = list(h)
    penalties = [0.0] * len(tokens)
    for i, tok in enumerate(tokens):
        if not tok.is_keyword or tok.is_tag:
            continue
        row = rows.get(i)
        if row is None:
            continue
        penalty = sum(w * h_hat[j] for j, w in normalize_weights(row))
        penalties[i] = penalty
        h_hat[i] = h[i] + gamma * penalty
    return h_hat, penalties
