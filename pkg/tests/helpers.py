"""Builders for valid in-memory traces used across the test suite."""

from __future__ import annotations

import math
import random

from halo.trace import AttentionRow, PassageTrace, TokenRecord

ENTITY_TYPES = ("PERSON", "DATE", "GPE", "ORG", "CARDINAL")


def make_token(
    index: int,
    text: str = "tok",
    *,
    sentence_index: int = 0,
    prob: float = 0.5,
    entropy_term: float = 2.0,
    keyword_class: str = "none",
    entity_type: str | None = None,
    is_tag: bool = False,
    candidates: tuple[tuple[str, float], ...] | None = None,
    tail_mass: float | None = None,
) -> TokenRecord:
    if candidates is None:
        rest = 1.0 - prob
        pairs = [(text, prob)]
        if rest > 0:
            pairs.append(("_alt", rest * 0.5))
        pairs.sort(key=lambda kv: -kv[1])
        candidates = tuple(pairs)
    if tail_mass is None:
        tail_mass = max(0.0, 1.0 - sum(p for _, p in candidates))
    if keyword_class == "entity" and entity_type is None:
        entity_type = "PERSON"
    return TokenRecord(
        index=index,
        text=text,
        sentence_index=sentence_index,
        logprob=math.log(prob),
        entropy_term=entropy_term,
        is_keyword=keyword_class in ("entity", "noun"),
        keyword_class=keyword_class,
        entity_type=entity_type,
        is_tag=is_tag,
        candidates=candidates,
        tail_mass=tail_mass,
    )


def make_trace(
    tokens,
    attention=(),
    *,
    passage_id: str = "p0",
    variant: str = "plain",
    prompt: str = "This is a passage about x:",
    model_id: str = "test-model",
) -> PassageTrace:
    return PassageTrace(
        schema_version=1,
        passage_id=passage_id,
        variant=variant,
        prompt=prompt,
        model_id=model_id,
        tokens=tuple(tokens),
        attention=tuple(attention),
    )


def full_attention(tokens) -> list[AttentionRow]:
    """One row per keyword with preceding keywords, uniform raw weights."""
    rows = []
    kw = [t.index for t in tokens if t.is_keyword and not t.is_tag]
    for pos, i in enumerate(kw):
        if pos == 0:
            continue
        rows.append(AttentionRow(i=i, weights=tuple((j, 0.5) for j in kw[:pos])))
    return rows


def synthetic_distribution(rng: random.Random, vocab, realized_boost: float = 8.0):
    """A full distribution over `vocab` plus the realized index."""
    weights = [math.exp(rng.gauss(0.0, 1.5)) for _ in vocab]
    realized = rng.randrange(len(vocab))
    weights[realized] *= realized_boost
    total = sum(weights)
    return [w / total for w in weights], realized


def truncate_distribution(vocab, probs, realized: int, k: int = 6):
    """Top-k candidates (realized force-included), tail mass, entropy term."""
    order = sorted(range(len(vocab)), key=lambda v: -probs[v])
    top = order[:k]
    if realized not in top:
        top[-1] = realized
        top.sort(key=lambda v: -probs[v])
    candidates = tuple((vocab[v], probs[v]) for v in top)
    tail_mass = 1.0 - sum(p for _, p in candidates)
    entropy_term = 2.0 ** -sum(p * math.log2(p) for p in probs if p > 0)
    return candidates, tail_mass, entropy_term


def random_propagation_instance(rng: random.Random, n_max: int = 20):
    """(h, keyword mask, dense attention, sparse rows) for propagation checks."""
    n = rng.randint(2, n_max)
    mask = [rng.random() < 0.5 for _ in range(n)]
    att = [[0.0] * n for _ in range(n)]
    rows = []
    kw = [i for i in range(n) if mask[i]]
    for pos, i in enumerate(kw):
        if pos == 0:
            continue
        weights = []
        for j in kw[:pos]:
            w = rng.random()
            att[i][j] = w
            weights.append((j, w))
        rows.append(AttentionRow(i, tuple(weights)))
    h = [rng.uniform(0.0, 20.0) for _ in range(n)]
    return h, mask, att, rows


def random_trace(
    rng: random.Random,
    *,
    passage_id: str = "p0",
    variant: str = "plain",
    max_tokens: int = 16,
) -> PassageTrace:
    """A random trace satisfying every validator invariant."""
    vocab = [f"w{k}" for k in range(24)] + ["<PERSON>", "<DATE>"]
    n = rng.randint(3, max_tokens)
    tokens: list[TokenRecord] = []
    sentence = 0
    index = 0

    def emit(keyword_class: str, is_tag: bool, forced_text: str | None = None):
        nonlocal index
        probs, realized = synthetic_distribution(rng, vocab)
        if forced_text is not None:
            realized = vocab.index(forced_text)
        candidates, tail, entropy = truncate_distribution(vocab, probs, realized)
        tokens.append(
            TokenRecord(
                index=index,
                text=vocab[realized],
                sentence_index=sentence,
                logprob=math.log(probs[realized]),
                entropy_term=entropy,
                is_keyword=keyword_class in ("entity", "noun"),
                keyword_class=keyword_class,
                entity_type=rng.choice(ENTITY_TYPES) if keyword_class == "entity" else None,
                is_tag=is_tag,
                candidates=candidates,
                tail_mass=tail,
            )
        )
        index += 1

    for _ in range(n):
        if tokens and rng.random() < 0.2:
            sentence += 1
        roll = rng.random()
        if roll < 0.25:
            if variant == "typed" and rng.random() < 0.7:
                emit("none", True, forced_text=rng.choice(["<PERSON>", "<DATE>"]))
            emit("entity", False)
        elif roll < 0.45:
            emit("noun", False)
        else:
            emit("none", False)

    rows = []
    kw = [t.index for t in tokens if t.is_keyword and not t.is_tag]
    for pos, i in enumerate(kw):
        if pos == 0:
            continue
        weights = tuple((j, rng.random()) for j in kw[:pos] if rng.random() < 0.9 or pos == 1)
        rows.append(AttentionRow(i=i, weights=weights))
    return make_trace(tokens, rows, passage_id=passage_id, variant=variant)
