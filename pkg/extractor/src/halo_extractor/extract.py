"""Trace extraction: forward pass, truncated distributions, pooled attention."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

import torch

from .model import ExtractionError, load_model
from .tagging import annotate_keywords, build_typed_tokens, concept_entity_type, word_tokens

SCHEMA_VERSION = 1
POOLING = "max-layers-heads"

PLAIN_PROMPT = "This is a passage from Wikipedia about {concept}:"
TYPED_PROMPT = (
    "Please complete the passage below using appropriate words that follow to the given type "
    "with < > wrapped. This is a passage from <ORG> Wikipedia about <{concept_type}> {concept}:"
)

DEFAULT_TOP_K_CAP = 512
TAIL_TARGET = 1e-3


@dataclass(frozen=True, slots=True)
class ExtractionJob:
    concept: str
    passage: str
    variant: str  # plain | typed
    model_id: str
    top_k: int = DEFAULT_TOP_K_CAP
    passage_id: str | None = None


def slugify(text: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", text.lower()).strip("-") or "passage"


def build_prompt(concept: str, variant: str) -> str:
    if variant == "plain":
        return PLAIN_PROMPT.format(concept=concept)
    return TYPED_PROMPT.format(concept=concept, concept_type=concept_entity_type(concept))


def _passage_stream(passage: str, variant: str):
    """(text, sentence_index, keyword_class, entity_type, is_tag) per word."""
    tags = annotate_keywords(passage)
    if variant == "typed":
        return build_typed_tokens(tags)
    return [(t.text, t.sentence_index, t.keyword_class, t.entity_type, False) for t in tags]


def _truncated_candidates(dist: torch.Tensor, realized_id: int, model, cap: int):
    probs, order = torch.sort(dist, descending=True)
    kept: list[tuple[int, float]] = []
    mass = 0.0
    for prob, token_id in zip(probs.tolist(), order.tolist()):
        if prob <= 0.0 or len(kept) >= cap or mass >= 1.0 - TAIL_TARGET:
            break
        kept.append((token_id, prob))
        mass += prob
    if realized_id not in (token_id for token_id, _ in kept):
        kept.append((realized_id, dist[realized_id].item()))
    candidates = [[model.decode_token(token_id), prob] for token_id, prob in kept]
    tail_mass = max(0.0, 1.0 - sum(prob for _, prob in candidates))
    return candidates, tail_mass


def extract_trace(job: ExtractionJob) -> dict:
    """Run the proxy model over prompt + passage and build one trace document."""
    if job.variant not in ("plain", "typed"):
        raise ValueError(f"variant must be plain or typed (got {job.variant!r})")
    prompt = build_prompt(job.concept, job.variant)
    stream = _passage_stream(job.passage, job.variant)
    if not stream:
        raise ExtractionError("empty passage")

    # identical vocabulary for both variants of a concept
    context_texts = [
        build_prompt(job.concept, "plain"),
        build_prompt(job.concept, "typed"),
        job.passage,
    ]
    model = load_model(job.model_id, context_texts)

    prompt_words = [tok for tok, _, _ in word_tokens(prompt)]
    all_words = prompt_words + [text for text, *_ in stream]
    pieces = model.tokenize_words(all_words)
    prompt_ids = [i for piece in pieces[: len(prompt_words)] for i in piece]
    passage_pieces = pieces[len(prompt_words) :]

    # model-token stream with inherited word annotations (many-to-one)
    ids = list(prompt_ids)
    annotations = []
    for (text, sentence, kclass, etype, is_tag), piece in zip(stream, passage_pieces):
        for token_id in piece:
            ids.append(token_id)
            annotations.append((token_id, sentence, kclass, etype, is_tag))

    logits, pooled = model.forward(ids)
    if job.variant == "typed":
        for tag_open in model.tag_open_ids():
            logits[:, tag_open] = float("-inf")
    probs = torch.softmax(logits, dim=-1)

    start = len(prompt_ids)
    tokens = []
    for local, (token_id, sentence, kclass, etype, is_tag) in enumerate(annotations):
        dist = probs[start + local - 1]
        realized_prob = dist[token_id].item()
        if realized_prob <= 0.0:
            raise ExtractionError(f"token {local}: realized token has zero probability after masking")
        nonzero = dist[dist > 0]
        entropy_term = 2.0 ** (-(nonzero * torch.log2(nonzero)).sum().item())
        candidates, tail_mass = _truncated_candidates(dist, token_id, model, job.top_k)
        record = {
            "index": local,
            "text": model.decode_token(token_id),
            "sentence_index": sentence,
            "logprob": math.log(realized_prob),
            "entropy_term": entropy_term,
            "is_keyword": kclass in ("entity", "noun") and not is_tag,
            "keyword_class": kclass if not is_tag else "none",
            "is_tag": is_tag,
            "candidates": candidates,
            "tail_mass": tail_mass,
        }
        if kclass == "entity" and not is_tag:
            record["entity_type"] = etype
        tokens.append(record)

    keyword_positions = [t["index"] for t in tokens if t["is_keyword"]]
    rows = []
    for pos, i in enumerate(keyword_positions):
        if pos == 0:
            continue
        weights = []
        for j in keyword_positions[:pos]:
            att = float(pooled[start + i, start + j].item())
            weights.append([j, min(1.0, max(0.0, att))])
        rows.append({"i": i, "weights": weights})

    return {
        "schema_version": SCHEMA_VERSION,
        "passage_id": job.passage_id or slugify(job.concept),
        "variant": job.variant,
        "prompt": prompt,
        "model_id": model.model_id,
        "tokens": tokens,
        "attention": {"pooling": POOLING, "rows": rows},
    }


def write_trace(trace: dict, out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{trace['passage_id']}.json"
    path.write_text(json.dumps(trace, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")
    return path
