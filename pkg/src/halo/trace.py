"""Trace, annotation, and IDF data model: parsing, serialization, validation.

All types are immutable after parse and safe to share across workers. The
on-disk formats are UTF-8 JSON; see the README for the exact schemas.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Mapping

SCHEMA_VERSION = 1
ATTENTION_POOLING = "max-layers-heads"
VARIANTS = ("plain", "typed")
KEYWORD_CLASSES = ("entity", "noun", "none")
LABELS = ("accurate", "minor_inaccurate", "major_inaccurate")

# Tolerances used by the validator.
PROB_MATCH_TOL = 1e-6
MASS_TOL = 1e-4


class TraceFormatError(ValueError):
    """Raised when a trace document is malformed or structurally invalid."""


class AnnotationFormatError(ValueError):
    """Raised when an annotation document is malformed."""


class IdfFormatError(ValueError):
    """Raised when an IDF/counts document is malformed."""


@dataclass(frozen=True, slots=True)
class TokenRecord:
    """One realized token of a passage, with its truncated next-token distribution."""

    index: int
    text: str
    sentence_index: int
    logprob: float
    entropy_term: float
    is_keyword: bool
    keyword_class: str
    entity_type: str | None
    is_tag: bool
    candidates: tuple[tuple[str, float], ...]
    tail_mass: float

    @property
    def prob(self) -> float:
        """Realized-token probability implied by the stored log-probability."""
        return math.exp(self.logprob)


@dataclass(frozen=True, slots=True)
class AttentionRow:
    """Pooled attention from keyword token ``i`` to preceding keyword tokens ``j < i``."""

    i: int
    weights: tuple[tuple[int, float], ...]


@dataclass(frozen=True, slots=True)
class PassageTrace:
    """Serialized record of one generated passage under one context variant."""

    schema_version: int
    passage_id: str
    variant: str
    prompt: str
    model_id: str
    tokens: tuple[TokenRecord, ...]
    attention: tuple[AttentionRow, ...]

    @property
    def num_sentences(self) -> int:
        return max(t.sentence_index for t in self.tokens) + 1 if self.tokens else 0


@dataclass(frozen=True, slots=True)
class IdfTable:
    """Token -> inverse document frequency, with a default for unseen tokens."""

    num_docs: int
    doc_freq: Mapping[str, int]
    default_df: int = 1

    def idf(self, token: str) -> float:
        df = self.doc_freq.get(token, self.default_df)
        return math.log(self.num_docs / df)


@dataclass(frozen=True, slots=True)
class AnnotationSet:
    """Gold sentence labels per passage."""

    passages: Mapping[str, tuple[str, ...]]


def _field(obj: Mapping[str, Any], name: str, kind: type | tuple, ctx: str) -> Any:
    if name not in obj:
        raise TraceFormatError(f"{ctx}: missing field '{name}'")
    value = obj[name]
    if kind is float:
        # JSON integers are valid numbers for float fields.
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise TraceFormatError(f"{ctx}: field '{name}' must be a number")
        return float(value)
    if kind is int and isinstance(value, bool):
        raise TraceFormatError(f"{ctx}: field '{name}' must be an integer")
    if not isinstance(value, kind):
        kind_name = kind.__name__ if isinstance(kind, type) else "value"
        raise TraceFormatError(f"{ctx}: field '{name}' must be of type {kind_name}")
    return value


def _parse_token(obj: Any, pos: int) -> TokenRecord:
    ctx = f"token {pos}"
    if not isinstance(obj, dict):
        raise TraceFormatError(f"{ctx}: must be an object")
    keyword_class = _field(obj, "keyword_class", str, ctx)
    if keyword_class not in KEYWORD_CLASSES:
        raise TraceFormatError(f"{ctx}: field 'keyword_class' must be one of {KEYWORD_CLASSES}")
    entity_type = obj.get("entity_type")
    if entity_type is not None and not isinstance(entity_type, str):
        raise TraceFormatError(f"{ctx}: field 'entity_type' must be a string or absent")

    raw_candidates = _field(obj, "candidates", list, ctx)
    candidates = []
    prev = math.inf
    for k, pair in enumerate(raw_candidates):
        if (
            not isinstance(pair, (list, tuple))
            or len(pair) != 2
            or not isinstance(pair[0], str)
            or isinstance(pair[1], bool)
            or not isinstance(pair[1], (int, float))
        ):
            raise TraceFormatError(f"{ctx}: field 'candidates[{k}]' must be a [text, probability] pair")
        prob = float(pair[1])
        if prob > prev:
            raise TraceFormatError(
                f"{ctx}: field 'candidates' not sorted by non-increasing probability at entry {k}"
            )
        prev = prob
        candidates.append((pair[0], prob))

    return TokenRecord(
        index=_field(obj, "index", int, ctx),
        text=_field(obj, "text", str, ctx),
        sentence_index=_field(obj, "sentence_index", int, ctx),
        logprob=_field(obj, "logprob", float, ctx),
        entropy_term=_field(obj, "entropy_term", float, ctx),
        is_keyword=_field(obj, "is_keyword", bool, ctx),
        keyword_class=keyword_class,
        entity_type=entity_type,
        is_tag=_field(obj, "is_tag", bool, ctx),
        candidates=tuple(candidates),
        tail_mass=_field(obj, "tail_mass", float, ctx),
    )


def _parse_attention_row(obj: Any, pos: int) -> AttentionRow:
    ctx = f"attention row {pos}"
    if not isinstance(obj, dict):
        raise TraceFormatError(f"{ctx}: must be an object")
    raw = _field(obj, "weights", list, ctx)
    weights = []
    for k, pair in enumerate(raw):
        if (
            not isinstance(pair, (list, tuple))
            or len(pair) != 2
            or isinstance(pair[0], bool)
            or not isinstance(pair[0], int)
            or isinstance(pair[1], bool)
            or not isinstance(pair[1], (int, float))
        ):
            raise TraceFormatError(f"{ctx}: field 'weights[{k}]' must be a [index, weight] pair")
        weights.append((pair[0], float(pair[1])))
    return AttentionRow(i=_field(obj, "i", int, ctx), weights=tuple(weights))


def parse_trace(raw: bytes | str) -> PassageTrace:
    """Parse a trace document, raising TraceFormatError on structural problems.

    Structural checks (types, enum values, candidate ordering, schema and
    pooling identifiers) happen here; the semantic invariants are the job of
    validate_trace.
    """
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise TraceFormatError(f"malformed trace document: {exc}") from exc
    if not isinstance(doc, dict):
        raise TraceFormatError("trace document must be a JSON object")

    version = _field(doc, "schema_version", int, "trace")
    if version != SCHEMA_VERSION:
        raise TraceFormatError(f"trace: unsupported schema_version {version} (expected {SCHEMA_VERSION})")
    variant = _field(doc, "variant", str, "trace")
    if variant not in VARIANTS:
        raise TraceFormatError(f"trace: field 'variant' must be one of {VARIANTS}")

    attention_obj = _field(doc, "attention", dict, "trace")
    pooling = _field(attention_obj, "pooling", str, "attention")
    if pooling != ATTENTION_POOLING:
        raise TraceFormatError(f"attention: field 'pooling' must equal '{ATTENTION_POOLING}'")
    rows = _field(attention_obj, "rows", list, "attention")

    return PassageTrace(
        schema_version=version,
        passage_id=_field(doc, "passage_id", str, "trace"),
        variant=variant,
        prompt=_field(doc, "prompt", str, "trace"),
        model_id=_field(doc, "model_id", str, "trace"),
        tokens=tuple(_parse_token(t, k) for k, t in enumerate(_field(doc, "tokens", list, "trace"))),
        attention=tuple(_parse_attention_row(r, k) for k, r in enumerate(rows)),
    )


def trace_to_dict(trace: PassageTrace) -> dict:
    tokens = []
    for t in trace.tokens:
        obj = {
            "index": t.index,
            "text": t.text,
            "sentence_index": t.sentence_index,
            "logprob": t.logprob,
            "entropy_term": t.entropy_term,
            "is_keyword": t.is_keyword,
            "keyword_class": t.keyword_class,
            "is_tag": t.is_tag,
            "candidates": [[text, prob] for text, prob in t.candidates],
            "tail_mass": t.tail_mass,
        }
        if t.entity_type is not None:
            obj["entity_type"] = t.entity_type
        tokens.append(obj)
    return {
        "schema_version": trace.schema_version,
        "passage_id": trace.passage_id,
        "variant": trace.variant,
        "prompt": trace.prompt,
        "model_id": trace.model_id,
        "tokens": tokens,
        "attention": {
            "pooling": ATTENTION_POOLING,
            "rows": [{"i": r.i, "weights": [[j, w] for j, w in r.weights]} for r in trace.attention],
        },
    }


def serialize_trace(trace: PassageTrace) -> str:
    """Serialize so that parse_trace(serialize_trace(t)) == t."""
    return json.dumps(trace_to_dict(trace), ensure_ascii=False, indent=1)


def validate_trace(trace: PassageTrace) -> list[str]:
    """Check every semantic invariant; returns one description per violation."""
    out: list[str] = []
    n = len(trace.tokens)

    prev_sentence = 0
    for pos, tok in enumerate(trace.tokens):
        where = f"token {pos}"
        if tok.index != pos:
            out.append(f"{where}: indices not contiguous (index {tok.index}, expected {pos})")
        if tok.sentence_index < prev_sentence:
            out.append(f"{where}: sentence_index decreases ({tok.sentence_index} after {prev_sentence})")
        prev_sentence = max(prev_sentence, tok.sentence_index)

        if tok.logprob > 0:
            out.append(f"{where}: logprob must be <= 0 (got {tok.logprob})")
        if tok.entropy_term < 1.0:
            out.append(f"{where}: entropy_term must be >= 1 (got {tok.entropy_term})")
        if not 0.0 <= tok.tail_mass <= 1.0:
            out.append(f"{where}: tail_mass must lie in [0, 1] (got {tok.tail_mass})")

        total = sum(p for _, p in tok.candidates) + tok.tail_mass
        if not (1.0 - MASS_TOL) <= total <= (1.0 + MASS_TOL):
            out.append(f"{where}: candidates + tail_mass sum to {total:.6f}, expected 1 +/- {MASS_TOL}")
        for k in range(1, len(tok.candidates)):
            if tok.candidates[k][1] > tok.candidates[k - 1][1]:
                out.append(f"{where}: candidates not sorted by non-increasing probability at entry {k}")
                break
        texts = [t for t, _ in tok.candidates]
        if len(set(texts)) != len(texts):
            out.append(f"{where}: duplicate candidate texts")

        realized = [p for t, p in tok.candidates if t == tok.text]
        if not realized:
            out.append(f"{where}: realized token {tok.text!r} absent from candidates")
        elif abs(realized[0] - math.exp(tok.logprob)) > PROB_MATCH_TOL:
            out.append(
                f"{where}: exp(logprob)={math.exp(tok.logprob):.8f} does not match "
                f"candidate probability {realized[0]:.8f}"
            )

        if tok.is_tag and tok.is_keyword:
            out.append(f"{where}: is_tag implies is_keyword = false")
        if tok.is_keyword != (tok.keyword_class in ("entity", "noun")):
            out.append(f"{where}: is_keyword inconsistent with keyword_class {tok.keyword_class!r}")
        if tok.keyword_class == "entity" and tok.entity_type is None:
            out.append(f"{where}: keyword_class 'entity' requires entity_type")
        if tok.keyword_class in ("noun", "none") and tok.entity_type is not None:
            out.append(f"{where}: keyword_class {tok.keyword_class!r} forbids entity_type")

        if trace.variant == "plain" and tok.is_tag:
            out.append(f"{where}: variant 'plain' forbids is_tag tokens")

    def is_kw(idx: int) -> bool:
        t = trace.tokens[idx]
        return t.is_keyword and not t.is_tag

    seen_rows: set[int] = set()
    for pos, row in enumerate(trace.attention):
        where = f"attention row {pos} (i={row.i})"
        if not 0 <= row.i < n:
            out.append(f"{where}: attending index out of range")
            continue
        if row.i in seen_rows:
            out.append(f"{where}: duplicate row for this token")
        seen_rows.add(row.i)
        if not is_kw(row.i):
            out.append(f"{where}: attending token must be a non-tag keyword")
        prev_j = -1
        for j, att in row.weights:
            if not 0 <= j < n:
                out.append(f"{where}: attended index {j} out of range")
                continue
            if j >= row.i:
                out.append(f"{where}: attended index {j} must precede {row.i}")
            if j <= prev_j:
                out.append(f"{where}: attended indices must be strictly increasing")
            prev_j = j
            if not 0.0 <= att <= 1.0:
                out.append(f"{where}: attention weight {att} outside [0, 1]")
            if not is_kw(j):
                out.append(f"{where}: attended token {j} must be a non-tag keyword")

    keyword_seen = False
    for pos in range(n):
        if is_kw(pos):
            if keyword_seen and pos not in seen_rows:
                out.append(f"token {pos}: keyword with preceding keywords has no attention row")
            keyword_seen = True

    return out


def parse_annotations(raw: bytes | str) -> AnnotationSet:
    """Parse a gold-label document; labels are case-sensitive exact strings."""

    def reject_duplicates(pairs):
        obj = {}
        for key, value in pairs:
            if key in obj:
                raise AnnotationFormatError(f"duplicate passage_id {key!r}")
            obj[key] = value
        return obj

    try:
        doc = json.loads(raw, object_pairs_hook=reject_duplicates)
    except json.JSONDecodeError as exc:
        raise AnnotationFormatError(f"malformed annotation document: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("passages"), dict):
        raise AnnotationFormatError("annotation document must be {'passages': {...}}")

    passages: dict[str, tuple[str, ...]] = {}
    for pid, labels in doc["passages"].items():
        if not isinstance(labels, list):
            raise AnnotationFormatError(f"passage {pid!r}: labels must be a list")
        for k, label in enumerate(labels):
            if label not in LABELS:
                raise AnnotationFormatError(f"passage {pid!r}, sentence {k}: unknown label {label!r}")
        passages[pid] = tuple(labels)
    return AnnotationSet(passages=passages)


def build_idf_table(doc_freq: Mapping[str, int], num_docs: int, default_df: int = 1) -> IdfTable:
    """Build an IdfTable with idf(t) = ln(num_docs / df(t))."""
    if num_docs < 1:
        raise IdfFormatError(f"num_docs must be >= 1 (got {num_docs})")
    if not 1 <= default_df <= num_docs:
        raise IdfFormatError(f"default_df must lie in [1, num_docs] (got {default_df})")
    for token, df in doc_freq.items():
        if isinstance(df, bool) or not isinstance(df, int):
            raise IdfFormatError(f"token {token!r}: document frequency must be an integer")
        if df < 1:
            raise IdfFormatError(f"token {token!r}: document frequency must be >= 1 (got {df})")
        if df > num_docs:
            raise IdfFormatError(f"token {token!r}: document frequency {df} exceeds num_docs {num_docs}")
    return IdfTable(num_docs=num_docs, doc_freq=dict(doc_freq), default_df=default_df)


def parse_idf(raw: bytes | str) -> IdfTable:
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise IdfFormatError(f"malformed idf document: {exc}") from exc
    if not isinstance(doc, dict):
        raise IdfFormatError("idf document must be a JSON object")
    for key in ("num_docs", "doc_freq"):
        if key not in doc:
            raise IdfFormatError(f"idf document missing field '{key}'")
    if not isinstance(doc["num_docs"], int) or not isinstance(doc["doc_freq"], dict):
        raise IdfFormatError("idf document field types: num_docs int, doc_freq object")
    return build_idf_table(doc["doc_freq"], doc["num_docs"], doc.get("default_df", 1))


def serialize_idf(table: IdfTable) -> str:
    doc = {
        "num_docs": table.num_docs,
        "default_df": table.default_df,
        "doc_freq": {k: table.doc_freq[k] for k in sorted(table.doc_freq)},
    }
    return json.dumps(doc, ensure_ascii=False, indent=1)
