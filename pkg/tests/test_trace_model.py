from __future__ import annotations

import json
import math
import random

import pytest
from hypothesis import given, strategies as st

from halo.trace import (
    AnnotationFormatError,
    IdfFormatError,
    TraceFormatError,
    build_idf_table,
    parse_annotations,
    parse_idf,
    parse_trace,
    serialize_idf,
    serialize_trace,
    trace_to_dict,
    validate_trace,
)

from .helpers import make_token, make_trace, random_trace

MINIMAL_DOC = {
    "schema_version": 1,
    "passage_id": "mini",
    "variant": "plain",
    "prompt": "This is a passage from an encyclopedia about x:",
    "model_id": "m",
    "tokens": [
        {
            "index": 0,
            "text": "x",
            "sentence_index": 0,
            "logprob": 0.0,
            "entropy_term": 1.0,
            "is_keyword": False,
            "keyword_class": "none",
            "is_tag": False,
            "candidates": [["x", 1.0]],
            "tail_mass": 0.0,
        }
    ],
    "attention": {"pooling": "max-layers-heads", "rows": []},
}


def test_parse_minimal_single_token_roundtrip():
    trace = parse_trace(json.dumps(MINIMAL_DOC))
    assert len(trace.tokens) == 1
    assert trace.tokens[0].text == "x"
    assert parse_trace(serialize_trace(trace)) == trace


def test_parse_rejects_unsorted_candidates():
    doc = json.loads(json.dumps(MINIMAL_DOC))
    doc["tokens"][0]["candidates"] = [["x", 0.4], ["y", 0.6]]
    doc["tokens"][0]["logprob"] = math.log(0.4)
    with pytest.raises(TraceFormatError, match="token 0.*not sorted"):
        parse_trace(json.dumps(doc))


def test_parse_rejects_unknown_schema_version():
    doc = dict(MINIMAL_DOC, schema_version=2)
    with pytest.raises(TraceFormatError, match="schema_version"):
        parse_trace(json.dumps(doc))


def test_parse_rejects_wrong_pooling():
    doc = json.loads(json.dumps(MINIMAL_DOC))
    doc["attention"]["pooling"] = "mean-layers-heads"
    with pytest.raises(TraceFormatError, match="pooling"):
        parse_trace(json.dumps(doc))


def test_parse_reports_field_and_token_index_on_type_mismatch():
    doc = json.loads(json.dumps(MINIMAL_DOC))
    doc["tokens"][0]["logprob"] = "high"
    with pytest.raises(TraceFormatError, match="token 0.*logprob"):
        parse_trace(json.dumps(doc))


def test_parse_malformed_document():
    with pytest.raises(TraceFormatError, match="malformed"):
        parse_trace(b"{not json")


def test_minitrace_fixture(fixtures_dir):
    raw = (fixtures_dir / "minitrace.json").read_bytes()
    trace = parse_trace(raw)
    assert len(trace.tokens) == 12
    assert sum(1 for t in trace.tokens if t.is_keyword) == 5
    assert validate_trace(trace) == []
    assert parse_trace(serialize_trace(trace)) == trace


def test_validate_accepts_builders():
    trace = make_trace([make_token(0, "a"), make_token(1, "b", keyword_class="noun", sentence_index=1)])
    assert validate_trace(trace) == []


def test_validate_flags_realized_absent_from_candidates():
    bad = make_token(0, "a", candidates=(("b", 0.6), ("c", 0.4)), tail_mass=0.0)
    violations = validate_trace(make_trace([bad]))
    assert len(violations) == 1
    assert "absent from candidates" in violations[0]


def test_validate_flags_attention_to_non_keyword():
    from halo.trace import AttentionRow

    tokens = [
        make_token(0, "a"),  # not a keyword
        make_token(1, "b", keyword_class="noun"),
        make_token(2, "c", keyword_class="noun"),
    ]
    trace = make_trace(tokens, [AttentionRow(i=2, weights=((0, 0.5),))])
    violations = validate_trace(trace)
    assert any("attended token 0 must be a non-tag keyword" in v for v in violations)


def test_validate_flags_tag_keyword_conflict():
    from dataclasses import replace

    bad = replace(make_token(0, "a", keyword_class="noun"), is_tag=True)
    violations = validate_trace(make_trace([bad], variant="typed"))
    assert any("is_tag implies" in v for v in violations)


def test_validate_flags_plain_variant_with_tags():
    tag = make_token(0, "<PERSON>", is_tag=True)
    violations = validate_trace(make_trace([tag]))
    assert any("variant 'plain' forbids" in v for v in violations)


def test_validate_flags_uncovered_keyword():
    tokens = [make_token(0, "a", keyword_class="noun"), make_token(1, "b", keyword_class="noun")]
    violations = validate_trace(make_trace(tokens))
    assert any("no attention row" in v for v in violations)


@pytest.mark.parametrize("seed", range(8))
def test_random_trace_roundtrip_and_valid(seed):
    rng = random.Random(seed)
    trace = random_trace(rng, variant="typed" if seed % 2 else "plain")
    assert validate_trace(trace) == []
    assert parse_trace(serialize_trace(trace)) == trace


def test_trace_dict_omits_absent_entity_type():
    doc = trace_to_dict(make_trace([make_token(0, "a")]))
    assert "entity_type" not in doc["tokens"][0]


def test_parse_annotations_basic():
    raw = json.dumps({"passages": {"p1": ["accurate", "major_inaccurate"]}})
    annotations = parse_annotations(raw)
    assert annotations.passages == {"p1": ("accurate", "major_inaccurate")}


def test_parse_annotations_rejects_wrong_case():
    raw = json.dumps({"passages": {"p1": ["Accurate"]}})
    with pytest.raises(AnnotationFormatError, match="unknown label"):
        parse_annotations(raw)


def test_parse_annotations_empty():
    assert parse_annotations(json.dumps({"passages": {}})).passages == {}


def test_parse_annotations_rejects_duplicate_passage():
    raw = '{"passages": {"p1": ["accurate"], "p1": ["accurate"]}}'
    with pytest.raises(AnnotationFormatError, match="duplicate passage_id"):
        parse_annotations(raw)


def test_idf_values():
    table = build_idf_table({"the": 100, "zyzzyva": 1}, num_docs=100)
    assert table.idf("the") == pytest.approx(0.0, abs=1e-12)
    assert table.idf("zyzzyva") == pytest.approx(math.log(100), abs=1e-9)
    assert table.idf("unseen") == pytest.approx(math.log(100), abs=1e-9)


def test_idf_rejects_df_above_num_docs():
    with pytest.raises(IdfFormatError, match="exceeds num_docs"):
        build_idf_table({"x": 101}, num_docs=100)


@given(st.integers(min_value=1, max_value=1000), st.integers(min_value=1, max_value=1000), st.integers(min_value=1000, max_value=100000))
def test_idf_non_increasing_in_df(df1, df2, num_docs):
    table = build_idf_table({"a": min(df1, df2), "b": max(df1, df2)}, num_docs=num_docs)
    assert table.idf("a") >= table.idf("b")
    assert table.idf("b") >= 0.0


def test_idf_roundtrip():
    table = build_idf_table({"a": 3, "b": 7}, num_docs=10, default_df=1)
    again = parse_idf(serialize_idf(table))
    assert again.num_docs == 10 and again.default_df == 1
    assert dict(again.doc_freq) == {"a": 3, "b": 7}
