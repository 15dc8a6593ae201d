from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, strategies as st

from halo.scoring import passage_score, sentence_score, token_score

from .helpers import make_token


def test_token_score_one_hot():
    assert token_score(1.0, 1.0) == 1.0


def test_token_score_uniform_two():
    assert token_score(0.5, 2.0) == pytest.approx(2.6931471805599454, abs=1e-4)


def test_token_score_uniform_four():
    assert token_score(0.25, 4.0) == pytest.approx(5.386294361119891, abs=1e-4)


@pytest.mark.parametrize("prob", [0.0, -0.1, 1.5])
def test_token_score_rejects_bad_probability(prob):
    with pytest.raises(ValueError):
        token_score(prob, 2.0)


def test_token_score_rejects_entropy_below_one():
    with pytest.raises(ValueError):
        token_score(0.5, 0.5)


@given(
    st.floats(min_value=1e-9, max_value=1.0, exclude_min=True),
    st.floats(min_value=1e-9, max_value=1.0, exclude_min=True),
    st.floats(min_value=1.0, max_value=100.0),
)
def test_token_score_strictly_decreasing_in_prob(p1, p2, entropy):
    if math.isclose(p1, p2, rel_tol=1e-9):
        return
    lo, hi = sorted((p1, p2))
    assert token_score(lo, entropy) > token_score(hi, entropy)


@given(
    st.floats(min_value=1e-6, max_value=1.0),
    st.floats(min_value=1.0, max_value=100.0),
    st.floats(min_value=1.0, max_value=100.0),
)
def test_token_score_strictly_increasing_in_entropy(prob, e1, e2):
    if math.isclose(e1, e2, rel_tol=1e-9):
        return
    lo, hi = sorted((e1, e2))
    assert token_score(prob, lo) < token_score(prob, hi)


def _tokens(spec):
    """spec: list of (keyword_class, is_tag) pairs in one sentence."""
    return [
        make_token(i, f"t{i}", keyword_class=kc, is_tag=tag)
        for i, (kc, tag) in enumerate(spec)
    ]


def test_sentence_score_keyword_mean():
    tokens = _tokens([("noun", False), ("none", False), ("noun", False)])
    assert sentence_score([2.0, 4.0, 6.0], tokens, 0) == 4.0


def test_sentence_score_zero_keyword_fallback():
    tokens = _tokens([("none", False), ("none", False)])
    assert sentence_score([3.0, 5.0], tokens, 0) == 4.0


def test_sentence_score_single_keyword_identity():
    tokens = _tokens([("entity", False)])
    assert sentence_score([7.25], tokens, 0) == 7.25


def test_sentence_score_excludes_tags_everywhere():
    tokens = _tokens([("none", True), ("noun", False), ("none", True)])
    # tag scores must not leak into the mean
    assert sentence_score([100.0, 2.0, 100.0], tokens, 0) == 2.0
    tokens = _tokens([("none", True), ("none", False)])
    assert sentence_score([100.0, 2.0], tokens, 0) == 2.0


def test_sentence_score_only_tags_is_error():
    tokens = _tokens([("none", True)])
    with pytest.raises(ValueError, match="no non-tag tokens"):
        sentence_score([1.0], tokens, 0)


def test_sentence_score_missing_sentence_is_error():
    tokens = _tokens([("noun", False)])
    with pytest.raises(ValueError, match="has no tokens"):
        sentence_score([1.0], tokens, 3)


def test_sentence_score_unweighted_mode_counts_every_non_tag_token():
    tokens = _tokens([("noun", False), ("none", False), ("none", True)])
    assert sentence_score([2.0, 4.0, 9.0], tokens, 0, keyword_weighted=False) == 3.0


def test_passage_score_keyword_mean_across_sentences():
    tokens = [
        make_token(0, "a", keyword_class="noun", sentence_index=0),
        make_token(1, "b", sentence_index=0),
        make_token(2, "c", keyword_class="entity", sentence_index=1),
    ]
    assert passage_score([1.0, 50.0, 3.0], tokens) == 2.0


def test_passage_score_all_keywords():
    tokens = _tokens([("noun", False)] * 4)
    assert passage_score([1.0, 2.0, 3.0, 4.0], tokens) == 2.5


def test_passage_score_fallback():
    tokens = _tokens([("none", False), ("none", False)])
    assert passage_score([2.0, 4.0], tokens) == 3.0


def test_passage_score_empty_is_error():
    with pytest.raises(ValueError, match="empty passage"):
        passage_score([], [])


@given(st.lists(st.floats(min_value=0.0, max_value=50.0), min_size=3, max_size=10), st.randoms())
def test_aggregates_ignore_non_keyword_permutations(nonkw_scores, rnd):
    tokens = [make_token(0, "kw", keyword_class="noun")] + [
        make_token(i + 1, f"n{i}") for i in range(len(nonkw_scores))
    ]
    scores = [5.0] + list(nonkw_scores)
    base_sentence = sentence_score(scores, tokens, 0)
    base_passage = passage_score(scores, tokens)
    shuffled = list(nonkw_scores)
    rnd.shuffle(shuffled)
    scores2 = [5.0] + shuffled
    assert sentence_score(scores2, tokens, 0) == base_sentence
    assert passage_score(scores2, tokens) == base_passage


@given(st.lists(st.floats(min_value=0.1, max_value=50.0), min_size=2, max_size=12))
def test_passage_score_bounded_by_contributing_scores(scores):
    rng = random.Random(42)
    tokens = [
        make_token(i, f"t{i}", keyword_class=rng.choice(["noun", "none"]))
        for i in range(len(scores))
    ]
    value = passage_score(scores, tokens)
    contributing = [s for s, t in zip(scores, tokens) if t.is_keyword] or list(scores)
    assert min(contributing) - 1e-12 <= value <= max(contributing) + 1e-12
