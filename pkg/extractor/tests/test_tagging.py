from __future__ import annotations

from halo_extractor.tagging import (
    ENTITY_TYPES,
    annotate_keywords,
    build_typed_text,
    build_typed_tokens,
    concept_entity_type,
)


def by_text(text):
    return {t.text: t for t in annotate_keywords(text)}


def test_person_and_date():
    tags = by_text("Caquatto was born in 1992")
    assert tags["Caquatto"].keyword_class == "entity"
    assert tags["Caquatto"].entity_type == "PERSON"
    assert tags["1992"].keyword_class == "entity"
    assert tags["1992"].entity_type == "DATE"
    assert tags["born"].keyword_class == "none"


def test_noun_and_entity():
    tags = by_text("the band Winger")
    assert tags["the"].keyword_class == "none"
    assert tags["band"].keyword_class == "noun"
    assert tags["Winger"].keyword_class == "entity"


def test_no_keywords_at_all():
    assert all(t.keyword_class == "none" for t in annotate_keywords("it is very much so"))


def test_entity_types_are_standard_labels():
    text = "Michael Savage hosted The Savage Nation on 400 stations in the United States until 2012."
    for tag in annotate_keywords(text):
        if tag.keyword_class == "entity":
            assert tag.entity_type in ENTITY_TYPES


def test_adjacent_same_type_words_form_one_span():
    tags = annotate_keywords("Mackenzie Caquatto is an American former artistic gymnast")
    starts = [t.text for t in tags if t.keyword_class == "entity" and t.starts_entity_span]
    assert "Mackenzie" in starts
    assert "Caquatto" not in starts  # continues the PERSON span
    assert by_text("Mackenzie Caquatto is an American former artistic gymnast")["gymnast"].keyword_class == "noun"


def test_sentence_initial_name_with_lookahead():
    tags = by_text("Mara Voss was a painter.")
    assert tags["Mara"].entity_type == "PERSON"
    assert tags["Voss"].entity_type == "PERSON"


def test_sentence_segmentation():
    tags = annotate_keywords("Rex plays guitar. He joined Winger in 1988.")
    assert tags[0].sentence_index == 0
    assert [t.sentence_index for t in tags if t.text == "He"] == [1]
    assert max(t.sentence_index for t in tags) == 1


def test_typed_text_inserts_tags():
    assert build_typed_text("born in 1992") == "born in <DATE> 1992"


def test_typed_text_no_entities_unchanged():
    text = "it is very much so"
    assert build_typed_text(text) == text


def test_typed_tokens_flag_tags():
    stream = build_typed_tokens(annotate_keywords("born in 1992"))
    assert [(text, is_tag) for text, _, _, _, is_tag in stream] == [
        ("born", False),
        ("in", False),
        ("<DATE>", True),
        ("1992", False),
    ]


def test_concept_type_defaults_to_person():
    assert concept_entity_type("michael savage") == "PERSON"
    assert concept_entity_type("zzkrqv blorp") == "PERSON"
