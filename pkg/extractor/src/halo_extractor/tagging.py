"""Deterministic keyword tagging: named entities (18 standard labels) + nouns.

A compact rule/gazetteer tagger. It is intentionally heuristic; its outputs
are frozen as fixtures and consumed downstream as-is. Sentence boundaries are
decided here too, so traces never need re-segmentation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

ENTITY_TYPES = (
    "PERSON", "NORP", "FAC", "ORG", "GPE", "LOC", "PRODUCT", "EVENT",
    "WORK_OF_ART", "LAW", "LANGUAGE", "DATE", "TIME", "PERCENT", "MONEY",
    "QUANTITY", "ORDINAL", "CARDINAL",
)

TOKEN_RE = re.compile(r"<[A-Z_]+>|\w+|[^\w\s]")
YEAR_RE = re.compile(r"^(1[4-9]\d\d|20\d\d|2100)$")
TIME_RE = re.compile(r"^\d{1,2}:\d{2}$")
ORDINAL_RE = re.compile(r"^\d+(st|nd|rd|th)$")
SENTENCE_END = {".", "!", "?"}

STOPWORDS = frozenset(
    """the a an and or but if as at by for from in into of on to with was were is are be been
    being has have had do does did he she it they we you i this that these those his her its
    their our your my who whom which when where what why how also not no nor so than then there
    here since until after before during while over under between about against up down out off
    again once more most other some such only own same too very can will just should now new
    both each few all any most""".split()
)

PERSON_NAMES = frozenset(
    """michael paul john mary james david sarah emma tommy elton robert william richard thomas
    charles joseph daniel matthew anthony mark steven andrew kevin brian george edward ronald
    timothy jason jeffrey ryan jacob nicholas eric jonathan stephen larry justin scott brandon
    frank gregory raymond samuel patrick alexander jack dennis jerry amara ravi tilda rex
    caquatto mackenzie savage replogle nutter""".split()
)

GPE_WORDS = frozenset(
    """london paris england america india oslo france germany japan china washington california
    berkeley hawaii states united kingdom russia brazil canada australia texas york delhi
    mumbai""".split()
)

ORG_WORDS = frozenset(
    """wikipedia university institute college network networks corporation administration
    ministry parliament congress senate nations committee association federation union agency
    bureau""".split()
)

NORP_WORDS = frozenset(
    """american british indian french german chinese japanese russian italian spanish canadian
    australian brazilian korean mexican dutch swedish norwegian""".split()
)

EVENT_WORDS = frozenset("olympics olympiad war championship festival".split())

MONTHS_AND_DAYS = frozenset(
    """january february march april may june july august september october november december
    monday tuesday wednesday thursday friday saturday sunday summer winter spring autumn""".split()
)

ORDINAL_WORDS = frozenset(
    "first second third fourth fifth sixth seventh eighth ninth tenth".split()
)

NOUN_SUFFIXES = ("tion", "sion", "ment", "ness", "ship", "hood", "ance", "ence", "ism", "ity", "ogy")

NOUN_WORDS = frozenset(
    """band singer songwriter musician guitarist keyboardist drummer gymnast athlete author
    writer poet host radio show album song record producer passage topic career age school
    team club city town country state year month day time life world man woman child people
    person family father mother son daughter brother sister friend work job role part film
    movie series book novel story prize award medal title game match bars beam floor vault
    routine competition tour concert stage member leader founder director president professor
    student teacher doctor lawyer politician artist painter actor actress dancer player coach
    manager owner business group staff crew audience fan supporter critic judge jury panel
    board council government party election campaign battle army navy soldier officer police
    court law rule policy plan project program system method way kind type form style design
    idea concept theory fact truth question answer problem solution result effect cause reason
    purpose goal aim target level degree grade rank position place area region zone district
    street road bridge building house home office store shop market bank hospital church
    temple museum library park garden field farm forest river lake sea ocean mountain hill
    valley island beach coast border land ground wall door window roof room kitchen hall
    guitar piano violin drums bass uneven balance talk station listener audience nutrition
    medicine botany anthropology commentator activist nutritionist fighter delegation
    environmentalist planner transport transportation tailor fashion denim suit suits shop
    apprentice designer pattern patterns color colors movement movements complication""".split()
)


@dataclass(frozen=True, slots=True)
class WordTag:
    """One word-level token of a passage with its keyword annotation."""

    text: str
    start: int
    end: int
    sentence_index: int
    keyword_class: str  # entity | noun | none
    entity_type: str | None
    starts_entity_span: bool


def word_tokens(text: str) -> list[tuple[str, int, int]]:
    """Word-level tokens with character offsets; tag tokens stay whole."""
    return [(m.group(), m.start(), m.end()) for m in TOKEN_RE.finditer(text)]


def _entity_type_for(token: str, lower: str, sentence_initial: bool, next_token: str | None) -> str | None:
    if YEAR_RE.match(token):
        return "DATE"
    if TIME_RE.match(token):
        return "TIME"
    if ORDINAL_RE.match(lower) or lower in ORDINAL_WORDS:
        return "ORDINAL"
    if token.isdigit():
        return "CARDINAL"
    if lower in MONTHS_AND_DAYS:
        return "DATE"
    if lower in NORP_WORDS:
        return "NORP"
    if lower in GPE_WORDS:
        return "GPE"
    if lower in EVENT_WORDS:
        return "EVENT"
    if token[0].isupper() and lower not in STOPWORDS:
        if lower in ORG_WORDS:
            return "ORG"
        if lower in PERSON_NAMES:
            return "PERSON"
        if not sentence_initial:
            # capitalized mid-sentence tokens default to PERSON; at sentence
            # start only gazetteer hits count, so ordinary capitalized words
            # ("Born", "However") stay out of the entity set
            return "PERSON"
        if next_token is not None and next_token[0].isupper() and next_token.lower() not in STOPWORDS:
            # sentence-initial capitalized word running into another
            # capitalized word reads as a name start ("Mara Voss was ...")
            return "PERSON"
        return None
    if lower in PERSON_NAMES:
        # lowercase given names (concept strings are lowercased upstream)
        return "PERSON"
    return None


def _is_noun(lower: str) -> bool:
    if lower in NOUN_WORDS:
        return True
    return len(lower) > 5 and lower.endswith(NOUN_SUFFIXES)


def annotate_keywords(text: str) -> list[WordTag]:
    """Tag every word token as entity (with type), noun, or none."""
    tokens = word_tokens(text)
    tags: list[WordTag] = []
    sentence = 0
    sentence_initial = True
    prev_type: str | None = None
    for pos, (token, start, end) in enumerate(tokens):
        lower = token.lower()
        if not token[0].isalnum():
            tags.append(WordTag(token, start, end, sentence, "none", None, False))
            prev_type = None
            if token in SENTENCE_END and tags and any(t.text[0].isalnum() for t in tags if t.sentence_index == sentence):
                sentence += 1
                sentence_initial = True
            continue

        next_token = tokens[pos + 1][0] if pos + 1 < len(tokens) else None
        entity_type = _entity_type_for(token, lower, sentence_initial, next_token)
        if entity_type is not None:
            starts = entity_type != prev_type
            tags.append(WordTag(token, start, end, sentence, "entity", entity_type, starts))
            prev_type = entity_type
        elif _is_noun(lower):
            tags.append(WordTag(token, start, end, sentence, "noun", None, False))
            prev_type = None
        else:
            tags.append(WordTag(token, start, end, sentence, "none", None, False))
            prev_type = None
        sentence_initial = False
    return tags


def concept_entity_type(concept: str) -> str:
    """Best-guess entity type for a prompt concept; defaults to PERSON."""
    for tag in annotate_keywords(concept):
        if tag.keyword_class == "entity" and tag.entity_type:
            return tag.entity_type
    return "PERSON"


def build_typed_tokens(tags: list[WordTag]) -> list[tuple[str, int, str, str | None, bool]]:
    """Token stream with "<TYPE>" markers inserted before each entity span.

    Returns (text, sentence_index, keyword_class, entity_type, is_tag) tuples.
    Inserted markers carry keyword_class "none" and never participate in
    scoring or propagation downstream.
    """
    out: list[tuple[str, int, str, str | None, bool]] = []
    for tag in tags:
        if tag.keyword_class == "entity" and tag.starts_entity_span:
            out.append((f"<{tag.entity_type}>", tag.sentence_index, "none", None, True))
        out.append((tag.text, tag.sentence_index, tag.keyword_class, tag.entity_type, False))
    return out


def build_typed_text(text: str) -> str:
    """Typed-variant surface string: "<TYPE> " inserted before entity spans."""
    tags = annotate_keywords(text)
    pieces: list[str] = []
    cursor = 0
    for tag in tags:
        pieces.append(text[cursor : tag.start])
        if tag.keyword_class == "entity" and tag.starts_entity_span:
            pieces.append(f"<{tag.entity_type}> ")
        pieces.append(text[tag.start : tag.end])
        cursor = tag.end
    pieces.append(text[cursor:])
    return "".join(pieces)
