#!/usr/bin/env python3
"""Generate the shipped fixture set: traces (plain + typed), annotations,
IDF table, document-frequency counts, and the small single-passage trace.

Deterministic (seeded by string keys); run from the repository root:

    python3 scripts/make_fixtures.py

Regenerating overwrites fixtures/ in place. The golden outputs are produced
separately by scripts/golden_reference.py.
"""

from __future__ import annotations

import json
import math
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"

POOLING = "max-layers-heads"
MODEL_ID = "fixture-lm-1"
TOP_K = 8
NUM_DOCS = 1000

# Shared vocabulary: every passage word plus distractors and tag tokens.
VOCAB = [
    "Amara", "Cole", "is", "a", "singer", ".", "She", "was", "born", "in", "1994",
    "Ravi", "Mehta", "won", "the", "award", "2011", "He", "led", "band", "Winger",
    "Tilda", "Bren", "writer", "from", "Oslo", "prize", "2005", "again",
    "Rex", "Fenn", "plays", "guitar", "back", "1988", "joined",
    "West", "Coral", "1992", "2012", "London", "teacher", "drummer", "of", "at",
    "and", "new", "first",
    "<PERSON>", "<DATE>", "<GPE>", "<ORG>",
]

# Each token: (text, sentence_index, keyword_class, entity_type, starts_entity_span)
PASSAGES = {
    "amara-cole": [
        ("Amara", 0, "entity", "PERSON", True),
        ("Cole", 0, "entity", "PERSON", False),
        ("is", 0, "none", None, False),
        ("a", 0, "none", None, False),
        ("singer", 0, "noun", None, False),
        (".", 0, "none", None, False),
        ("She", 1, "none", None, False),
        ("was", 1, "none", None, False),
        ("born", 1, "none", None, False),
        ("in", 1, "none", None, False),
        ("1994", 1, "entity", "DATE", True),
        (".", 1, "none", None, False),
    ],
    "ravi-mehta": [
        ("Ravi", 0, "entity", "PERSON", True),
        ("Mehta", 0, "entity", "PERSON", False),
        ("won", 0, "none", None, False),
        ("the", 0, "none", None, False),
        ("award", 0, "noun", None, False),
        ("in", 0, "none", None, False),
        ("2011", 0, "entity", "DATE", True),
        (".", 0, "none", None, False),
        ("He", 1, "none", None, False),
        ("led", 1, "none", None, False),
        ("the", 1, "none", None, False),
        ("band", 1, "noun", None, False),
        ("Winger", 1, "entity", "ORG", True),
        ("in", 1, "none", None, False),
        ("2011", 1, "entity", "DATE", True),
        (".", 1, "none", None, False),
    ],
    "tilda-bren": [
        ("Tilda", 0, "entity", "PERSON", True),
        ("Bren", 0, "entity", "PERSON", False),
        ("was", 0, "none", None, False),
        ("a", 0, "none", None, False),
        ("writer", 0, "noun", None, False),
        ("from", 0, "none", None, False),
        ("Oslo", 0, "entity", "GPE", True),
        (".", 0, "none", None, False),
        ("She", 1, "none", None, False),
        ("won", 1, "none", None, False),
        ("the", 1, "none", None, False),
        ("prize", 1, "noun", None, False),
        ("in", 1, "none", None, False),
        ("2005", 1, "entity", "DATE", True),
        (".", 1, "none", None, False),
        ("She", 2, "none", None, False),
        ("won", 2, "none", None, False),
        ("the", 2, "none", None, False),
        ("prize", 2, "noun", None, False),
        ("in", 2, "none", None, False),
        ("2005", 2, "entity", "DATE", True),
        ("again", 2, "none", None, False),
        (".", 2, "none", None, False),
    ],
    "minitrace": [
        ("Rex", 0, "entity", "PERSON", True),
        ("Fenn", 0, "entity", "PERSON", False),
        ("plays", 0, "none", None, False),
        ("guitar", 0, "noun", None, False),
        (".", 0, "none", None, False),
        ("He", 1, "none", None, False),
        ("joined", 1, "none", None, False),
        ("Winger", 1, "entity", "ORG", True),
        ("back", 1, "none", None, False),
        ("in", 1, "none", None, False),
        ("1988", 1, "entity", "DATE", True),
        (".", 1, "none", None, False),
    ],
}

ANNOTATIONS = {
    "amara-cole": ["accurate", "minor_inaccurate"],
    "ravi-mehta": ["major_inaccurate", "major_inaccurate"],
    "tilda-bren": ["accurate", "major_inaccurate", "minor_inaccurate"],
}

PLAIN_PROMPT = "This is a passage from Wikipedia about {concept}:"
TYPED_PROMPT = (
    "Please complete the passage below using appropriate words that follow to "
    "the given type with < > wrapped. This is a passage from <ORG> Wikipedia "
    "about <PERSON> {concept}:"
)


def distribution(rng: random.Random, realized: str, boost: float) -> list[float]:
    weights = [math.exp(rng.gauss(0.0, 1.6)) for _ in VOCAB]
    weights[VOCAB.index(realized)] *= boost
    total = sum(weights)
    return [w / total for w in weights]


def token_record(index, text, sentence_index, keyword_class, entity_type, is_tag, rng, boost):
    probs = distribution(rng, text, boost)
    realized = VOCAB.index(text)
    order = sorted(range(len(VOCAB)), key=lambda v: -probs[v])
    top = order[:TOP_K]
    if realized not in top:
        top[-1] = realized
        top.sort(key=lambda v: -probs[v])
    candidates = [[VOCAB[v], probs[v]] for v in top]
    record = {
        "index": index,
        "text": text,
        "sentence_index": sentence_index,
        "logprob": math.log(probs[realized]),
        "entropy_term": 2.0 ** -sum(p * math.log2(p) for p in probs if p > 0),
        "is_keyword": keyword_class in ("entity", "noun"),
        "keyword_class": keyword_class,
        "is_tag": is_tag,
        "candidates": candidates,
        "tail_mass": 1.0 - sum(p for _, p in candidates),
    }
    if entity_type is not None:
        record["entity_type"] = entity_type
    return record


def attention_rows(tokens, rng: random.Random):
    rows = []
    keywords = [t for t in tokens if t["is_keyword"] and not t["is_tag"]]
    for pos, tok in enumerate(keywords):
        if pos == 0:
            continue
        weights = []
        for prev in keywords[:pos]:
            # repeated surface forms attend hard to their first occurrence
            if prev["text"] == tok["text"]:
                att = rng.uniform(0.85, 0.95)
            else:
                att = rng.uniform(0.05, 0.45)
            weights.append([prev["index"], att])
        rows.append({"i": tok["index"], "weights": weights})
    return rows


def build_trace(passage_id: str, variant: str) -> dict:
    words = PASSAGES[passage_id]
    concept = passage_id.replace("-", " ")
    tokens = []
    index = 0
    for text, sentence, keyword_class, entity_type, starts_span in words:
        rng = random.Random(f"{passage_id}/{variant}/{index}/{text}")
        if variant == "typed" and starts_span and keyword_class == "entity":
            tokens.append(
                token_record(index, f"<{entity_type}>", sentence, "none", None, True, rng, boost=30.0)
            )
            index += 1
            rng = random.Random(f"{passage_id}/{variant}/{index}/{text}")
        # typed conditioning sharpens entity tokens; repeated text is
        # overconfident in both variants
        boost = 9.0
        if variant == "typed" and keyword_class == "entity":
            boost = 25.0
        if any(prev["text"] == text and prev["is_keyword"] for prev in tokens):
            boost = 60.0
        tokens.append(token_record(index, text, sentence, keyword_class, entity_type, False, rng, boost))
        index += 1
    return {
        "schema_version": 1,
        "passage_id": passage_id,
        "variant": variant,
        "prompt": (PLAIN_PROMPT if variant == "plain" else TYPED_PROMPT).format(concept=concept),
        "model_id": MODEL_ID,
        "tokens": tokens,
        "attention": {
            "pooling": POOLING,
            "rows": attention_rows(tokens, random.Random(f"{passage_id}/{variant}/attention")),
        },
    }


def build_counts() -> dict:
    rng = random.Random("doc-frequencies")
    doc_freq = {}
    for word in sorted(VOCAB):
        if word in {"the", "a", "is", "."}:
            doc_freq[word] = NUM_DOCS  # idf exactly zero
        elif word.startswith("<"):
            doc_freq[word] = 900
        else:
            doc_freq[word] = rng.randint(2, 700)
    return {"num_docs": NUM_DOCS, "doc_freq": doc_freq}


def dump(path: Path, doc) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")
    print(f"wrote {path.relative_to(ROOT)}")


def main() -> None:
    for pid in ("amara-cole", "ravi-mehta", "tilda-bren"):
        for variant in ("plain", "typed"):
            dump(FIXTURES / "traces" / variant / f"{pid}.json", build_trace(pid, variant))
    dump(FIXTURES / "minitrace.json", build_trace("minitrace", "plain"))
    dump(FIXTURES / "annotations.json", {"passages": ANNOTATIONS})
    counts = build_counts()
    dump(FIXTURES / "counts.json", counts)
    dump(
        FIXTURES / "idf.json",
        {"num_docs": counts["num_docs"], "default_df": 1, "doc_freq": counts["doc_freq"]},
    )


if __name__ == "__main__":
    main()
