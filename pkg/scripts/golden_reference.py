#!/usr/bin/env python3
"""Produce the frozen golden outputs for the shipped fixtures.

A deliberately plain, loop-by-loop implementation written straight from the
scoring definitions, independent of the package (no halo imports). Run from
the repository root after make_fixtures.py:

    python3 scripts/golden_reference.py

Outputs land in fixtures/golden/.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"
GOLDEN = FIXTURES / "golden"

GAMMA = 0.9
RHO = 0.01
IDF_FLOOR_RATIO = 1e-9

LADDER = [
    ("avg(h)", dict(use_keywords=False, use_penalty=False, use_type=False, use_idf=False), "plain"),
    ("+keyword", dict(use_keywords=True, use_penalty=False, use_type=False, use_idf=False), "plain"),
    ("+penalty", dict(use_keywords=True, use_penalty=True, use_type=False, use_idf=False), "plain"),
    ("+entity type", dict(use_keywords=True, use_penalty=True, use_type=True, use_idf=False), "typed"),
    ("+token idf", dict(use_keywords=True, use_penalty=True, use_type=True, use_idf=True), "typed"),
]

SEVERITY = {"accurate": 0.0, "minor_inaccurate": 0.5, "major_inaccurate": 1.0}


def config_dict(gamma, rho, use_keywords, use_penalty, use_type, use_idf):
    flags = "".join(
        name if on else "-"
        for name, on in zip("kpti", (use_keywords, use_penalty, use_type, use_idf))
    )
    return {
        "gamma": gamma,
        "rho": rho,
        "use_keywords": use_keywords,
        "use_penalty": use_penalty,
        "use_type": use_type,
        "use_idf": use_idf,
        "fingerprint": f"gamma={gamma!r};rho={rho!r};features={flags}",
    }


def idf_lookup(idf, token):
    df = idf["doc_freq"].get(token, idf["default_df"])
    return math.log(idf["num_docs"] / df)


def token_inputs(tok, cfg, idf):
    if not cfg["use_type"] and not cfg["use_idf"]:
        return math.exp(tok["logprob"]), tok["entropy_term"]
    kept = [(t, p) for t, p in tok["candidates"] if p > cfg["rho"] or t == tok["text"]]
    total = sum(p for _, p in kept)
    dist = [(t, p / total) for t, p in kept]
    if cfg["use_idf"]:
        idfs = [idf_lookup(idf, t) for t, _ in dist]
        if max(idfs) != min(idfs):
            floor = IDF_FLOOR_RATIO * max(idfs)
            weights = [p * max(v, floor) for (_, p), v in zip(dist, idfs)]
            wsum = sum(weights)
            dist = [(t, w / wsum) for (t, _), w in zip(dist, weights)]
    realized = next(p for t, p in dist if t == tok["text"])
    entropy = 2.0 ** -sum(p * math.log2(p) for _, p in dist if p > 0)
    return realized, entropy


def apply_penalties(h, tokens, rows, gamma):
    h_hat = list(h)
    penalties = [0.0] * len(h)
    by_i = {row["i"]: row["weights"] for row in rows}
    for i, tok in enumerate(tokens):
        if not tok["is_keyword"] or tok["is_tag"]:
            continue
        weights = by_i.get(i, [])
        total = sum(att for _, att in weights)
        if total <= 0:
            continue
        penalty = sum((att / total) * h_hat[j] for j, att in weights)
        penalties[i] = penalty
        h_hat[i] = h[i] + gamma * penalty
    return h_hat, penalties


def mean_over(scores, tokens, members, keyword_weighted):
    non_tag = [k for k in members if not tokens[k]["is_tag"]]
    keywords = [k for k in non_tag if tokens[k]["is_keyword"]]
    chosen = keywords if (keyword_weighted and keywords) else non_tag
    return sum(scores[k] for k in chosen) / len(chosen)


def score_passage(trace, cfg, idf):
    tokens = trace["tokens"]
    h = []
    for tok in tokens:
        prob, entropy = token_inputs(tok, cfg, idf)
        h.append(-math.log(prob) + entropy)
    if cfg["use_penalty"]:
        h_hat, penalties = apply_penalties(h, tokens, trace["attention"]["rows"], cfg["gamma"])
    else:
        h_hat, penalties = list(h), [0.0] * len(h)
    num_sentences = max(t["sentence_index"] for t in tokens) + 1
    sentences = [
        mean_over(h_hat, tokens, [k for k, t in enumerate(tokens) if t["sentence_index"] == s], cfg["use_keywords"])
        for s in range(num_sentences)
    ]
    passage = mean_over(h_hat, tokens, range(len(tokens)), cfg["use_keywords"])
    return h, h_hat, penalties, sentences, passage


def average_precision(scores, labels):
    num_pos = sum(labels)
    ap = 0.0
    prev_recall = 0.0
    for threshold in sorted(set(scores), reverse=True):
        tp = sum(1 for s, l in zip(scores, labels) if s >= threshold and l == 1)
        pp = sum(1 for s in scores if s >= threshold)
        recall = tp / num_pos
        ap += (recall - prev_recall) * (tp / pp)
        prev_recall = recall
    return ap


def pearson(x, y):
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    num = sum((a - mx) * (b - my) for a, b in zip(x, y))
    den = math.sqrt(sum((a - mx) ** 2 for a in x) * sum((b - my) ** 2 for b in y))
    return num / den


def ranks(values):
    order = sorted(range(len(values)), key=lambda k: values[k])
    out = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        for k in range(i, j + 1):
            out[order[k]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return out


def evaluate(annotations, sentence_scores, passage_scores):
    ids = sorted(annotations)
    nf_scores, nf_labels = [], []
    star_scores, star_labels = [], []
    fact_scores, fact_labels = [], []
    for pid in ids:
        labels = annotations[pid]
        all_major = all(label == "major_inaccurate" for label in labels)
        for label, score in zip(labels, sentence_scores[pid]):
            nf_scores.append(score)
            nf_labels.append(int(label != "accurate"))
            fact_scores.append(-score)
            fact_labels.append(int(label == "accurate"))
            if not all_major:
                star_scores.append(score)
                star_labels.append(int(label == "major_inaccurate"))
    gold = [sum(SEVERITY[l] for l in annotations[pid]) / len(annotations[pid]) for pid in ids]
    predicted = [passage_scores[pid] for pid in ids]
    return {
        "nonfactual_ap": average_precision(nf_scores, nf_labels),
        "nonfactual_star_ap": average_precision(star_scores, star_labels),
        "factual_ap": average_precision(fact_scores, fact_labels),
        "pearson": pearson(predicted, gold),
        "spearman": pearson(ranks(predicted), ranks(gold)),
    }


def round9(value):
    if isinstance(value, float):
        return round(value, 9)
    if isinstance(value, list):
        return [round9(v) for v in value]
    if isinstance(value, dict):
        return {k: round9(v) for k, v in value.items()}
    return value


def dump(path, doc):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")
    print(f"wrote {path.relative_to(ROOT)}")


def main():
    idf = json.loads((FIXTURES / "idf.json").read_text())
    annotations = json.loads((FIXTURES / "annotations.json").read_text())["passages"]
    traces = {
        variant: {
            pid: json.loads((FIXTURES / "traces" / variant / f"{pid}.json").read_text())
            for pid in annotations
        }
        for variant in ("plain", "typed")
    }

    golden_configs = {
        "plain": config_dict(GAMMA, RHO, True, True, False, False),
        "typed": config_dict(GAMMA, RHO, True, True, True, True),
    }
    for variant, cfg in golden_configs.items():
        for pid, trace in traces[variant].items():
            h, h_hat, penalties, sentences, passage = score_passage(trace, cfg, idf)
            doc = {
                "passage_id": pid,
                "config": cfg,
                "tokens": [
                    {"index": k, "h": round9(h[k]), "h_hat": round9(h_hat[k]), "penalty": round9(penalties[k])}
                    for k in range(len(h))
                ],
                "sentence_scores": round9(sentences),
                "passage_score": round9(passage),
            }
            dump(GOLDEN / f"scores_{variant}_{pid}.json", doc)

    rows = []
    for label, toggles, variant in LADDER:
        cfg = config_dict(GAMMA, RHO, toggles["use_keywords"], toggles["use_penalty"], toggles["use_type"], toggles["use_idf"])
        sentence_scores = {}
        passage_scores = {}
        for pid, trace in traces[variant].items():
            _, _, _, sentences, passage = score_passage(trace, cfg, idf)
            sentence_scores[pid] = sentences
            passage_scores[pid] = passage
        rows.append(
            {
                "label": label,
                "variant": variant,
                "config": cfg,
                "metrics": round9(evaluate(annotations, sentence_scores, passage_scores)),
            }
        )
    dump(GOLDEN / "ablation.json", {"gamma": GAMMA, "rho": RHO, "rows": rows})


if __name__ == "__main__":
    main()
