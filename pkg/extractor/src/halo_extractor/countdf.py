"""Document-frequency counting over a text corpus, word-level tokenizer."""

from __future__ import annotations

import json
from collections import Counter
from pathlib import Path

from .tagging import word_tokens


def count_doc_freq(corpus_dir: Path, sample: int | None = None) -> dict:
    """Count, per token, how many sampled documents contain it."""
    files = sorted(p for p in Path(corpus_dir).iterdir() if p.is_file())
    if sample is not None:
        files = files[:sample]
    if not files:
        raise ValueError(f"{corpus_dir}: no corpus documents found")
    doc_freq: Counter[str] = Counter()
    for path in files:
        text = path.read_text(encoding="utf-8", errors="replace")
        doc_freq.update({token for token, _, _ in word_tokens(text)})
    return {
        "num_docs": len(files),
        "doc_freq": {token: doc_freq[token] for token in sorted(doc_freq)},
    }


def write_counts(counts: dict, out_path: Path) -> Path:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(json.dumps(counts, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")
    return out_path
