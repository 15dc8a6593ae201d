"""Extractor command line: `extract` and `countdf` subcommands."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .countdf import count_doc_freq, write_counts
from .extract import DEFAULT_TOP_K_CAP, ExtractionJob, extract_trace, write_trace
from .model import BUILTIN_PREFIX, ExtractionError


def _cmd_extract(args: argparse.Namespace) -> int:
    passage = Path(args.passage_file).read_text(encoding="utf-8").strip()
    job = ExtractionJob(
        concept=args.concept,
        passage=passage,
        variant=args.variant,
        model_id=args.model,
        top_k=args.top_k,
        passage_id=args.id,
    )
    try:
        trace = extract_trace(job)
    except ExtractionError as exc:
        # mirrors the over-length exclusion policy: report and skip
        print(f"skipped: {exc}", file=sys.stderr)
        return 0
    path = write_trace(trace, Path(args.out))
    print(path)
    return 0


def _cmd_countdf(args: argparse.Namespace) -> int:
    counts = count_doc_freq(Path(args.corpus), args.sample)
    path = write_counts(counts, Path(args.out))
    print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="halo-extractor", description="Trace extraction for the halo engine")
    subs = parser.add_subparsers(dest="command", required=True)

    extract = subs.add_parser("extract", help="extract one passage trace")
    extract.add_argument("--model", default=BUILTIN_PREFIX, help="model id or tiny-random-gpt2[:seed=N]")
    extract.add_argument("--concept", required=True, help="topic the passage is about")
    extract.add_argument("--passage-file", required=True)
    extract.add_argument("--variant", choices=("plain", "typed"), required=True)
    extract.add_argument("--out", required=True, help="output directory (file named <passage_id>.json)")
    extract.add_argument("--id", help="override the passage_id (default: slug of the concept)")
    extract.add_argument("--top-k", type=int, default=DEFAULT_TOP_K_CAP, help="candidate-list cap")
    extract.set_defaults(func=_cmd_extract)

    countdf = subs.add_parser("countdf", help="count per-token document frequencies")
    countdf.add_argument("--corpus", required=True, help="directory of text documents")
    countdf.add_argument("--sample", type=int, help="use only the first N documents")
    countdf.add_argument("--out", required=True)
    countdf.set_defaults(func=_cmd_countdf)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
