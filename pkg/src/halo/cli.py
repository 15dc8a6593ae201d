"""Command-line interface: score, evaluate, ablate, idf-build, validate.

Exit codes: 0 ok, 1 validation/config error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import DEFAULT_GAMMA, DEFAULT_RHO, FEATURES, ConfigError, PipelineConfig
from .harness import (
    EvaluationError,
    evaluation_to_dict,
    evaluation_to_markdown,
    compute_metrics,
    report_to_dict,
    report_to_markdown,
    run_ablation,
    run_pipeline,
)
from .metrics import MetricUndefinedError
from .scoring import serialize_score_set
from .trace import (
    AnnotationFormatError,
    IdfFormatError,
    IdfTable,
    PassageTrace,
    TraceFormatError,
    parse_annotations,
    parse_idf,
    parse_trace,
    serialize_idf,
    build_idf_table,
    validate_trace,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2


class ValidationFailure(ValueError):
    """A parsed trace violated its invariants."""


def _read(path: Path) -> bytes:
    return Path(path).read_bytes()


def _load_trace(path: Path, check: bool = True) -> PassageTrace:
    trace = parse_trace(_read(path))
    if check:
        violations = validate_trace(trace)
        if violations:
            listing = "\n".join(f"  {v}" for v in violations)
            raise ValidationFailure(f"{path}: invalid trace:\n{listing}")
    return trace


def _load_trace_dir(dir_path: Path) -> tuple[dict[str, PassageTrace], dict[str, Path]]:
    paths = sorted(Path(dir_path).glob("*.json"))
    if not paths:
        raise ValidationFailure(f"{dir_path}: no trace files (*.json) found")
    traces: dict[str, PassageTrace] = {}
    by_id: dict[str, Path] = {}
    for path in paths:
        trace = _load_trace(path)
        if trace.passage_id in traces:
            raise ValidationFailure(f"{path}: duplicate passage_id {trace.passage_id!r}")
        traces[trace.passage_id] = trace
        by_id[trace.passage_id] = path
    return traces, by_id


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    config = PipelineConfig(gamma=args.gamma, rho=args.rho)
    disabled: list[str] = []
    for chunk in args.disable or []:
        disabled.extend(part.strip() for part in chunk.split(",") if part.strip())
    for feature in disabled:
        if feature not in FEATURES:
            raise ConfigError(f"unknown feature {feature!r} in --disable; expected one of {FEATURES}")
        config = config.disable(feature)
    return config


def _load_idf(args: argparse.Namespace, config: PipelineConfig) -> IdfTable | None:
    if args.idf is None:
        if config.use_idf:
            raise ConfigError("IDF correction enabled but no --idf table given (disable with --disable idf)")
        return None
    return parse_idf(_read(args.idf))


# Process-pool scoring. Workers re-parse the trace file so only paths and the
# small config/result payloads cross process boundaries.
_WORKER_IDF: IdfTable | None = None


def _pool_init(idf_path: str | None) -> None:
    global _WORKER_IDF
    _WORKER_IDF = parse_idf(Path(idf_path).read_bytes()) if idf_path else None


def _pool_score(task: tuple[str, PipelineConfig]) -> tuple[str, object]:
    path, config = task
    trace = _load_trace(Path(path), check=False)  # validated in the parent already
    return trace.passage_id, run_pipeline(trace, _WORKER_IDF, config)


def _score_many(
    paths_by_id: dict[str, Path],
    config: PipelineConfig,
    idf_table: IdfTable | None,
    idf_path: str | None,
    jobs: int,
) -> dict[str, object]:
    ids = sorted(paths_by_id)
    if jobs <= 1 or len(ids) <= 1:
        out = {}
        for pid in ids:
            trace = _load_trace(paths_by_id[pid], check=False)
            out[pid] = run_pipeline(trace, idf_table, config)
        return out
    with ProcessPoolExecutor(max_workers=jobs, initializer=_pool_init, initargs=(idf_path,)) as pool:
        results = pool.map(_pool_score, [(str(paths_by_id[pid]), config) for pid in ids])
        return dict(results)


def _write_reports(out_dir: Path, stem: str, as_dict: dict, as_markdown: str, fmt: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / f"{stem}.json"
    md_path = out_dir / f"{stem}.md"
    json_path.write_text(json.dumps(as_dict, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")
    md_path.write_text(as_markdown, encoding="utf-8")
    sys.stdout.write(as_markdown if fmt == "markdown" else json.dumps(as_dict, ensure_ascii=False, indent=1) + "\n")
    print(f"wrote {json_path} and {md_path}", file=sys.stderr)


def _cmd_score(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    idf_table = _load_idf(args, config)
    trace = _load_trace(args.trace)
    score_set = run_pipeline(trace, idf_table, config)
    out = Path(args.out) if args.out else Path(args.trace).with_suffix(".scores.json")
    out.write_text(serialize_score_set(score_set, config) + "\n", encoding="utf-8")
    print(out)
    return EXIT_OK


def _cmd_evaluate(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    idf_table = _load_idf(args, config)
    annotations = parse_annotations(_read(args.annotations))
    traces, paths = _load_trace_dir(args.traces)

    unannotated = sorted(set(traces) - set(annotations.passages))
    if unannotated:
        raise EvaluationError(f"passages missing annotations: {', '.join(unannotated)}")
    untraced = sorted(set(annotations.passages) - set(traces))
    if untraced:
        raise EvaluationError(f"annotated passages missing traces: {', '.join(untraced)}")

    score_sets = _score_many(paths, config, idf_table, args.idf, args.jobs)
    metrics = compute_metrics(annotations, score_sets)
    _write_reports(
        Path(args.out_dir),
        "evaluation",
        evaluation_to_dict(config, metrics, num_passages=len(traces)),
        evaluation_to_markdown(config, metrics),
        args.format,
    )
    return EXIT_OK


def _cmd_ablate(args: argparse.Namespace) -> int:
    annotations = parse_annotations(_read(args.annotations))
    idf_table = parse_idf(_read(args.idf)) if args.idf else None
    plain, plain_paths = _load_trace_dir(args.plain)
    typed, typed_paths = _load_trace_dir(args.typed)

    def score_map_fn(subset, config):
        paths = plain_paths if not config.use_type else typed_paths
        return _score_many({pid: paths[pid] for pid in subset}, config, idf_table, args.idf, args.jobs)

    report = run_ablation(plain, typed, annotations, idf_table, args.gamma, args.rho, score_map_fn=score_map_fn)
    _write_reports(Path(args.out_dir), "ablation", report_to_dict(report), report_to_markdown(report), args.format)
    return EXIT_OK


def _cmd_idf_build(args: argparse.Namespace) -> int:
    try:
        doc = json.loads(_read(args.counts))
    except json.JSONDecodeError as exc:
        raise IdfFormatError(f"malformed counts document: {exc}") from exc
    if not isinstance(doc, dict) or "num_docs" not in doc or "doc_freq" not in doc:
        raise IdfFormatError("counts document must contain num_docs and doc_freq")
    table = build_idf_table(doc["doc_freq"], doc["num_docs"], doc.get("default_df", 1))
    Path(args.out).write_text(serialize_idf(table) + "\n", encoding="utf-8")
    print(args.out)
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    trace = parse_trace(_read(args.trace))
    violations = validate_trace(trace)
    for violation in violations:
        print(violation)
    return EXIT_INVALID if violations else EXIT_OK


def _add_config_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--gamma", type=float, default=DEFAULT_GAMMA, help="penalty decay coefficient")
    sub.add_argument("--rho", type=float, default=DEFAULT_RHO, help="candidate probability threshold")
    sub.add_argument(
        "--disable",
        action="append",
        metavar="FEATURE",
        help=f"disable features (repeatable, comma-splittable): {','.join(FEATURES)}",
    )


def _add_report_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--out-dir", default=".", help="directory for the JSON and markdown reports")
    sub.add_argument("--format", choices=("json", "markdown"), default="markdown", help="stdout format")
    sub.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="parallel scoring workers")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="halo", description="Hallucination scoring from inference traces")
    subs = parser.add_subparsers(dest="command", required=True)

    score = subs.add_parser("score", help="score one trace file")
    score.add_argument("--trace", required=True)
    score.add_argument("--idf")
    score.add_argument("--out")
    _add_config_flags(score)
    score.set_defaults(func=_cmd_score)

    evaluate = subs.add_parser("evaluate", help="evaluate a trace directory against annotations")
    evaluate.add_argument("--traces", required=True)
    evaluate.add_argument("--annotations", required=True)
    evaluate.add_argument("--idf")
    _add_config_flags(evaluate)
    _add_report_flags(evaluate)
    evaluate.set_defaults(func=_cmd_evaluate)

    ablate = subs.add_parser("ablate", help="run the cumulative feature ladder")
    ablate.add_argument("--plain", required=True, help="directory of plain-variant traces")
    ablate.add_argument("--typed", required=True, help="directory of typed-variant traces")
    ablate.add_argument("--annotations", required=True)
    ablate.add_argument("--idf")
    ablate.add_argument("--gamma", type=float, default=DEFAULT_GAMMA)
    ablate.add_argument("--rho", type=float, default=DEFAULT_RHO)
    _add_report_flags(ablate)
    ablate.set_defaults(func=_cmd_ablate)

    idf_build = subs.add_parser("idf-build", help="build an IDF table from document-frequency counts")
    idf_build.add_argument("--counts", required=True)
    idf_build.add_argument("--out", required=True)
    idf_build.set_defaults(func=_cmd_idf_build)

    validate = subs.add_parser("validate", help="list invariant violations of a trace file")
    validate.add_argument("--trace", required=True)
    validate.set_defaults(func=_cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (
        TraceFormatError,
        AnnotationFormatError,
        IdfFormatError,
        ConfigError,
        EvaluationError,
        MetricUndefinedError,
        ValidationFailure,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
