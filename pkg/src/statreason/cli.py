"""Command-line front end.

One subcommand per evaluation; every command validates the corpus first and
every run is deterministic, so rerunning with the same manifest produces
byte-identical reports. Exit codes: 0 success, 1 validation or floor
failure, 2 runtime error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import baselines, records, reports, sara_import
from .corpus import Corpus, CorpusError, corpus_hash, corpus_statistics, load_corpus
from .engine import EngineConfig, evaluate_run


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except CorpusError as exc:
        for error in exc.errors:
            print(error, file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure, distinct from validation
        print(f"error: {exc}", file=sys.stderr)
        return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="statreason")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--manifest", required=True, help="corpus manifest file")
        p.add_argument("--out", type=Path, help="directory for report + record files")
        p.add_argument(
            "--floor",
            action="append",
            default=[],
            metavar="NAME=VALUE",
            help="fail (exit 1) when a report metric drops below VALUE",
        )

    p = sub.add_parser("validate", help="load the whole corpus and run every check")
    p.add_argument("--manifest", required=True)
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("stats", help="corpus statistics tables")
    common(p)
    p.set_defaults(handler=cmd_stats)

    p = sub.add_parser("eval-coref", help="score a coreference baseline against gold")
    common(p)
    p.add_argument("--baseline", default="string", help="single, string, or import:<path>")
    p.add_argument("--import", dest="import_path", metavar="PATH",
                   help="shorthand for --baseline import:PATH")
    p.set_defaults(handler=cmd_eval_coref)

    p = sub.add_parser("eval-argid", help="score argument identification against gold spans")
    common(p)
    p.add_argument("--source", default="heuristic", help="heuristic or import:<path>")
    p.add_argument("--import", dest="import_path", metavar="PATH",
                   help="shorthand for --source import:PATH")
    p.set_defaults(handler=cmd_eval_argid)

    p = sub.add_parser("cascade", help="identification followed by string-matching coreference")
    common(p)
    p.add_argument("--source", default="heuristic", help="heuristic or import:<path>")
    p.add_argument("--import", dest="import_path", metavar="PATH",
                   help="shorthand for --source import:PATH")
    p.set_defaults(handler=cmd_cascade)

    p = sub.add_parser("eval-inst", help="run argument instantiation and score it")
    common(p)
    p.add_argument("--resolver", default="constant", choices=["oracle", "heuristic", "constant"])
    p.add_argument("--split", default="test", choices=["train", "test", "all"])
    p.add_argument("--depth-cap", type=int, default=3)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--no-structure", action="store_true", help="ignore dependency trees")
    p.add_argument("--with-silver", action="store_true", help="add silver cases to the training fit")
    p.add_argument("--insert-gold", action="store_true", help="ground text with gold values (teacher forcing)")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(handler=cmd_eval_inst)

    p = sub.add_parser("import-sara", help="convert a distributed dataset tree to canonical format")
    p.add_argument("--source", required=True, type=Path)
    p.add_argument("--dest", required=True, type=Path)
    p.set_defaults(handler=cmd_import)

    return parser


def _load_validated(manifest: str) -> Corpus:
    from .corpus import FileError, validate_corpus

    corpus = load_corpus(manifest)
    problems = validate_corpus(corpus)
    if problems:
        raise CorpusError([FileError("corpus", None, p) for p in problems])
    return corpus


def cmd_validate(args) -> int:
    try:
        corpus = load_corpus(args.manifest)
    except CorpusError as exc:
        for error in exc.errors:
            print(error, file=sys.stderr)
        return 1
    from .corpus import validate_corpus

    problems = validate_corpus(corpus)
    for problem in problems:
        print(problem, file=sys.stderr)
    if problems:
        return 1
    print(
        f"corpus ok: {len(corpus.section_files)} section files, "
        f"{len(corpus.subsections)} subsections, {len(corpus.layers)} layers, "
        f"{len(corpus.program)} rules, {len(corpus.cases)} gold cases, "
        f"{len(corpus.silver)} silver cases"
    )
    return 0


def _emit(args, name: str, text: str, flat: dict[str, float], run_line: str, extra: dict[str, str] = {}) -> int:
    print(text)
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / f"{name}.report.txt").write_text(text + "\n", encoding="utf-8")
        (args.out / f"{name}.records.txt").write_text(
            reports.report_records(flat, run_line), encoding="utf-8"
        )
        for fname, content in extra.items():
            (args.out / fname).write_text(content, encoding="utf-8")
    floors = {}
    for item in args.floor:
        key, _, value = item.partition("=")
        floors[key] = float(value)
    failures = reports.check_floors(flat, floors)
    for failure in failures:
        print(failure, file=sys.stderr)
    return 1 if failures else 0


def _run_line(corpus: Corpus, command: str, **settings) -> str:
    parts = [f"@run command={records.write_text(command)}"]
    for key, value in settings.items():
        if isinstance(value, str):
            parts.append(f"{key}={records.write_text(value)}")
        else:
            parts.append(f"{key}={str(value).lower() if isinstance(value, bool) else value}")
    parts.append(f"corpus={records.write_text(corpus_hash(corpus))}")
    return " ".join(parts)


def cmd_stats(args) -> int:
    corpus = _load_validated(args.manifest)
    statistics = corpus_statistics(corpus)
    return _emit(
        args,
        "stats",
        reports.render_stats(statistics),
        reports.stats_flat(statistics),
        _run_line(corpus, "stats"),
    )


def _load_partitions(corpus: Corpus, path: str) -> dict[str, tuple[tuple[int, ...], ...]]:
    from .corpus import load_argument_layers

    layers = load_argument_layers(corpus.manifest.spans, path, list(corpus.subsections.values()))
    return {l.subsection_id: l.clusters for l in layers}


def cmd_eval_coref(args) -> int:
    corpus = _load_validated(args.manifest)
    name = f"import:{args.import_path}" if args.import_path else args.baseline
    if name == "single":
        predictions = {
            sid: baselines.single_mention_coref(layer) for sid, layer in corpus.layers.items()
        }
    elif name == "string":
        predictions = {
            sid: baselines.string_match_coref(layer, corpus.subsections[sid].text)
            for sid, layer in corpus.layers.items()
        }
    elif name.startswith("import:"):
        predictions = _load_partitions(corpus, name[len("import:") :])
    else:
        raise ValueError(f"unknown baseline {name!r}")
    report = reports.coref_report(corpus, predictions, name)
    dump = "\n".join(
        f"{sid} clusters={records.write_clusters(clusters)}"
        for sid, clusters in predictions.items()
    )
    return _emit(
        args,
        "eval-coref",
        report.render(),
        report.flat(),
        _run_line(corpus, "eval-coref", baseline=name),
        {"eval-coref.predictions.txt": dump + "\n"},
    )


def _load_spans(corpus: Corpus, path: str) -> dict[str, tuple]:
    out: dict[str, tuple] = {}
    text = Path(path).read_text(encoding="utf-8")
    for _lineno, record in records.iter_records(text):
        items = record.require("spans")
        out[record.id] = tuple((p.start, p.end) for p in items)
    return out


def _predicted_spans(corpus: Corpus, source: str) -> dict[str, tuple]:
    if source == "heuristic":
        return {
            sid: tuple((s.start, s.end) for s in baselines.heuristic_argument_id(sub.text))
            for sid, sub in corpus.subsections.items()
            if sid in corpus.layers
        }
    if source.startswith("import:"):
        return _load_spans(corpus, source[len("import:") :])
    raise ValueError(f"unknown span source {source!r}")


def cmd_eval_argid(args) -> int:
    corpus = _load_validated(args.manifest)
    source = f"import:{args.import_path}" if args.import_path else args.source
    args.source = source
    predicted = _predicted_spans(corpus, source)
    from .model import Span

    as_spans = {sid: tuple(Span(a, b) for a, b in spans) for sid, spans in predicted.items()}
    report = reports.argid_report(corpus, as_spans, args.source)
    dump = "\n".join(
        f"{sid} spans=" + "[" + ", ".join(f"({a}, {b})" for a, b in spans) + "]"
        for sid, spans in predicted.items()
    )
    return _emit(
        args,
        "eval-argid",
        report.render(),
        report.flat(),
        _run_line(corpus, "eval-argid", source=args.source),
        {"eval-argid.predictions.txt": dump + "\n"},
    )


def cmd_cascade(args) -> int:
    corpus = _load_validated(args.manifest)
    source = f"import:{args.import_path}" if args.import_path else args.source
    args.source = source
    predicted = _predicted_spans(corpus, source)
    from .model import ArgumentLayer, Span

    clusters_by_sid = {}
    for sid, span_pairs in predicted.items():
        if sid not in corpus.subsections:
            continue
        spans = tuple(sorted(Span(a, b) for a, b in set(span_pairs)))
        layer = ArgumentLayer(sid, spans, tuple((i,) for i in range(len(spans))))
        partition = baselines.string_match_coref(layer, corpus.subsections[sid].text)
        clusters_by_sid[sid] = tuple(
            tuple((spans[i].start, spans[i].end) for i in cluster) for cluster in partition
        )
    report = reports.cascade_report(corpus, clusters_by_sid, args.source)
    return _emit(
        args,
        "cascade",
        report.render(),
        report.flat(),
        _run_line(corpus, "cascade", source=args.source),
    )


def cmd_eval_inst(args) -> int:
    corpus = _load_validated(args.manifest)
    config = EngineConfig(
        depth_cap=args.depth_cap,
        truth_threshold=args.threshold,
        use_structure=not args.no_structure,
        insert_gold=args.insert_gold,
    )
    if args.resolver == "oracle":
        resolver = baselines.OracleResolver()
    elif args.resolver == "heuristic":
        resolver = baselines.HeuristicResolver()
    else:
        train = list(corpus.cases_of("train"))
        if args.with_silver:
            train += list(corpus.silver)
        params = baselines.fit_constant_baseline(train)
        resolver = baselines.ConstantResolver(params)
    results, report = evaluate_run(resolver, corpus, args.split, config, jobs=args.jobs)

    run_line = _run_line(
        corpus,
        "eval-inst",
        resolver=args.resolver,
        split=args.split,
        depth_cap=config.depth_cap,
        threshold=config.truth_threshold,
        structure=config.use_structure,
        silver=args.with_silver,
        insert_gold=config.insert_gold,
        jobs=args.jobs,
    )
    dump_lines = [run_line]
    for result in results:
        for name, value in result.predicted.items():
            dump_lines.append(
                f"{result.case.id} arg={records.write_text(name)} value={records.write_value(value)}"
            )
    return _emit(
        args,
        "eval-inst",
        report.render(),
        report.flat(),
        run_line,
        {"eval-inst.predictions.txt": "\n".join(dump_lines) + "\n"},
    )


def cmd_import(args) -> int:
    log = sara_import.import_corpus(args.source, args.dest)
    for line in log.skipped:
        print(f"skipped {line}", file=sys.stderr)
    print(f"imported {len(log.imported)} items, skipped {len(log.skipped)}")
    print(f"canonical corpus written to {args.dest}/manifest.txt")
    return 0


if __name__ == "__main__":
    sys.exit(main())
