"""Corpus loading and validation.

A corpus lives in a directory described by a manifest of key=value lines:

    statutes=statutes        directory of section text files plus offsets.txt
    spans=spans.txt          argument placeholder spans per subsection
    coref=coref.txt          span-index clusters per subsection, optionally
                             labelled with the rule's argument names
    structure=structure.txt  Horn-clause annotations, one clause per statement
    cases=cases              directory of <split>.cases files
    silver=silver            optional directory of machine-generated cases

All record files use the canonical format of `records`. Offsets are 0-based,
half-open character offsets into the decoded section file.
"""

from __future__ import annotations

import hashlib
import statistics as stats
from dataclasses import dataclass
from pathlib import Path

from . import records
from .model import (
    ArgumentLayer,
    Case,
    Span,
    Subsection,
    TRUTH_KEY,
)
from .rules import Program, RuleSyntaxError, check_references, parse_program


@dataclass(frozen=True)
class FileError:
    path: str
    line: int | None
    message: str

    def __str__(self) -> str:
        where = f"{self.path}:{self.line}" if self.line is not None else self.path
        return f"{where}: {self.message}"


class CorpusError(Exception):
    def __init__(self, errors: list[FileError]):
        super().__init__("\n".join(str(e) for e in errors))
        self.errors = errors


def _fail(path: Path, line: int | None, message: str):
    raise CorpusError([FileError(str(path), line, message)])


@dataclass(frozen=True)
class CorpusManifest:
    base: Path
    statutes: Path
    spans: Path
    coref: Path
    structure: Path
    cases: Path
    silver: Path | None = None

    @staticmethod
    def load(path: str | Path) -> "CorpusManifest":
        path = Path(path)
        entries: dict[str, str] = {}
        for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                _fail(path, lineno, "manifest lines must be key=value")
            key, _, value = line.partition("=")
            entries[key.strip()] = value.strip()
        base = path.parent
        missing = [k for k in ("statutes", "spans", "coref", "structure", "cases") if k not in entries]
        if missing:
            _fail(path, None, f"manifest is missing keys: {', '.join(missing)}")
        manifest = CorpusManifest(
            base=base,
            statutes=base / entries["statutes"],
            spans=base / entries["spans"],
            coref=base / entries["coref"],
            structure=base / entries["structure"],
            cases=base / entries["cases"],
            silver=(base / entries["silver"]) if "silver" in entries else None,
        )
        for name in ("statutes", "spans", "coref", "structure", "cases"):
            if not getattr(manifest, name).exists():
                _fail(path, None, f"{name} path does not exist: {getattr(manifest, name)}")
        if manifest.silver is not None and not manifest.silver.exists():
            _fail(path, None, f"silver path does not exist: {manifest.silver}")
        return manifest


@dataclass(frozen=True)
class Corpus:
    manifest: CorpusManifest
    subsections: dict[str, Subsection]
    layers: dict[str, ArgumentLayer]
    program: Program
    cases: tuple[Case, ...]
    silver: tuple[Case, ...]
    section_files: tuple[str, ...]

    def cases_of(self, split: str) -> tuple[Case, ...]:
        if split == "all":
            return self.cases
        return tuple(c for c in self.cases if c.split == split)

    def layer_of(self, subsection_id: str) -> ArgumentLayer:
        layer = self.layers.get(subsection_id)
        if layer is None:
            from .model import empty_layer

            return empty_layer(subsection_id)
        return layer


# ---------------------------------------------------------------------------
# Loaders


def load_statutes(statutes_dir: str | Path) -> list[Subsection]:
    """Read section files and slice subsections out per the offsets index."""
    statutes_dir = Path(statutes_dir)
    index = statutes_dir / "offsets.txt"
    if not index.exists():
        _fail(index, None, "offsets index not found")
    texts: dict[str, str] = {}
    rows: list[tuple[str, str, int, int]] = []
    errors: list[FileError] = []
    for lineno, record in _iter_file(index):
        try:
            fname = record.require("file")
            start, end = record.require("start"), record.require("end")
            if not (isinstance(fname, str) and isinstance(start, int) and isinstance(end, int)):
                raise records.RecordError("offsets need file=\"...\" start=<int> end=<int>")
            if not _well_formed_id(record.id):
                raise records.RecordError(f"malformed subsection id {record.id!r}")
            if fname not in texts:
                fpath = statutes_dir / fname
                if not fpath.exists():
                    raise records.RecordError(f"section file not found: {fname}")
                texts[fname] = fpath.read_text(encoding="utf-8")
            if not (0 <= start < end <= len(texts[fname])):
                raise records.RecordError(
                    f"offsets ({start}, {end}) out of bounds for {fname} of length {len(texts[fname])}"
                )
            rows.append((record.id, fname, start, end))
        except records.RecordError as exc:
            errors.append(FileError(str(index), lineno, str(exc)))
    ids = [r[0] for r in rows]
    for rid in sorted({i for i in ids if ids.count(i) > 1}):
        errors.append(FileError(str(index), None, f"duplicate subsection id {rid}"))
    if errors:
        raise CorpusError(errors)

    known = set(ids)
    out = []
    for rid, fname, start, end in rows:
        out.append(Subsection(rid, texts[fname][start:end], _parent_of(rid, known)))
    return out


def _well_formed_id(subsection_id: str) -> bool:
    """Identifiers nest with balanced, non-empty parenthesized groups."""
    depth = 0
    previous = ""
    for ch in subsection_id:
        if ch == "(":
            if depth:
                return False
            depth = 1
        elif ch == ")":
            if depth != 1 or previous == "(":
                return False
            depth = 0
        previous = ch
    return depth == 0 and not subsection_id.startswith("(")


def _parent_of(subsection_id: str, known: set[str]) -> str | None:
    candidate = subsection_id
    while candidate.endswith(")") and "(" in candidate:
        candidate = candidate[: candidate.rfind("(")]
        if candidate in known:
            return candidate
    return None


def load_argument_layers(
    spans_path: str | Path, coref_path: str | Path, statutes: list[Subsection]
) -> list[ArgumentLayer]:
    """Join the spans and coref files into validated argument layers."""
    spans_path, coref_path = Path(spans_path), Path(coref_path)
    by_id = {s.id: s for s in statutes}
    errors: list[FileError] = []

    spans: dict[str, tuple[Span, ...]] = {}
    for lineno, record in _iter_file(spans_path):
        try:
            items = record.require("spans")
            if record.id not in by_id:
                raise records.RecordError(f"unknown subsection {record.id}")
            if record.id in spans:
                raise records.RecordError(f"duplicate spans record for {record.id}")
            text = by_id[record.id].text
            out = []
            for item in items:
                if not isinstance(item, records.PairLit):
                    raise records.RecordError(f"expected (start, end) pairs, found {item!r}")
                span = Span(item.start, item.end)
                if span.end > len(text):
                    raise records.RecordError(
                        f"span ({span.start}, {span.end}) out of range for {record.id} "
                        f"of length {len(text)}"
                    )
                if not span.slice(text).strip():
                    raise records.RecordError(f"span ({span.start}, {span.end}) covers only whitespace")
                out.append(span)
            for a, b in zip(out, out[1:]):
                if b.start < a.end:
                    raise records.RecordError(f"spans overlap or are out of order: {a}, {b}")
            spans[record.id] = tuple(out)
        except (records.RecordError, ValueError) as exc:
            errors.append(FileError(str(spans_path), lineno, str(exc)))

    layers: dict[str, ArgumentLayer] = {}
    for lineno, record in _iter_file(coref_path):
        try:
            items = record.require("clusters")
            if record.id not in spans:
                raise records.RecordError(f"{record.id} has no spans record")
            if record.id in layers:
                raise records.RecordError(f"duplicate coref record for {record.id}")
            clusters, names = [], []
            for item in items:
                if isinstance(item, records.Labeled):
                    label, members = item.label, item.items
                elif isinstance(item, list):
                    label, members = None, item
                else:
                    raise records.RecordError(
                        f"expected clusters like Name:[0, 1] or [0, 1], found {item!r}"
                    )
                if not all(isinstance(i, int) for i in members):
                    raise records.RecordError(f"cluster members must be span indices, got {members!r}")
                bad = [i for i in members if not 0 <= i < len(spans[record.id])]
                if bad:
                    raise records.RecordError(f"cluster index out of range: {bad[0]}")
                clusters.append(tuple(members))
                names.append(label)
            layers[record.id] = ArgumentLayer(record.id, spans[record.id], tuple(clusters), tuple(names))
        except (records.RecordError, ValueError) as exc:
            errors.append(FileError(str(coref_path), lineno, str(exc)))

    for missing in sorted(set(spans) - set(layers)):
        errors.append(FileError(str(coref_path), None, f"no coref record for {missing}"))
    if errors:
        raise CorpusError(errors)
    return list(layers.values())


def load_cases(cases_dir: str | Path, split: str | None = None) -> list[Case]:
    """Load every <name>.cases file; the file stem names the split."""
    cases_dir = Path(cases_dir)
    errors: list[FileError] = []
    cases: list[Case] = []
    seen: set[str] = set()
    for path in sorted(cases_dir.glob("*.cases")):
        for lineno, record in _iter_file(path):
            try:
                query = record.require("query")
                description = record.require("description")
                if not isinstance(query, str) or not isinstance(description, str):
                    raise records.RecordError("query and description must be quoted strings")
                inputs = records.as_value_map(record.require("inputs"), "inputs")
                expected = records.as_value_map(record.require("expected"), "expected")
                if record.id in seen:
                    raise records.RecordError(f"duplicate case id {record.id}")
                if not expected:
                    raise records.RecordError("expected values must be non-empty")
                case = Case(
                    record.id,
                    description,
                    query,
                    inputs,
                    expected,
                    split or path.stem,
                )
                if case.kind == "binary" and TRUTH_KEY not in expected:
                    raise records.RecordError("binary cases must expect @truth")
                seen.add(record.id)
                cases.append(case)
            except (records.RecordError, ValueError) as exc:
                errors.append(FileError(str(path), lineno, str(exc)))
    if errors:
        raise CorpusError(errors)
    return cases


def _iter_file(path: Path):
    text = path.read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            yield lineno, records.parse_record(stripped)
        except records.RecordError as exc:
            raise CorpusError([FileError(str(path), lineno, str(exc))]) from exc


def load_corpus(manifest_path: str | Path) -> Corpus:
    manifest = CorpusManifest.load(manifest_path)
    subsections = load_statutes(manifest.statutes)
    layers = load_argument_layers(manifest.spans, manifest.coref, subsections)
    try:
        program = parse_program(manifest.structure.read_text(encoding="utf-8"))
    except RuleSyntaxError as exc:
        _fail(manifest.structure, None, str(exc))
    cases = load_cases(manifest.cases)
    silver = load_cases(manifest.silver, split="silver") if manifest.silver else []
    section_files = tuple(sorted(p.name for p in Path(manifest.statutes).glob("*.txt") if p.name != "offsets.txt"))
    return Corpus(
        manifest=manifest,
        subsections={s.id: s for s in subsections},
        layers={l.subsection_id: l for l in layers},
        program=program,
        cases=tuple(cases),
        silver=tuple(silver),
        section_files=section_files,
    )


# ---------------------------------------------------------------------------
# Corpus-wide validation


def validate_corpus(corpus: Corpus) -> list[str]:
    """Cross-file diagnostics; empty means the corpus is coherent."""
    diagnostics = [str(d) for d in check_references(corpus.program)]
    for rule_id in corpus.program.rules:
        if rule_id not in corpus.subsections:
            diagnostics.append(f"structure: rule {rule_id} has no subsection text")
    for case in list(corpus.cases) + list(corpus.silver):
        if case.query not in corpus.program:
            diagnostics.append(f"case {case.id}: query {case.query} has no structure rule")
    for layer in corpus.layers.values():
        if layer.subsection_id not in corpus.subsections:
            diagnostics.append(f"layer {layer.subsection_id}: unknown subsection")
        rule = corpus.program.get(layer.subsection_id)
        for name, _ in layer.named_clusters():
            if rule is None:
                diagnostics.append(
                    f"layer {layer.subsection_id}: cluster {name!r} named but no rule declares parameters"
                )
            elif name not in rule.params:
                diagnostics.append(
                    f"layer {layer.subsection_id}: cluster {name!r} is not a parameter of its rule"
                )
    return diagnostics


def corpus_hash(corpus: Corpus) -> str:
    """Stable digest of every corpus file, for run manifests."""
    manifest = corpus.manifest
    paths = [manifest.spans, manifest.coref, manifest.structure]
    paths += sorted(Path(manifest.statutes).glob("*"))
    paths += sorted(Path(manifest.cases).glob("*.cases"))
    if manifest.silver:
        paths += sorted(Path(manifest.silver).glob("*.cases"))
    digest = hashlib.sha256()
    for path in paths:
        if path.is_file():
            digest.update(path.name.encode())
            digest.update(path.read_bytes())
    return digest.hexdigest()[:16]


# ---------------------------------------------------------------------------
# Serialization (canonical form; load -> serialize is byte-identical)


def serialize_spans(layers: list[ArgumentLayer]) -> str:
    lines = [f"{l.subsection_id} spans={records.write_spans(l.spans)}" for l in layers]
    return "\n".join(lines) + "\n"


def serialize_coref(layers: list[ArgumentLayer]) -> str:
    lines = [
        f"{l.subsection_id} clusters={records.write_clusters(l.clusters, l.cluster_names)}"
        for l in layers
    ]
    return "\n".join(lines) + "\n"


def serialize_cases(cases: list[Case]) -> str:
    lines = []
    for case in cases:
        lines.append(
            f"{case.id} query={records.write_text(case.query)}"
            f" description={records.write_text(case.description)}"
            f" inputs={records.write_value_map(case.inputs)}"
            f" expected={records.write_value_map(case.expected)}"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Statistics


@dataclass(frozen=True)
class StatSeries:
    """A histogram over per-unit integer counts plus summary statistics."""

    name: str
    counts: dict[int, int]
    mean: float
    stddev: float
    median: float

    @property
    def units(self) -> int:
        return sum(self.counts.values())

    @staticmethod
    def from_values(name: str, values: list[int]) -> "StatSeries":
        if not values:
            return StatSeries(name, {}, 0.0, 0.0, 0.0)
        counts: dict[int, int] = {}
        for v in values:
            counts[v] = counts.get(v, 0) + 1
        return StatSeries(
            name,
            dict(sorted(counts.items())),
            stats.fmean(values),
            stats.pstdev(values),
            float(stats.median(values)),
        )


@dataclass(frozen=True)
class CorpusStatistics:
    placeholders_per_subsection: StatSeries
    arguments_per_subsection: StatSeries
    mentions_per_argument: StatSeries
    rule_arguments: StatSeries
    rule_dependencies: StatSeries
    input_pairs: dict[str, StatSeries]
    output_pairs: dict[str, StatSeries]
    section_file_count: int
    subsection_count: int
    case_count: int
    silver_count: int


def corpus_statistics(corpus: Corpus) -> CorpusStatistics:
    from .rules import iter_refs

    span_counts, cluster_counts, mention_counts = [], [], []
    for sid in corpus.subsections:
        layer = corpus.layers.get(sid)
        span_counts.append(len(layer.spans) if layer else 0)
        cluster_counts.append(len(layer.clusters) if layer else 0)
        if layer:
            mention_counts.extend(len(c) for c in layer.clusters)

    rule_args = [len(r.params) for r in corpus.program.rules.values()]
    rule_deps = [len(list(iter_refs(r))) for r in corpus.program.rules.values()]

    def pair_series(which: str) -> dict[str, StatSeries]:
        groups: dict[str, list[int]] = {"train": [], "test": [], "all": [], "silver": []}
        for case in corpus.cases:
            n = len(case.inputs) if which == "inputs" else len(case.expected)
            if case.split in groups:
                groups[case.split].append(n)
            groups["all"].append(n)
        for case in corpus.silver:
            groups["silver"].append(len(case.inputs) if which == "inputs" else len(case.expected))
        return {split: StatSeries.from_values(f"{which}[{split}]", v) for split, v in groups.items()}

    return CorpusStatistics(
        placeholders_per_subsection=StatSeries.from_values("placeholders per subsection", span_counts),
        arguments_per_subsection=StatSeries.from_values("arguments per subsection", cluster_counts),
        mentions_per_argument=StatSeries.from_values("mentions per argument", mention_counts),
        rule_arguments=StatSeries.from_values("rule arguments", rule_args),
        rule_dependencies=StatSeries.from_values("rule dependencies", rule_deps),
        input_pairs=pair_series("inputs"),
        output_pairs=pair_series("expected"),
        section_file_count=len(corpus.section_files),
        subsection_count=len(corpus.subsections),
        case_count=len(corpus.cases),
        silver_count=len(corpus.silver),
    )
