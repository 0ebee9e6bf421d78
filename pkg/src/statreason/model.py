"""Core domain types: statute subsections, argument annotations, cases, values.

Everything here is immutable after construction and carries no I/O or
algorithmic logic. Values are ordinary Python objects wherever that is
unambiguous (str, int, float, datetime.date, tuple); only dollar amounts
get a wrapper type so they stay distinguishable from plain integers.
"""

from __future__ import annotations

import datetime
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass

TRUTH_KEY = "@truth"


@dataclass(frozen=True)
class Money:
    """A dollar amount, whole dollars."""

    dollars: int

    def __post_init__(self) -> None:
        if not isinstance(self.dollars, int) or isinstance(self.dollars, bool):
            raise ValueError(f"money must be an integer dollar amount, got {self.dollars!r}")

    def __str__(self) -> str:
        return f"${self.dollars}"


# A value bound to an argument. Floats are truth scores in [0, 1]; bare ints
# are unitless numbers (week indices and the like); tuples are homogeneous
# lists of any other kind.
Value = str | int | float | datetime.date | Money | tuple

_KIND_NAMES = {str: "text", int: "number", float: "truth", datetime.date: "date", Money: "money"}


def value_kind(value: Value) -> str:
    """Classify a value: text, number, truth, date, money or list."""
    if isinstance(value, bool):
        raise ValueError("booleans are not values; encode truth as a score in [0, 1]")
    if isinstance(value, tuple):
        return "list"
    for tp, name in _KIND_NAMES.items():
        if isinstance(value, tp):
            return name
    raise ValueError(f"unsupported value type: {type(value).__name__}")


def check_value(value: Value) -> Value:
    """Validate a value's invariants, returning it unchanged."""
    kind = value_kind(value)
    if kind == "truth" and not 0.0 <= value <= 1.0:
        raise ValueError(f"truth score out of [0, 1]: {value}")
    if kind == "list":
        kinds = {value_kind(check_value(v)) for v in value}
        if len(kinds) > 1:
            raise ValueError(f"heterogeneous list value: kinds {sorted(kinds)}")
    return value


class ValueMap(Mapping):
    """An ordered, immutable mapping of argument names to values.

    Keys are unique by construction; the distinguished "@truth" key, when
    present, must hold a truth score.
    """

    __slots__ = ("_items",)

    def __init__(self, pairs: Iterable[tuple[str, Value]] | Mapping[str, Value] = ()):
        if isinstance(pairs, Mapping):
            pairs = pairs.items()
        items: dict[str, Value] = {}
        for name, value in pairs:
            if name in items:
                raise ValueError(f"duplicate argument name: {name!r}")
            check_value(value)
            if name == TRUTH_KEY and value_kind(value) != "truth":
                raise ValueError(f"{TRUTH_KEY} must hold a truth score, got {value!r}")
            items[name] = value
        object.__setattr__(self, "_items", items)

    def __getitem__(self, key: str) -> Value:
        return self._items[key]

    def __iter__(self) -> Iterator[str]:
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v!r}" for k, v in self._items.items())
        return f"ValueMap({inner})"

    def __eq__(self, other: object) -> bool:
        if isinstance(other, ValueMap):
            return self._items == other._items
        return NotImplemented

    def __hash__(self) -> int:
        return hash(tuple(self._items.items()))

    def merged(self, other: Mapping[str, Value]) -> "ValueMap":
        """New map with entries of `other` added; existing keys keep their value."""
        items = dict(self._items)
        for name, value in other.items():
            items.setdefault(name, value)
        return ValueMap(items.items())

    def without(self, *names: str) -> "ValueMap":
        return ValueMap((k, v) for k, v in self._items.items() if k not in names)


def truth_of(values: Mapping[str, Value]) -> float | None:
    """The @truth entry of a value map, or None when absent."""
    value = values.get(TRUTH_KEY)
    if value is None:
        return None
    return float(value)


@dataclass(frozen=True, order=True)
class Span:
    """A character range [start, end) within one subsection's text."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if not (0 <= self.start < self.end):
            raise ValueError(f"invalid span ({self.start}, {self.end})")

    def slice(self, text: str) -> str:
        if self.end > len(text):
            raise ValueError(f"span ({self.start}, {self.end}) exceeds text of length {len(text)}")
        return text[self.start : self.end]


@dataclass(frozen=True)
class Subsection:
    """One subsection of a statute, the atomic natural-language predicate."""

    id: str
    text: str
    parent_id: str | None = None


@dataclass(frozen=True)
class ArgumentLayer:
    """Placeholder spans of one subsection and their grouping into arguments.

    `clusters` is an exact partition of span indices; `cluster_names`
    optionally labels each cluster with the argument name used by the
    subsection's rule, which is what lets value maps reach mention spans.
    """

    subsection_id: str
    spans: tuple[Span, ...]
    clusters: tuple[tuple[int, ...], ...]
    cluster_names: tuple[str | None, ...] = ()

    def __post_init__(self) -> None:
        spans = tuple(self.spans)
        clusters = canonical_partition(self.clusters)
        names = tuple(self.cluster_names)
        if names and len(names) != len(self.clusters):
            raise ValueError("cluster_names must parallel clusters")
        if names:
            # canonical_partition may reorder clusters; keep labels attached.
            order = {tuple(sorted(c)): i for i, c in enumerate(self.clusters)}
            names = tuple(self.cluster_names[order[c]] for c in clusters)
        object.__setattr__(self, "spans", spans)
        object.__setattr__(self, "clusters", clusters)
        object.__setattr__(self, "cluster_names", names)

        for a, b in zip(spans, spans[1:]):
            if b.start < a.end:
                raise ValueError(
                    f"{self.subsection_id}: spans out of order or overlapping: {a}, {b}"
                )
        covered = [i for cluster in clusters for i in cluster]
        if sorted(covered) != list(range(len(spans))) or len(covered) != len(set(covered)):
            raise ValueError(f"{self.subsection_id}: clusters are not a partition of span indices")
        labelled = [n for n in names if n is not None]
        if len(labelled) != len(set(labelled)):
            raise ValueError(f"{self.subsection_id}: duplicate cluster names")

    def named_clusters(self) -> list[tuple[str, tuple[int, ...]]]:
        """(name, cluster) pairs in order of first mention, labelled ones only."""
        names = self.cluster_names or (None,) * len(self.clusters)
        pairs = [(n, c) for n, c in zip(names, self.clusters) if n is not None]
        pairs.sort(key=lambda nc: nc[1][0])
        return pairs

    def spans_of(self, name: str) -> tuple[Span, ...]:
        for cname, cluster in zip(self.cluster_names, self.clusters):
            if cname == name:
                return tuple(self.spans[i] for i in cluster)
        return ()


def empty_layer(subsection_id: str) -> ArgumentLayer:
    return ArgumentLayer(subsection_id, (), (), ())


def canonical_partition(clusters: Iterable[Iterable[int]]) -> tuple[tuple[int, ...], ...]:
    """Sort members within clusters and clusters by first member."""
    normal = tuple(tuple(sorted(c)) for c in clusters)
    return tuple(sorted(normal, key=lambda c: c[0]))


def clusters_to_matrix(layer: ArgumentLayer) -> list[list[int]]:
    """The coreference matrix induced by a layer's cluster partition."""
    n = len(layer.spans)
    matrix = [[0] * n for _ in range(n)]
    for cluster in layer.clusters:
        for i in cluster:
            for j in cluster:
                matrix[i][j] = 1
    return matrix


def matrix_to_clusters(matrix: Iterable[Iterable[int]]) -> tuple[tuple[int, ...], ...]:
    """Partition induced by a coreference matrix (connected components).

    The matrix must be symmetric with a unit diagonal; transitive closure is
    applied if the input is not already closed.
    """
    rows = [list(r) for r in matrix]
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("matrix is not square")
    for i in range(n):
        if rows[i][i] != 1:
            raise ValueError(f"matrix diagonal is not 1 at index {i}")
        for j in range(n):
            if rows[i][j] != rows[j][i]:
                raise ValueError(f"matrix is not symmetric at ({i}, {j})")

    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if rows[i][j]:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return canonical_partition(groups.values())


@dataclass(frozen=True)
class Case:
    """A natural-language fact pattern with a query subsection and gold values."""

    id: str
    description: str
    query: str
    inputs: ValueMap
    expected: ValueMap
    split: str = "train"

    @property
    def kind(self) -> str:
        """"numerical" when a non-@truth dollar amount is expected, else "binary"."""
        for name, value in self.expected.items():
            if name != TRUTH_KEY and value_kind(value) == "money":
                return "numerical"
        return "binary"

    @property
    def pair_id(self) -> str | None:
        """Shared id of a positive/negative case pair, None for unpaired cases."""
        for suffix in ("-positive", "-negative"):
            if self.id.endswith(suffix):
                return self.id[: -len(suffix)]
        return None
