"""Deterministic baselines: coreference, placeholder spotting, and resolvers.

The string-matching normalization removes exactly the words such, a, an,
the, any, his and every (as whole tokens), collapses whitespace and
lowercases; the word list is closed on purpose so scores stay reproducible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .engine import ResolveRequest
from .metrics import canonical_string, family_of
from .model import (
    ArgumentLayer,
    Case,
    Money,
    Span,
    TRUTH_KEY,
    Value,
    ValueMap,
    canonical_partition,
)

# ---------------------------------------------------------------------------
# Argument coreference


def single_mention_coref(layer: ArgumentLayer) -> tuple[tuple[int, ...], ...]:
    """Predict no links: every span is its own argument."""
    return tuple((i,) for i in range(len(layer.spans)))


_DROPPED_WORDS = frozenset({"such", "a", "an", "the", "any", "his", "every"})


def normalize_placeholder(text: str) -> str:
    tokens = [t for t in text.lower().split() if t not in _DROPPED_WORDS]
    return " ".join(tokens)


def string_match_coref(layer: ArgumentLayer, text: str) -> tuple[tuple[int, ...], ...]:
    """Cluster spans whose normalized placeholder strings are identical."""
    groups: dict[str, list[int]] = {}
    for i, span in enumerate(layer.spans):
        groups.setdefault(normalize_placeholder(span.slice(text)), []).append(i)
    return canonical_partition(groups.values())


# ---------------------------------------------------------------------------
# Heuristic argument identification

_DETERMINERS = frozenset(
    {"a", "an", "the", "such", "any", "every", "each", "another", "his", "her",
     "some", "one", "no"}
)
# Function words that end a placeholder phrase.
_PHRASE_STOP = frozenset(
    """of in on for to under over with by at during is are was were be been being shall
    may must not or and nor but if then than as from into upon within without between
    against that which who whom whose this these those it its there where when while
    begins begin began beginning ends end ending died dies exceed exceeds applicable
    allowable paid made described defined employed returns""".split()
)

_TOKEN_RE = re.compile(r"[A-Za-z][A-Za-z0-9']*")


def heuristic_argument_id(text: str) -> list[Span]:
    """Candidate placeholder spans: determiner-led noun phrases, restarting
    after possessive markers. Purely lexical and deterministic."""
    tokens = [(m.group(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]
    spans: list[Span] = []
    i = 0
    while i < len(tokens):
        if tokens[i][0].lower() in _DETERMINERS:
            i = _absorb(text, tokens, i, tokens[i][1], spans)
        else:
            i += 1
    return spans


def _absorb(text: str, tokens, i: int, start: int, spans: list[Span]) -> int:
    """Extend a phrase from token i+1 on; append completed spans. Returns the
    next unconsumed token index."""
    end = tokens[i][2]
    absorbed = 0
    j = i + 1
    while j < len(tokens):
        word, wstart, wend = tokens[j]
        lower = word.lower()
        if lower in _PHRASE_STOP or lower in _DETERMINERS:
            break
        if lower.endswith("'s"):
            # Possessive: close at the stem, then start a fresh phrase after it.
            spans.append(Span(start, wend - 2))
            if j + 1 < len(tokens) and _continues(tokens[j + 1][0]):
                return _absorb(text, tokens, j, tokens[j + 1][1], spans)
            return j + 1
        end = wend
        absorbed += 1
        j += 1
        if wend < len(text) and text[wend] in ".,;:!?":
            break
    if absorbed:
        spans.append(Span(start, end))
    return j


def _continues(word: str) -> bool:
    lower = word.lower()
    return lower not in _PHRASE_STOP and lower not in _DETERMINERS and not lower.endswith("'s")


# ---------------------------------------------------------------------------
# The constant baseline (three parameters)


@dataclass(frozen=True)
class ConstantBaselineParams:
    majority_truth: float
    constant_dollars: int
    majority_string: str


def hinge_loss(targets: list[int], constant: int) -> Fraction:
    """Total numerical hinge loss of one constant against integer targets."""
    total = Fraction(0)
    for y in targets:
        scale = max(Fraction(abs(y)) / 10, Fraction(5000))
        delta = Fraction(abs(y - constant)) / scale
        if delta > 1:
            total += delta - 1
    return total


def fit_constant_baseline(train_cases: list[Case]) -> ConstantBaselineParams:
    """Fit the three parameters on gold training outputs.

    The dollar constant minimizes the hinge loss exactly: the objective is
    convex piecewise linear, so the integer minimizer is found among the
    breakpoints y_i +- max(0.1 y_i, 5000) (rounded both ways) plus a coarse
    grid; ties break toward the smallest constant.
    """
    if not train_cases:
        raise ValueError("empty training set")
    truths: list[float] = []
    dollars: list[int] = []
    strings: list[str] = []
    for case in train_cases:
        for name, value in case.expected.items():
            family = family_of(name, value)
            if family == "truth":
                truths.append(float(value))
            elif family == "dollar":
                dollars.append(value.dollars)
            else:
                strings.append(canonical_string(value))

    majority_truth = _mode(truths, prefer=1.0) if truths else 1.0
    majority_string = _mode(sorted(strings)) if strings else ""

    constant = 0
    if dollars:
        candidates = {0}
        for y in dollars:
            scale = max(Fraction(abs(y)) / 10, Fraction(5000))
            for point in (Fraction(y), y - scale, y + scale):
                for rounded in (int(point), int(point) + 1):
                    if rounded >= 0:
                        candidates.add(rounded)
        top = 2 * max(dollars)
        step = max(1, top // 200)
        candidates.update(range(0, top + 1, step))
        constant = min(sorted(candidates), key=lambda c: (hinge_loss(dollars, c), c))
    return ConstantBaselineParams(majority_truth, constant, majority_string)


def _mode(values, prefer=None):
    counts: dict = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    best = max(counts.values())
    winners = [v for v, n in counts.items() if n == best]
    if prefer is not None and prefer in winners:
        return prefer
    return winners[0]


# Vocabulary that marks an argument as calling for a dollar amount, judged on
# its placeholder text (or its name when it has no mention).
_MONEY_WORDS = frozenset(
    {"income", "tax", "deduction", "amount", "exemption", "$", "dollar", "remuneration",
     "wages", "salary", "cost", "expense", "sum"}
)


def wants_dollars(argument: str, layer: ArgumentLayer, source_text: str) -> bool:
    spans = layer.spans_of(argument)
    if spans and source_text:
        surface = " ".join(span.slice(source_text).lower() for span in spans)
    else:
        surface = argument.lower()
    if "$" in surface:
        return True
    tokens = set(re.findall(r"[a-z]+", surface))
    return bool(tokens & _MONEY_WORDS)


@dataclass(frozen=True)
class ConstantResolver:
    """Answers from the three fitted parameters, ignoring the case entirely."""

    params: ConstantBaselineParams

    def resolve(self, request: ResolveRequest) -> ValueMap:
        if not request.required:
            return ValueMap({TRUTH_KEY: self.params.majority_truth})
        out: dict[str, Value] = {}
        for name in request.required:
            if name == TRUTH_KEY:
                out[name] = self.params.majority_truth
            elif wants_dollars(name, request.layer, request.source_text):
                out[name] = Money(self.params.constant_dollars)
            else:
                out[name] = self.params.majority_string
        return ValueMap(out)


# ---------------------------------------------------------------------------
# Oracle and heuristic resolvers


@dataclass(frozen=True)
class OracleResolver:
    """Returns gold values for the case's query subsection; knows nothing
    about any other subsection."""

    def resolve(self, request: ResolveRequest) -> ValueMap:
        if request.subsection_id != request.case.query:
            return ValueMap() if request.required else ValueMap({TRUTH_KEY: 0.0})
        gold = request.case.expected
        if not request.required:
            return ValueMap({TRUTH_KEY: float(gold.get(TRUTH_KEY, 0.0))})
        return ValueMap((n, gold[n]) for n in request.required if n in gold)


_CASE_DATE_RE = re.compile(r"\b([A-Z][a-z]{2,8})\.?\s+(\d{1,2})(?:st|nd|rd|th)?(?:,\s*\d{4})?")
_CASE_MONEY_RE = re.compile(r"\$([\d,]+)")
_CASE_YEAR_RE = re.compile(r"\b(?:19|20)\d{2}\b")
_CASE_NAME_RE = re.compile(r"\b[A-Z][a-z]+\b")
_MONTH_PREFIXES = frozenset("jan feb mar apr may jun jul aug sep oct nov dec".split())
_CAPITALIZED_STOP = frozenset(
    """in the on a an at for during since from and of to under over section his her
    they it no if""".split()
)


@dataclass(frozen=True)
class HeuristicResolver:
    """A case-reading stand-in for a learned value predictor.

    For each argument it guesses the value's category from the placeholder
    text (date, dollar amount, or person name by capitalization) and picks
    the candidate nearest to where the case description overlaps the
    placeholder wording; the truth score is the lexical overlap between the
    grounded subsection and the description.
    """

    def resolve(self, request: ResolveRequest) -> ValueMap:
        if not request.required:
            return ValueMap({TRUTH_KEY: overlap_score(request.text, request.case.description)})
        out: dict[str, Value] = {}
        for name in request.required:
            value = self._value_for(name, request)
            if value is not None:
                out[name] = value
        return ValueMap(out)

    def _value_for(self, name: str, request: ResolveRequest) -> Value | None:
        description = request.case.description
        spans = request.layer.spans_of(name)
        if spans and request.source_text:
            surface = " ".join(s.slice(request.source_text) for s in spans).lower()
        else:
            surface = name.lower()
        anchor = _anchor_position(surface, description)

        if any(w in surface for w in ("year", "day", "date", "week", "month", "caly")):
            candidates = [
                (m.start(), m.group())
                for m in _CASE_DATE_RE.finditer(description)
                if m.group(1).lower()[:3] in _MONTH_PREFIXES
            ]
            candidates += [(m.start(), m.group()) for m in _CASE_YEAR_RE.finditer(description)]
            return _nearest(candidates, anchor)
        if wants_dollars(name, request.layer, request.source_text):
            candidates = [
                (m.start(), Money(int(m.group(1).replace(",", ""))))
                for m in _CASE_MONEY_RE.finditer(description)
            ]
            return _nearest(candidates, anchor)
        used = {v for v in request.case.inputs.values() if isinstance(v, str)}
        used |= {v for v in request.known.values() if isinstance(v, str)}
        candidates = [
            (m.start(), m.group())
            for m in _CASE_NAME_RE.finditer(description)
            if m.group() not in used
            and m.group().lower() not in _CAPITALIZED_STOP
            and m.group().lower()[:3] not in _MONTH_PREFIXES
        ]
        return _nearest(candidates, anchor)


def _anchor_position(surface: str, description: str) -> int:
    lowered = description.lower()
    positions = [lowered.find(tok) for tok in surface.split() if tok in lowered]
    return min(positions) if positions else 0


def _nearest(candidates: list[tuple[int, Value]], anchor: int) -> Value | None:
    if not candidates:
        return None
    return min(candidates, key=lambda c: (abs(c[0] - anchor), c[0]))[1]


_OVERLAP_TOKEN_RE = re.compile(r"[a-z0-9$]+")


def overlap_score(grounded: str, description: str) -> float:
    """Fraction of the grounded subsection's distinct tokens that also occur
    in the case description; 1.0 for identical texts."""
    sub = set(_OVERLAP_TOKEN_RE.findall(grounded.lower()))
    if not sub:
        return 0.0
    case_tokens = set(_OVERLAP_TOKEN_RE.findall(description.lower()))
    return len(sub & case_tokens) / len(sub)
