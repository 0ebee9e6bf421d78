"""Scoring: span identification, the three accuracy families, pair analysis.

Conventions that the formulas leave open are pinned here once: the binary
threshold is inclusive at 0.5, a missing prediction scores 0 in its family
and stays in the denominator, an empty prediction set against a non-empty
gold set has precision 0, and empty-vs-empty is perfect.
"""

from __future__ import annotations

import datetime
import math
import re
from dataclasses import dataclass
from fractions import Fraction

from .model import Money, Span, TRUTH_KEY, Value, value_kind


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.precision, self.recall, self.f1)


def prf(matched_p: float, total_pred: float, matched_r: float, total_gold: float) -> PRF:
    if total_pred == 0 and total_gold == 0:
        return PRF(1.0, 1.0, 1.0)
    p = matched_p / total_pred if total_pred else 0.0
    r = matched_r / total_gold if total_gold else 0.0
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return PRF(p, r, f1)


def span_prf(gold: list[Span] | tuple, pred: list[Span] | tuple) -> PRF:
    """Exact-boundary span matching."""
    gold_set, pred_set = set(gold), set(pred)
    matched = len(gold_set & pred_set)
    return prf(matched, len(pred_set), matched, len(gold_set))


def exact_match_coref(gold_clusters, pred_clusters) -> PRF:
    """Credit a predicted cluster only when it equals a gold cluster as a set.

    Clusters may be given over span indices or over (start, end) pairs, as
    long as both sides use the same mention representation.
    """
    gold_sets = {frozenset(c) for c in gold_clusters}
    pred_sets = {frozenset(c) for c in pred_clusters}
    correct = len(gold_sets & pred_sets)
    return prf(correct, len(pred_sets), correct, len(gold_sets))


# ---------------------------------------------------------------------------
# Accuracy families


def numerical_accuracy(y, y_hat) -> int:
    """1 iff the relative error |y - y_hat| / max(0.1|y|, 5000) is strictly < 1.

    Exact for integer and Fraction inputs, so the boundary y_hat = y +- scale
    scores 0 with no floating-point slack.
    """
    if y_hat is None:
        return 0
    y = y.dollars if isinstance(y, Money) else y
    y_hat = y_hat.dollars if isinstance(y_hat, Money) else y_hat
    if isinstance(y, float) or isinstance(y_hat, float):
        scale = max(0.1 * abs(y), 5000.0)
    else:
        scale = max(Fraction(abs(y)) / 10, Fraction(5000))
    return 1 if abs(y - y_hat) / scale < 1 else 0


def binary_accuracy(gold_truth: float, pred_truth: float | None, threshold: float = 0.5) -> int:
    """1 iff the thresholded prediction matches the gold label; absent scores 0."""
    if pred_truth is None:
        return 0
    return 1 if (pred_truth >= threshold) == (gold_truth == 1.0) else 0


_WS_RE = re.compile(r"\s+")
_MONTHS = {
    m: i + 1
    for i, m in enumerate(
        "january february march april may june july august september october november december".split()
    )
}
_DATEISH_RE = re.compile(
    r"([A-Za-z]{3,9})\.?\s+(\d{1,2})(?:st|nd|rd|th)?(?:\s*,\s*(\d{4}))?$"
)


def canonical_string(value: Value) -> str:
    """Stable comparison form: dates to ISO, whitespace collapsed."""
    if isinstance(value, datetime.date):
        return value.isoformat()
    if isinstance(value, Money):
        return f"${value.dollars}"
    if isinstance(value, tuple):
        return "[" + ", ".join(sorted(canonical_string(v) for v in value)) + "]"
    text = _WS_RE.sub(" ", str(value)).strip()
    m = _DATEISH_RE.match(text)
    if m:
        month = _MONTHS.get(m.group(1).lower()) or _MONTHS.get(
            next((k for k in _MONTHS if k.startswith(m.group(1).lower()[:3])), "")
        )
        if month is not None:
            day = int(m.group(2))
            if m.group(3):
                return f"{int(m.group(3)):04d}-{month:02d}-{day:02d}"
            return f"{month:02d}-{day:02d}"
    return text


def string_accuracy(gold: Value, pred: Value | None) -> int:
    """Exact match after canonicalization; lists compare as multisets."""
    if pred is None:
        return 0
    if isinstance(gold, tuple) != isinstance(pred, tuple):
        return 0
    if isinstance(gold, tuple):
        gold_items = sorted(canonical_string(v) for v in gold)
        pred_items = sorted(canonical_string(v) for v in pred)
        return 1 if gold_items == pred_items else 0
    return 1 if canonical_string(gold) == canonical_string(pred) else 0


FAMILIES = ("truth", "dollar", "string")


def family_of(name: str, gold_value: Value) -> str:
    if name == TRUTH_KEY:
        return "truth"
    if value_kind(gold_value) == "money":
        return "dollar"
    return "string"


@dataclass(frozen=True)
class ArgScore:
    case_id: str
    argument: str
    family: str
    score: int


def score_arguments(
    expected, predicted, case_id: str = "", threshold: float = 0.5
) -> list[ArgScore]:
    """Score every gold argument of one case against the predictions."""
    out = []
    for name, gold in expected.items():
        pred = predicted.get(name)
        family = family_of(name, gold)
        if family == "truth":
            score = binary_accuracy(float(gold), None if pred is None else float(pred), threshold)
        elif family == "dollar":
            score = 0 if pred is None or value_kind(pred) not in ("money", "number") else numerical_accuracy(gold, pred)
        else:
            score = string_accuracy(gold, pred)
        out.append(ArgScore(case_id, name, family, score))
    return out


def unified_accuracy(scores: list[ArgScore]) -> float:
    """Sample-weighted average over all scored arguments."""
    if not scores:
        raise ValueError("no scored arguments")
    return sum(s.score for s in scores) / len(scores)


def family_accuracy(scores: list[ArgScore], family: str) -> tuple[float, int]:
    """(accuracy, n) over one family; n may be 0."""
    member = [s.score for s in scores if s.family == family]
    if not member:
        return (0.0, 0)
    return (sum(member) / len(member), len(member))


def confidence_interval(accuracy: float, n: int) -> float:
    """Half-width of the normal-approximation 90% binomial interval."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return 1.645 * math.sqrt(accuracy * (1.0 - accuracy) / n)


# ---------------------------------------------------------------------------
# Positive/negative pair analysis


@dataclass(frozen=True)
class PairReport:
    identical: int
    fully_correct: int
    split: int
    unpaired: tuple[str, ...]

    @property
    def pairs(self) -> int:
        return self.identical + self.fully_correct + self.split


def pair_consistency(
    cases, decisions: dict[str, bool | None], correctness: dict[str, int]
) -> PairReport:
    """Group positive/negative case pairs and compare their answers.

    `decisions` holds each case's thresholded truth answer (None counts as
    False), `correctness` its binary score. Pairs answered identically get
    exactly one side right; pairs answered differently are either fully
    correct or split (both wrong).
    """
    groups: dict[str, list] = {}
    unpaired = []
    for case in cases:
        if case.pair_id is None:
            unpaired.append(case.id)
        else:
            groups.setdefault(case.pair_id, []).append(case)
    identical = fully = split = 0
    for pair_id in sorted(groups):
        members = groups[pair_id]
        if len(members) != 2:
            unpaired.extend(c.id for c in members)
            continue
        a, b = members
        if bool(decisions.get(a.id)) == bool(decisions.get(b.id)):
            identical += 1
        elif correctness.get(a.id, 0) and correctness.get(b.id, 0):
            fully += 1
        else:
            split += 1
    return PairReport(identical, fully, split, tuple(sorted(unpaired)))
