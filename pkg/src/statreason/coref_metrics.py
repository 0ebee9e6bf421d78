"""Standard coreference metrics over mention partitions: MUC, CEAF, BLANC.

Partitions are collections of disjoint mention sets; both sides must cover
the same mention universe (mentions are given, not predicted). Degenerate
0/0 ratios score 0, so a linkless prediction scored against a gold partition
that has links comes out 0/0/0 under MUC.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .metrics import PRF, prf

Partition = list[frozenset]


def _as_partition(clusters) -> Partition:
    out = [frozenset(c) for c in clusters if len(c) > 0]
    mentions = [m for c in out for m in c]
    if len(mentions) != len(set(mentions)):
        raise ValueError("clusters are not disjoint")
    return out


def _check_universe(gold: Partition, pred: Partition) -> None:
    gold_mentions = {m for c in gold for m in c}
    pred_mentions = {m for c in pred for m in c}
    if gold_mentions != pred_mentions:
        raise ValueError("gold and predicted partitions cover different mentions")


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


def muc(gold_clusters, pred_clusters) -> PRF:
    """Link-based metric: recall error counts the partitions of each gold
    cluster under the prediction, and symmetrically for precision."""
    gold, pred = _as_partition(gold_clusters), _as_partition(pred_clusters)
    _check_universe(gold, pred)

    def vilain(a: Partition, b: Partition) -> tuple[int, int]:
        owner = {m: i for i, c in enumerate(b) for m in c}
        num = den = 0
        for cluster in a:
            parts = {owner[m] for m in cluster}
            num += len(cluster) - len(parts)
            den += len(cluster) - 1
        return num, den

    r_num, r_den = vilain(gold, pred)
    p_num, p_den = vilain(pred, gold)
    p, r = _ratio(p_num, p_den), _ratio(r_num, r_den)
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return PRF(p, r, f1)


def _ceaf(gold: Partition, pred: Partition, similarity) -> tuple[float, float, float]:
    """(best total similarity, self-sim of pred, self-sim of gold)."""
    if not gold or not pred:
        return 0.0, sum(similarity(c, c) for c in pred), sum(similarity(c, c) for c in gold)
    cost = np.zeros((len(gold), len(pred)))
    for i, g in enumerate(gold):
        for j, p in enumerate(pred):
            cost[i, j] = similarity(g, p)
    rows, cols = linear_sum_assignment(-cost)
    best = float(cost[rows, cols].sum())
    return best, sum(similarity(c, c) for c in pred), sum(similarity(c, c) for c in gold)


def _overlap(a: frozenset, b: frozenset) -> float:
    return float(len(a & b))


def _phi4(a: frozenset, b: frozenset) -> float:
    return 2.0 * len(a & b) / (len(a) + len(b))


def ceaf_m(gold_clusters, pred_clusters) -> PRF:
    """Mention-based CEAF: optimal one-to-one cluster alignment, overlap similarity."""
    gold, pred = _as_partition(gold_clusters), _as_partition(pred_clusters)
    _check_universe(gold, pred)
    best, p_den, r_den = _ceaf(gold, pred, _overlap)
    return prf(best, p_den, best, r_den)


def ceaf_e(gold_clusters, pred_clusters) -> PRF:
    """Entity-based CEAF: optimal alignment under the normalized phi4 similarity."""
    gold, pred = _as_partition(gold_clusters), _as_partition(pred_clusters)
    _check_universe(gold, pred)
    best, p_den, r_den = _ceaf(gold, pred, _phi4)
    return prf(best, p_den, best, r_den)


def _links(partition: Partition) -> set[frozenset]:
    out = set()
    for cluster in partition:
        for a, b in combinations(sorted(cluster, key=repr), 2):
            out.add(frozenset((a, b)))
    return out


def blanc(gold_clusters, pred_clusters) -> PRF:
    """Averaged coreference-link and non-coreference-link scores.

    When neither side has coreference links the non-coreference component
    stands alone, and vice versa.
    """
    gold, pred = _as_partition(gold_clusters), _as_partition(pred_clusters)
    _check_universe(gold, pred)
    mentions = sorted({m for c in gold for m in c}, key=repr)
    all_pairs = {frozenset((a, b)) for a, b in combinations(mentions, 2)}

    gold_coref, pred_coref = _links(gold), _links(pred)
    gold_non, pred_non = all_pairs - gold_coref, all_pairs - pred_coref

    def component(gold_set: set, pred_set: set) -> PRF:
        hit = len(gold_set & pred_set)
        p, r = _ratio(hit, len(pred_set)), _ratio(hit, len(gold_set))
        f1 = 2 * p * r / (p + r) if p + r else 0.0
        return PRF(p, r, f1)

    coref = component(gold_coref, pred_coref)
    non = component(gold_non, pred_non)
    if not gold_coref and not pred_coref:
        return non if all_pairs else PRF(1.0, 1.0, 1.0)
    if not gold_non and not pred_non:
        return coref
    return PRF(
        (coref.precision + non.precision) / 2,
        (coref.recall + non.recall) / 2,
        (coref.f1 + non.f1) / 2,
    )


COREF_METRICS = {"muc": muc, "ceaf_m": ceaf_m, "ceaf_e": ceaf_e, "blanc": blanc}
