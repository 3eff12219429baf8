"""Evaluation: filtered ranking, link-prediction metrics, classification.

Filtered ranks use the midrank tie rule: rank = 1 + (#survivors scoring
strictly higher) + (#tied survivors) / 2, after removing candidates that
form a known true triplet other than the probe itself. Classification
pools every (pair, relation) decision and computes rank-based ROC-AUC
and step-interpolated PR-AUC in exact rational arithmetic, so results
are reproducible to the bit and tie handling is unambiguous.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .data import FilterIndex, Triplet
from .errors import DomainError, EvaluationError
from .scorers import EmbeddingModel, score, score_all_candidates

_EXACT_LIMIT = 100_000  # decisions; beyond this AUCs fall back to floats


@dataclass
class RankResult:
    triplet: Triplet
    side: str
    rank: float          # 1-based; halves come from the midrank tie rule
    n_candidates: int    # survivors including the target
    n_filtered: int      # known-true competitors removed


@dataclass
class MetricsReport:
    task: str
    values: dict[str, float]
    counts: dict[str, int]
    config_hash: str = ""

    def to_text(self) -> str:
        lines = [f"task\t{self.task}"]
        for k, v in self.values.items():
            lines.append(f"{k}\t{v!r}")
        for k, v in self.counts.items():
            lines.append(f"{k}\t{v}")
        if self.config_hash:
            lines.append(f"config_hash\t{self.config_hash}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        keys = list(self.values) + list(self.counts)
        vals = [repr(self.values[k]) for k in self.values]
        vals += [str(self.counts[k]) for k in self.counts]
        return ",".join(keys) + "\n" + ",".join(vals) + "\n"


# ---------------------------------------------------------------------------
# filtered ranking


def _check_probe(model: EmbeddingModel, triplet: Triplet) -> None:
    if not (0 <= triplet.head < model.n_entities
            and 0 <= triplet.tail < model.n_entities
            and 0 <= triplet.relation < model.n_relations):
        raise EvaluationError(
            f"triplet {tuple(triplet)} outside the model's vocab "
            f"({model.n_entities} entities, {model.n_relations} relations)"
        )


def filtered_rank(model: EmbeddingModel, index: FilterIndex, triplet: Triplet,
                  side: str) -> RankResult:
    """Filtered midrank of the true entity among all candidates."""
    _check_probe(model, triplet)
    if side == "tail":
        target = triplet.tail
        known = index.tails_of(triplet.head, triplet.relation)
    elif side == "head":
        target = triplet.head
        known = index.heads_of(triplet.relation, triplet.tail)
    else:
        raise DomainError(f"side must be 'head' or 'tail', got {side!r}")
    scores = score_all_candidates(model, triplet, side)
    target_score = scores[target]
    greater = 0
    ties = 0
    n_filtered = 0
    for cand in range(model.n_entities):
        if cand == target:
            continue
        if cand in known:
            n_filtered += 1
            continue
        s = scores[cand]
        if s > target_score:
            greater += 1
        elif s == target_score:
            ties += 1
    rank = 1.0 + greater + 0.5 * ties
    return RankResult(triplet, side, rank, model.n_entities - n_filtered, n_filtered)


def rank_oracle(model: EmbeddingModel, index: FilterIndex, triplet: Triplet,
                side: str) -> float:
    """Recompute the filtered rank by materializing, sorting, and scanning.

    Independent of filtered_rank: scores come from per-candidate score()
    calls and the midrank is read off the sorted list.
    """
    _check_probe(model, triplet)
    if side == "tail":
        target = triplet.tail
        make = lambda c: Triplet(triplet.head, triplet.relation, c)
    elif side == "head":
        target = triplet.head
        make = lambda c: Triplet(c, triplet.relation, triplet.tail)
    else:
        raise DomainError(f"side must be 'head' or 'tail', got {side!r}")
    entries = []
    for cand in range(model.n_entities):
        if cand != target and make(cand) in index:
            continue
        entries.append((score(model, make(cand)), cand))
    entries.sort(key=lambda e: -e[0])
    target_score = next(s for s, c in entries if c == target)
    first = next(i for i, (s, _) in enumerate(entries) if s == target_score)
    group = sum(1 for s, _ in entries if s == target_score)
    # 1-based positions first+1 .. first+group; the midrank is their mean.
    return first + (group + 1) / 2.0


def all_ranks(model: EmbeddingModel, test: list[Triplet], index: FilterIndex) -> list[RankResult]:
    """Filtered ranks of every test triplet on both sides, tail then head."""
    if not test:
        raise EvaluationError("empty test set")
    out = []
    for trip in test:
        out.append(filtered_rank(model, index, trip, "tail"))
        out.append(filtered_rank(model, index, trip, "head"))
    return out


def link_prediction_metrics(
    model: EmbeddingModel,
    test: list[Triplet],
    index: FilterIndex,
    hits: tuple[int, ...] = (1, 3, 10),
    cfg_hash: str = "",
    ranks: list[RankResult] | None = None,
) -> MetricsReport:
    """Mean rank, mean reciprocal rank, and HITS@N over both sides."""
    if ranks is None:
        ranks = all_ranks(model, test, index)
    n = len(ranks)
    mr = sum(r.rank for r in ranks) / n
    mrr = sum(1.0 / r.rank for r in ranks) / n
    values = {"mr": mr, "mrr": mrr}
    for k in hits:
        values[f"hits@{k}"] = sum(1 for r in ranks if r.rank <= k) / n
    counts = {"n_test": len(test), "n_rank_queries": n,
              "n_entities": model.n_entities}
    return MetricsReport("link_prediction", values, counts, cfg_hash)


def rank_histogram_csv(ranks: list[RankResult]) -> str:
    """Plot data: count of rank queries at each distinct rank value."""
    buckets: dict[float, int] = {}
    for r in ranks:
        buckets[r.rank] = buckets.get(r.rank, 0) + 1
    rows = ["rank,count\n"]
    for val in sorted(buckets):
        rows.append(f"{val!r},{buckets[val]}\n")
    return "".join(rows)


# ---------------------------------------------------------------------------
# exact-arithmetic AUCs


def _tie_groups(labels, scores):
    """Sort decisions by score descending and merge equal-score groups.

    Returns a list of (tp_in_group, size) plus the positive/negative totals.
    """
    order = sorted(range(len(scores)), key=lambda i: -scores[i])
    groups = []
    i = 0
    while i < len(order):
        j = i
        tp = 0
        while j < len(order) and scores[order[j]] == scores[order[i]]:
            tp += 1 if labels[order[j]] else 0
            j += 1
        groups.append((tp, j - i))
        i = j
    n_pos = sum(1 for l in labels if l)
    n_neg = len(labels) - n_pos
    return groups, n_pos, n_neg


def _validate_decisions(labels, scores):
    if len(labels) != len(scores):
        raise EvaluationError(f"{len(labels)} labels vs {len(scores)} scores")
    if len(labels) == 0:
        raise EvaluationError("no decisions to score")
    n_pos = sum(1 for l in labels if l)
    if n_pos == 0 or n_pos == len(labels):
        raise EvaluationError("degenerate decisions: need both classes")


def roc_auc_exact(labels, scores) -> float:
    """ROC-AUC via the rank-sum statistic with midrank ties.

    Exact rational arithmetic up to 100k decisions, float beyond. Equals
    the trapezoidal area under the threshold-sweep ROC curve.
    """
    _validate_decisions(labels, scores)
    groups, n_pos, n_neg = _tie_groups(labels, scores)
    # Walk groups from the bottom of the ranking so positions ascend.
    pos2 = 0  # twice the rank-sum of positives
    base = 0  # decisions already consumed below the current group
    for tp, size in reversed(groups):
        # group spans 1-based positions base+1 .. base+size; midrank*2 is int
        pos2 += tp * (2 * base + size + 1)
        base += size
    u2 = pos2 - 2 * (n_pos * (n_pos + 1) // 2)
    if len(labels) > _EXACT_LIMIT:
        return u2 / (2.0 * n_pos * n_neg)
    return float(Fraction(u2, 2 * n_pos * n_neg))


def pr_auc_exact(labels, scores) -> float:
    """Step-interpolated PR-AUC (average precision over tie groups).

    AP = sum over threshold groups of (recall gain) * (precision at the
    group), no trapezoids. Exact rational arithmetic up to 100k decisions.
    """
    _validate_decisions(labels, scores)
    groups, n_pos, _ = _tie_groups(labels, scores)
    exact = len(labels) <= _EXACT_LIMIT
    ap = Fraction(0) if exact else 0.0
    tp = 0
    seen = 0
    for g_tp, size in groups:
        tp += g_tp
        seen += size
        if g_tp == 0:
            continue
        if exact:
            ap += Fraction(g_tp, n_pos) * Fraction(tp, seen)
        else:
            ap += (g_tp / n_pos) * (tp / seen)
    return float(ap)


def roc_points(labels, scores) -> list[tuple[float, float]]:
    """(fpr, tpr) at every distinct threshold, for plot data."""
    _validate_decisions(labels, scores)
    groups, n_pos, n_neg = _tie_groups(labels, scores)
    pts = [(0.0, 0.0)]
    tp = fp = 0
    for g_tp, size in groups:
        tp += g_tp
        fp += size - g_tp
        pts.append((fp / n_neg, tp / n_pos))
    return pts


def pr_points(labels, scores) -> list[tuple[float, float]]:
    """(recall, precision) at every distinct threshold, for plot data."""
    _validate_decisions(labels, scores)
    groups, n_pos, _ = _tie_groups(labels, scores)
    pts = []
    tp = seen = 0
    for g_tp, size in groups:
        tp += g_tp
        seen += size
        pts.append((tp / n_pos, tp / seen))
    return pts


def curve_csv(points: list[tuple[float, float]], xname: str, yname: str) -> str:
    rows = [f"{xname},{yname}\n"]
    for x, y in points:
        rows.append(f"{x!r},{y!r}\n")
    return "".join(rows)


# ---------------------------------------------------------------------------
# interaction-type classification


@dataclass
class PairDecisions:
    """All relation decisions for one unordered test pair."""

    pair: tuple[int, int]
    true_relations: set[int]
    scores: np.ndarray  # (n_relations,)


def classification_decisions(
    model: EmbeddingModel,
    test: list[Triplet],
    known: list[Triplet],
) -> tuple[list[PairDecisions], int]:
    """Score every relation for each unordered test pair.

    A relation is a true label when the full dataset contains it for the
    pair in either direction; the relation's score is the better of the
    two orientations. Returns (pairs, n_excluded) where excluded pairs
    had no true label inside the relation vocabulary.
    """
    if not test:
        raise EvaluationError("empty test set")
    known_set = set(map(tuple, known))
    pair_keys: list[tuple[int, int]] = []
    seen_pairs = set()
    for trip in test:
        _check_probe(model, trip)
        key = (min(trip.head, trip.tail), max(trip.head, trip.tail))
        if key not in seen_pairs:
            seen_pairs.add(key)
            pair_keys.append(key)
    true_by_pair: dict[tuple[int, int], set[int]] = {k: set() for k in seen_pairs}
    for h, r, t in known_set:
        key = (min(h, t), max(h, t))
        if key in true_by_pair and r < model.n_relations:
            true_by_pair[key].add(r)

    out = []
    n_excluded = 0
    for a, b in pair_keys:
        true_rels = true_by_pair[(a, b)]
        if not true_rels:
            n_excluded += 1
            continue
        svec = np.empty(model.n_relations)
        for r in range(model.n_relations):
            fwd = score(model, Triplet(a, r, b))
            rev = score(model, Triplet(b, r, a))
            svec[r] = fwd if fwd >= rev else rev
        out.append(PairDecisions((a, b), true_rels, svec))
    return out, n_excluded


def precision_at_k(pairs: list[PairDecisions], k: int) -> float:
    """Mean over pairs of |top-k relations that are true| / k.

    Score ties break toward the lower relation id; k always divides.
    """
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    total = Fraction(0)
    for pd in pairs:
        order = sorted(range(len(pd.scores)), key=lambda r: (-pd.scores[r], r))
        hit = sum(1 for r in order[:k] if r in pd.true_relations)
        total += Fraction(hit, k)
    return float(total / len(pairs))


def ddi_classification(
    model: EmbeddingModel,
    test: list[Triplet],
    known: list[Triplet],
    ks: tuple[int, ...] = (1, 3, 5),
    cfg_hash: str = "",
) -> MetricsReport:
    """Micro-averaged ROC-AUC / PR-AUC and P@K over test pairs."""
    pairs, n_excluded = classification_decisions(model, test, known)
    if not pairs:
        raise EvaluationError("every test pair was excluded (no true labels)")
    labels: list[bool] = []
    scores: list[float] = []
    for pd in pairs:
        for r in range(len(pd.scores)):
            labels.append(r in pd.true_relations)
            scores.append(float(pd.scores[r]))
    values = {
        "roc_auc": roc_auc_exact(labels, scores),
        "pr_auc": pr_auc_exact(labels, scores),
    }
    for k in ks:
        values[f"p@{k}"] = precision_at_k(pairs, k)
    counts = {"n_pairs": len(pairs), "n_decisions": len(labels),
              "n_excluded": n_excluded}
    return MetricsReport("classification", values, counts, cfg_hash)
