"""Pairwise external validation of cluster assignments.

Every unordered gene pair in the evaluation universe is classified as
predicted-together (co-clustered) or not, and as truly-related or not, and
the resulting pair confusion drives the five indices reported: precision,
recall, F1, Jaccard index and Rand index. Division by zero (empty
predictions or empty truth) yields 0 so sweeps stay total.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .exceptions import UniverseError

__all__ = [
    "GroundTruthPairs",
    "PairConfusion",
    "ground_truth",
    "pathways_to_pairs",
    "confusion",
    "indices",
    "INDEX_NAMES",
]

# Report column order used for CSV rows.
INDEX_NAMES = ("f1", "precision", "recall", "jaccard", "rand")


def _pair(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class GroundTruthPairs:
    """Known positive gene pairs over an ordered gene universe."""

    universe: tuple[str, ...]
    positive_pairs: frozenset[tuple[str, str]]


def ground_truth(universe, pairs: Iterable[tuple[str, str]]) -> GroundTruthPairs:
    """Canonicalize raw pairs against ``universe``.

    Self-pairs and pairs touching genes outside the universe are silently
    filtered: truth sources routinely cover more genes than were factorized.
    """
    universe = tuple(universe)
    if len(set(universe)) != len(universe):
        raise ValueError("universe contains duplicate gene identifiers")
    known = set(universe)
    kept = frozenset(
        _pair(a, b) for a, b in pairs if a != b and a in known and b in known
    )
    return GroundTruthPairs(universe, kept)


@dataclass(frozen=True)
class PairConfusion:
    """Counts of unordered gene pairs by predicted/true co-membership."""

    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def pathways_to_pairs(
    membership: Mapping[str, Iterable[str]], universe
) -> GroundTruthPairs:
    """Positive pairs are genes sharing at least one pathway, within universe."""
    universe = tuple(universe)
    known = set(universe)
    pairs: set[tuple[str, str]] = set()
    for genes in membership.values():
        inside = sorted(set(genes) & known)
        for i in range(len(inside)):
            for j in range(i + 1, len(inside)):
                pairs.add((inside[i], inside[j]))
    return GroundTruthPairs(universe, frozenset(pairs))


def confusion(
    predicted: Iterable[tuple[str, str]], truth: GroundTruthPairs
) -> PairConfusion:
    """Classify all n(n-1)/2 unordered universe pairs against ``truth``."""
    known = set(truth.universe)
    pred: set[tuple[str, str]] = set()
    for a, b in predicted:
        if a == b or a not in known or b not in known:
            raise UniverseError(f"predicted pair ({a!r}, {b!r}) outside the universe")
        pred.add(_pair(a, b))
    pos = truth.positive_pairs
    n = len(truth.universe)
    total = n * (n - 1) // 2
    tp = len(pred & pos)
    fp = len(pred) - tp
    fn = len(pos) - tp
    tn = total - tp - fp - fn
    return PairConfusion(tp, fp, fn, tn)


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def indices(c: PairConfusion) -> dict[str, float]:
    """The five external indices of a pair confusion; 0/0 forms give 0."""
    precision = _ratio(c.tp, c.tp + c.fp)
    recall = _ratio(c.tp, c.tp + c.fn)
    f1 = _ratio(2.0 * precision * recall, precision + recall)
    jaccard = _ratio(c.tp, c.tp + c.fp + c.fn)
    rand = _ratio(c.tp + c.tn, c.total)
    return {
        "precision": precision,
        "recall": recall,
        "f1": f1,
        "jaccard": jaccard,
        "rand": rand,
    }
