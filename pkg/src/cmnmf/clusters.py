"""Turning a learned gene factor into discrete, possibly overlapping clusters.

Each gene row of G is z-scored (population standard deviation) and the gene
joins every cluster whose entry reaches the threshold; entries below it are
treated as zero. Rows with zero spread yield no memberships. A gene may pass
the threshold in several columns, so clusters can overlap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ClusterAssignment", "extract_clusters", "co_membership_pairs"]


@dataclass(frozen=True)
class ClusterAssignment:
    """Per-gene sets of cluster indices out of ``k`` clusters."""

    gene_labels: tuple[str, ...]
    memberships: tuple[frozenset[int], ...]
    k: int

    def members(self, cluster: int) -> tuple[str, ...]:
        """Genes belonging to ``cluster``, in gene-label order."""
        return tuple(
            g
            for g, ms in zip(self.gene_labels, self.memberships)
            if cluster in ms
        )


def extract_clusters(g, gene_labels, z_threshold: float = 3.0) -> ClusterAssignment:
    """Threshold row z-scores of the gene factor into cluster memberships.

    The default threshold of 3 suits factorizations with many clusters; for
    small k the largest attainable row z-score is sqrt(k - 1), so pick a
    threshold below that when k is small.
    """
    g = np.asarray(g, dtype=np.float64)
    if g.ndim != 2 or g.shape[1] < 1:
        raise ValueError(f"expected a 2-d factor matrix, got shape {g.shape}")
    if g.shape[0] != len(gene_labels):
        raise ValueError(
            f"{len(gene_labels)} labels for {g.shape[0]} factor rows"
        )
    means = g.mean(axis=1, keepdims=True)
    stds = g.std(axis=1, keepdims=True)  # population form (divide by k)
    flat = (stds == 0.0).ravel()
    z = (g - means) / np.where(stds == 0.0, 1.0, stds)
    memberships = tuple(
        frozenset() if flat[i] else frozenset(np.flatnonzero(z[i] >= z_threshold).tolist())
        for i in range(g.shape[0])
    )
    return ClusterAssignment(tuple(gene_labels), memberships, g.shape[1])


def co_membership_pairs(assign: ClusterAssignment) -> frozenset[tuple[str, str]]:
    """Unordered gene pairs sharing at least one cluster.

    Pairs are canonicalized as lexicographically sorted label tuples.
    """
    by_cluster: dict[int, list[str]] = {}
    for gene, ms in zip(assign.gene_labels, assign.memberships):
        for c in ms:
            by_cluster.setdefault(c, []).append(gene)
    pairs: set[tuple[str, str]] = set()
    for members in by_cluster.values():
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                a, b = members[i], members[j]
                pairs.add((a, b) if a < b else (b, a))
    return frozenset(pairs)
