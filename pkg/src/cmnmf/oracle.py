"""Planted-cluster instance generation and independent checking oracles.

The generators build small block-structured gene-phenotype views with a
known gene-to-cluster assignment, optionally corrupted by bit-flip noise.
The oracles re-derive quantities the production code computes (objective
value, pair confusion, collective-NMF iterates) from first principles with
deliberately naive code, sharing no logic with the modules they check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .exceptions import ParameterError
from .clusters import ClusterAssignment
from .metrics import GroundTruthPairs, PairConfusion

__all__ = [
    "PlantedInstance",
    "plant",
    "planted_pairs",
    "brute_force_pair_metrics",
    "naive_objective",
    "colnmf_reference_trajectory",
]


@dataclass(frozen=True)
class PlantedInstance:
    """Block-structured two-view instance with known cluster structure.

    With ``noise_rate`` 0, genes of one planted cluster have identical
    annotation rows in each view, and the mapping links each parent-block
    phenotype to exactly the child-block phenotypes of the same cluster.
    """

    n: int
    m1: int
    m2: int
    k: int
    gene_labels: tuple[str, ...]
    parent_labels: tuple[str, ...]
    child_labels: tuple[str, ...]
    true_assignment: dict[str, int]
    a1: sparse.csr_array
    a2: sparse.csr_array
    m: sparse.csr_array
    noise_rate: float


def _block_view(n, k, genes_per, phenos_per):
    base = np.zeros((n, k * phenos_per), dtype=bool)
    for i in range(n):
        c = i // genes_per
        base[i, c * phenos_per:(c + 1) * phenos_per] = True
    return base


def plant(
    n: int,
    k: int,
    phenos_per_cluster_parent: int,
    phenos_per_cluster_child: int,
    noise_rate: float,
    seed: int,
) -> PlantedInstance:
    """Generate a planted instance, deterministic given ``seed``.

    Noise flips each annotation bit of the two views independently with
    probability ``noise_rate``; the mapping matrix stays clean, since it
    stands for fixed prior structure rather than noisy annotations.
    """
    if k < 1 or n < 1 or n % k != 0:
        raise ParameterError(f"n={n} must be a positive multiple of k={k}")
    if phenos_per_cluster_parent < 1 or phenos_per_cluster_child < 1:
        raise ParameterError("phenotype block sizes must be positive")
    if not 0.0 <= noise_rate < 0.5:
        raise ParameterError(f"noise_rate={noise_rate} must lie in [0, 0.5)")

    genes_per = n // k
    m1 = k * phenos_per_cluster_parent
    m2 = k * phenos_per_cluster_child
    base1 = _block_view(n, k, genes_per, phenos_per_cluster_parent)
    base2 = _block_view(n, k, genes_per, phenos_per_cluster_child)

    rng = np.random.default_rng(seed)
    a1_bits = base1 ^ (rng.random((n, m1)) < noise_rate)
    a2_bits = base2 ^ (rng.random((n, m2)) < noise_rate)

    m_bits = np.zeros((m1, m2), dtype=bool)
    for c in range(k):
        rows = slice(c * phenos_per_cluster_parent, (c + 1) * phenos_per_cluster_parent)
        cols = slice(c * phenos_per_cluster_child, (c + 1) * phenos_per_cluster_child)
        m_bits[rows, cols] = True

    gene_labels = tuple(f"g{i:03d}" for i in range(n))
    parent_labels = tuple(f"pp{j:03d}" for j in range(m1))
    child_labels = tuple(f"cp{j:03d}" for j in range(m2))
    true_assignment = {g: i // genes_per for i, g in enumerate(gene_labels)}
    return PlantedInstance(
        n=n,
        m1=m1,
        m2=m2,
        k=k,
        gene_labels=gene_labels,
        parent_labels=parent_labels,
        child_labels=child_labels,
        true_assignment=true_assignment,
        a1=sparse.csr_array(a1_bits.astype(np.float64)),
        a2=sparse.csr_array(a2_bits.astype(np.float64)),
        m=sparse.csr_array(m_bits.astype(np.float64)),
        noise_rate=noise_rate,
    )


def planted_pairs(inst: PlantedInstance) -> GroundTruthPairs:
    """Ground truth for an instance: pairs of genes sharing a planted cluster."""
    labels = inst.gene_labels
    pairs = set()
    for i in range(len(labels)):
        for j in range(i + 1, len(labels)):
            if inst.true_assignment[labels[i]] == inst.true_assignment[labels[j]]:
                a, b = labels[i], labels[j]
                pairs.add((a, b) if a < b else (b, a))
    return GroundTruthPairs(labels, frozenset(pairs))


def brute_force_pair_metrics(
    assign: ClusterAssignment, truth: GroundTruthPairs
) -> PairConfusion:
    """Pair confusion by plain double loop over all unordered gene pairs.

    Quadratic on purpose; keep the universe at a few hundred genes.
    """
    member_of = dict(zip(assign.gene_labels, assign.memberships))
    genes = list(truth.universe)
    tp = fp = fn = tn = 0
    for i in range(len(genes)):
        for j in range(i + 1, len(genes)):
            a, b = genes[i], genes[j]
            together = bool(member_of.get(a, frozenset()) & member_of.get(b, frozenset()))
            key = (a, b) if a < b else (b, a)
            related = key in truth.positive_pairs
            if together and related:
                tp += 1
            elif together:
                fp += 1
            elif related:
                fn += 1
            else:
                tn += 1
    return PairConfusion(tp, fp, fn, tn)


def naive_objective(a1, a2, mapping, state, hp) -> float:
    """Literal loop evaluation of the joint loss on densified inputs.

    Sums the two squared reconstruction gaps entry by entry and the
    hierarchy penalty pair by pair; exists solely to check the optimized
    objective and its trace-form penalty.
    """
    a1d = np.asarray(a1.toarray(), dtype=float) if sparse.issparse(a1) else np.asarray(a1, float)
    a2d = np.asarray(a2.toarray(), dtype=float) if sparse.issparse(a2) else np.asarray(a2, float)
    md = np.asarray(mapping.m.toarray(), dtype=float)
    g, p1, p2 = state.g, state.p1, state.p2
    k = g.shape[1]

    total = 0.0
    for i in range(a1d.shape[0]):
        for j in range(a1d.shape[1]):
            recon = sum(g[i, t] * p1[t, j] for t in range(k))
            total += (a1d[i, j] - recon) ** 2
    for i in range(a2d.shape[0]):
        for j in range(a2d.shape[1]):
            recon = sum(g[i, t] * p2[t, j] for t in range(k))
            total += hp.alpha * (a2d[i, j] - recon) ** 2
    for i in range(md.shape[0]):
        for j in range(md.shape[1]):
            if md[i, j]:
                gap = sum((p1[t, i] - p2[t, j]) ** 2 for t in range(k))
                total += hp.beta * gap
    return total


def colnmf_reference_trajectory(a1, a2, alpha: float, k: int, iters: int, seed: int):
    """Per-iteration factors of a from-scratch collective NMF (shared G).

    Two views, one shared gene factor, no hierarchy coupling. Written
    directly from the multiplicative rules with the same uniform-(0, 1]
    seeding scheme and denominator floor as the production solver, so
    trajectories are comparable entry by entry.
    """
    eps = 1e-12
    n, m1 = a1.shape
    m2 = a2.shape[1]
    rng = np.random.default_rng(seed)
    g = 1.0 - rng.random((n, k))
    p1 = 1.0 - rng.random((k, m1))
    p2 = 1.0 - rng.random((k, m2))

    steps = []
    for _ in range(iters):
        num = a1 @ p1.T + alpha * (a2 @ p2.T)
        den = g @ (p1 @ p1.T) + alpha * (g @ (p2 @ p2.T))
        g = g * num / np.maximum(den, eps)

        num = (a1.T @ g).T
        den = (g.T @ g) @ p1
        p1 = p1 * num / np.maximum(den, eps)

        num = alpha * (a2.T @ g).T
        den = alpha * ((g.T @ g) @ p2)
        p2 = p2 * num / np.maximum(den, eps)

        steps.append((g, p1, p2))
    return steps
