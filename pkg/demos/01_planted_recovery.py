"""Recovering planted gene modules, with and without the hierarchy prior.

Builds a small block-structured gene-phenotype instance (9 genes in 3
modules, annotated at two ontology levels), fits the joint two-view model,
and compares module recovery against plain single-view NMF on the
concatenated matrix as annotation noise grows.

Run:  python demos/01_planted_recovery.py
"""

import numpy as np
from scipy import sparse

from cmnmf import HierarchyMapping, HyperParams, fit_cmnmf, fit_nmf
from cmnmf.clusters import co_membership_pairs, extract_clusters
from cmnmf.metrics import confusion, indices
from cmnmf.oracle import plant, planted_pairs

Z_THRESHOLD = 1.0  # k=3 rows cap the z-score at sqrt(2), so 3.0 would be empty
SEEDS = range(10)


def pair_f1(g, labels, truth):
    assign = extract_clusters(g, labels, Z_THRESHOLD)
    return indices(confusion(co_membership_pairs(assign), truth))["f1"]


print("=== noise-free instance ===")
inst = plant(n=9, k=3, phenos_per_cluster_parent=2, phenos_per_cluster_child=3,
             noise_rate=0.0, seed=100)
mapping = HierarchyMapping.from_matrix(inst.m)
truth = planted_pairs(inst)
print(f"views: A1 {inst.a1.shape}, A2 {inst.a2.shape}, mapping {inst.m.shape}")
print(f"planted co-membership pairs: {len(truth.positive_pairs)}")

for seed in list(SEEDS)[:3]:
    hp = HyperParams(alpha=1.0, beta=1.0, k=3, max_iters=300, rel_tol=1e-9, seed=seed)
    state = fit_cmnmf(inst.a1, inst.a2, mapping, hp)
    f1 = pair_f1(state.g, inst.gene_labels, truth)
    print(f"seed {seed}: converged after {state.iterations_run} iterations, "
          f"pair F1 = {f1:.3f}")

print()
print("=== joint model vs plain NMF under annotation noise ===")
print(f"{'noise':>6} {'joint':>8} {'plain NMF':>10}")
for noise in (0.0, 0.1, 0.15, 0.2, 0.25):
    joint_scores, plain_scores = [], []
    for seed in SEEDS:
        noisy = plant(9, 3, 2, 3, noise, seed=100 + seed)
        noisy_map = HierarchyMapping.from_matrix(noisy.m)
        noisy_truth = planted_pairs(noisy)
        hp = HyperParams(alpha=1.0, beta=1.0, k=3, max_iters=300,
                         rel_tol=1e-9, seed=seed)
        state = fit_cmnmf(noisy.a1, noisy.a2, noisy_map, hp)
        joint_scores.append(pair_f1(state.g, noisy.gene_labels, noisy_truth))

        concat = sparse.csr_array(sparse.hstack([noisy.a1, noisy.a2]))
        plain = fit_nmf(concat, hp)
        plain_scores.append(pair_f1(plain.g, noisy.gene_labels, noisy_truth))
    print(f"{noise:>6.2f} {np.mean(joint_scores):>8.3f} {np.mean(plain_scores):>10.3f}")

print()
print("The hierarchy penalty ties the two phenotype factors together through")
print("the parent-child mapping, which keeps gene modules coherent when the")
print("annotations themselves get noisy.")
