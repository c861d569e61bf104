"""Planted instances and the independent checking oracles."""

import numpy as np
import pytest
from scipy import sparse

from cmnmf.clusters import ClusterAssignment, co_membership_pairs
from cmnmf.exceptions import ParameterError
from cmnmf.factorize import FactorizationState, HierarchyMapping, HyperParams
from cmnmf.matrix import densify
from cmnmf.metrics import confusion, ground_truth
from cmnmf.oracle import (
    brute_force_pair_metrics,
    colnmf_reference_trajectory,
    naive_objective,
    plant,
    planted_pairs,
)


class TestPlant:
    def test_nine_gene_three_block_structure(self):
        inst = plant(9, 3, 3, 4, 0.0, seed=0)
        assert (inst.n, inst.m1, inst.m2) == (9, 9, 12)
        a1 = densify(inst.a1)
        a2 = densify(inst.a2)
        m = densify(inst.m)
        for i in range(9):
            c = i // 3
            # gene annotated exactly to its cluster's phenotype blocks
            assert a1[i, 3 * c:3 * (c + 1)].sum() == 3
            assert a1[i].sum() == 3
            assert a2[i, 4 * c:4 * (c + 1)].sum() == 4
            assert a2[i].sum() == 4
        for p in range(9):
            c = p // 3
            assert m[p, 4 * c:4 * (c + 1)].sum() == 4
            assert m[p].sum() == 4

    def test_same_cluster_rows_identical_at_zero_noise(self):
        inst = plant(12, 4, 2, 3, 0.0, seed=1)
        a1 = densify(inst.a1)
        for c in range(4):
            block = a1[3 * c:3 * (c + 1)]
            assert (block == block[0]).all()

    def test_deterministic_given_seed(self):
        one = plant(8, 2, 2, 2, 0.3, seed=42)
        two = plant(8, 2, 2, 2, 0.3, seed=42)
        assert (densify(one.a1) == densify(two.a1)).all()
        assert (densify(one.a2) == densify(two.a2)).all()

    def test_noise_flips_bits(self):
        clean = plant(8, 2, 2, 2, 0.0, seed=5)
        noisy = plant(8, 2, 2, 2, 0.4, seed=5)
        assert (densify(clean.a1) != densify(noisy.a1)).any()
        # the mapping carries prior structure and stays clean
        assert (densify(clean.m) == densify(noisy.m)).all()

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"n": 7, "k": 3},
            {"n": 9, "k": 3, "noise_rate": 0.6},
            {"n": 9, "k": 3, "phenos_per_cluster_parent": 0},
        ],
    )
    def test_rejects_bad_parameters(self, kwargs):
        full = {
            "n": 9, "k": 3,
            "phenos_per_cluster_parent": 2, "phenos_per_cluster_child": 2,
            "noise_rate": 0.0, "seed": 0,
        }
        full.update(kwargs)
        with pytest.raises(ParameterError):
            plant(**full)

    def test_planted_pairs_equal_true_co_memberships(self):
        inst = plant(9, 3, 2, 2, 0.0, seed=2)
        assign = ClusterAssignment(
            inst.gene_labels,
            tuple(frozenset({inst.true_assignment[g]}) for g in inst.gene_labels),
            inst.k,
        )
        assert planted_pairs(inst).positive_pairs == co_membership_pairs(assign)


class TestBruteForcePairMetrics:
    def test_matches_confusion_exactly(self):
        rng = np.random.default_rng(3)
        for _ in range(15):
            n = int(rng.integers(1, 30))
            k = int(rng.integers(1, 5))
            labels = tuple(f"g{i:03d}" for i in range(n))
            assign = ClusterAssignment(
                labels,
                tuple(
                    frozenset(int(c) for c in range(k) if rng.random() < 0.4)
                    for _ in range(n)
                ),
                k,
            )
            truth_pairs = [
                (labels[i], labels[j])
                for i in range(n)
                for j in range(i + 1, n)
                if rng.random() < 0.2
            ]
            truth = ground_truth(labels, truth_pairs)
            fast = confusion(co_membership_pairs(assign), truth)
            slow = brute_force_pair_metrics(assign, truth)
            assert fast == slow

    def test_single_false_positive(self):
        assign = ClusterAssignment(
            ("a", "b"), (frozenset({0}), frozenset({0})), 1
        )
        truth = ground_truth(["a", "b"], [])
        c = brute_force_pair_metrics(assign, truth)
        assert (c.tp, c.fp, c.fn, c.tn) == (0, 1, 0, 0)

    def test_single_gene_universe(self):
        assign = ClusterAssignment(("a",), (frozenset({0}),), 1)
        truth = ground_truth(["a"], [])
        c = brute_force_pair_metrics(assign, truth)
        assert (c.tp, c.fp, c.fn, c.tn) == (0, 0, 0, 0)


def _state(g, p1, p2):
    return FactorizationState(
        np.asarray(g, float), np.asarray(p1, float), np.asarray(p2, float),
        (), 0, False,
    )


class TestNaiveObjective:
    def test_beta_term_zero_when_mapping_empty(self):
        rng = np.random.default_rng(4)
        a1 = sparse.csr_array(np.zeros((3, 2)))
        a2 = sparse.csr_array(np.zeros((3, 4)))
        mapping = HierarchyMapping.from_matrix(sparse.csr_array(np.zeros((2, 4))))
        state = _state(np.zeros((3, 2)), rng.random((2, 2)), rng.random((2, 4)))
        hp = HyperParams(alpha=0.0, beta=100.0, k=2)
        assert naive_objective(a1, a2, mapping, state, hp) == 0.0

    def test_beta_term_counts_k_per_mapped_pair(self):
        # P1 all ones, P2 all zeros: every mapped pair contributes k
        k, m1, m2 = 3, 2, 5
        a1 = sparse.csr_array(np.zeros((1, m1)))
        a2 = sparse.csr_array(np.zeros((1, m2)))
        rng = np.random.default_rng(5)
        m = sparse.csr_array((rng.random((m1, m2)) < 0.5).astype(float))
        mapping = HierarchyMapping.from_matrix(m)
        state = _state(np.zeros((1, k)), np.ones((k, m1)), np.zeros((k, m2)))
        hp = HyperParams(alpha=0.0, beta=1.0, k=k)
        assert naive_objective(a1, a2, mapping, state, hp) == k * m.nnz


class TestColnmfReference:
    def test_shapes_and_nonnegativity(self):
        inst = plant(8, 2, 2, 2, 0.2, seed=6)
        steps = colnmf_reference_trajectory(inst.a1, inst.a2, 0.5, 2, 5, seed=1)
        assert len(steps) == 5
        for g, p1, p2 in steps:
            assert g.shape == (8, 2)
            assert p1.shape == (2, inst.m1)
            assert p2.shape == (2, inst.m2)
            assert (g >= 0).all() and (p1 >= 0).all() and (p2 >= 0).all()
