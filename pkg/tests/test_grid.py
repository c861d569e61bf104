"""Grid search determinism, best-cell selection and heat-map round-trips."""

import pytest

from cmnmf.exceptions import ParameterError
from cmnmf.factorize import HierarchyMapping, HyperParams, fit_cmnmf
from cmnmf.clusters import co_membership_pairs, extract_clusters
from cmnmf.grid import (
    DEFAULT_GRID,
    GridCell,
    GridResult,
    GridSpec,
    emit_heatmap,
    read_heatmap,
    run_grid,
)
from cmnmf.metrics import confusion, indices
from cmnmf.oracle import plant, planted_pairs

Z = 1.0  # suits k=3 rows, where the largest attainable z-score is sqrt(2)


@pytest.fixture(scope="module")
def problem():
    inst = plant(9, 3, 3, 4, 0.2, seed=8)
    mapping = HierarchyMapping.from_matrix(inst.m)
    truth = planted_pairs(inst)
    return inst, mapping, truth


def _base(seed=100):
    return HyperParams(alpha=0.0, beta=0.0, k=3, max_iters=60, rel_tol=1e-9, seed=seed)


class TestGridSpec:
    def test_default_grid_covers_seven_decades(self):
        assert DEFAULT_GRID == (0.001, 0.01, 0.1, 1.0, 10.0, 100.0, 1000.0)
        spec = GridSpec(alphas=DEFAULT_GRID, betas=DEFAULT_GRID, repeats=10,
                        base=_base())
        assert len(spec.alphas) * len(spec.betas) * spec.repeats == 490

    def test_rejects_empty_lists(self):
        with pytest.raises(ParameterError):
            GridSpec(alphas=(), betas=(1.0,), repeats=1, base=_base())

    def test_rejects_unknown_metric(self):
        with pytest.raises(ParameterError):
            GridSpec(alphas=(1.0,), betas=(1.0,), repeats=1, base=_base(),
                     objective_metric="accuracy")

    def test_rejects_zero_repeats(self):
        with pytest.raises(ParameterError):
            GridSpec(alphas=(1.0,), betas=(1.0,), repeats=0, base=_base())


class TestRunGrid:
    def test_single_cell_equals_direct_run(self, problem):
        inst, mapping, truth = problem
        spec = GridSpec(alphas=(1.0,), betas=(2.0,), repeats=2, base=_base())
        result = run_grid(inst.a1, inst.a2, mapping, truth, spec, z_threshold=Z)
        direct = []
        for r in range(2):
            hp = HyperParams(alpha=1.0, beta=2.0, k=3, max_iters=60,
                             rel_tol=1e-9, seed=100 + r)
            state = fit_cmnmf(inst.a1, inst.a2, mapping, hp)
            assign = extract_clusters(state.g, truth.universe, Z)
            direct.append(indices(confusion(co_membership_pairs(assign), truth))["f1"])
        cell = result.cells[(1.0, 2.0)]
        assert cell.values == tuple(direct)
        assert result.best == (1.0, 2.0)

    def test_deterministic_across_calls(self, problem):
        inst, mapping, truth = problem
        spec = GridSpec(alphas=(0.5, 1.0), betas=(0.0, 1.0), repeats=2, base=_base())
        r1 = run_grid(inst.a1, inst.a2, mapping, truth, spec, z_threshold=Z)
        r2 = run_grid(inst.a1, inst.a2, mapping, truth, spec, z_threshold=Z)
        assert {k: c.values for k, c in r1.cells.items()} == \
            {k: c.values for k, c in r2.cells.items()}
        assert r1.best == r2.best

    def test_parallel_matches_serial(self, problem):
        inst, mapping, truth = problem
        spec = GridSpec(alphas=(0.5, 1.0), betas=(0.0, 1.0), repeats=2, base=_base())
        serial = run_grid(inst.a1, inst.a2, mapping, truth, spec, z_threshold=Z, jobs=1)
        parallel = run_grid(inst.a1, inst.a2, mapping, truth, spec, z_threshold=Z, jobs=4)
        assert {k: c.values for k, c in serial.cells.items()} == \
            {k: c.values for k, c in parallel.cells.items()}
        assert serial.best == parallel.best

    def test_best_is_argmax_with_lexicographic_ties(self):
        cells = {
            (1.0, 1.0): GridCell(1.0, 1.0, (0.5,), 0.5, 0.0, False),
            (0.1, 2.0): GridCell(0.1, 2.0, (0.5,), 0.5, 0.0, False),
            (0.1, 0.5): GridCell(0.1, 0.5, (0.4,), 0.4, 0.0, False),
        }
        candidates = [c for c in cells.values() if not c.failed]
        top = min(candidates, key=lambda c: (-c.mean, c.alpha, c.beta))
        assert (top.alpha, top.beta) == (0.1, 2.0)

    def test_universe_size_checked(self, problem):
        inst, mapping, truth = problem
        from cmnmf.metrics import ground_truth
        short = ground_truth(truth.universe[:-1], [])
        spec = GridSpec(alphas=(1.0,), betas=(1.0,), repeats=1, base=_base())
        with pytest.raises(ParameterError):
            run_grid(inst.a1, inst.a2, mapping, short, spec)

    def test_numerical_failure_marks_cell_without_aborting(self, problem, monkeypatch):
        import cmnmf.grid as grid_mod
        from cmnmf.exceptions import NumericalError

        real = grid_mod._score_one

        def flaky(a1, a2, mapping, truth, hp, z_threshold, metric):
            if hp.alpha == 0.5:
                raise NumericalError("boom", iteration=3)
            return real(a1, a2, mapping, truth, hp, z_threshold, metric)

        monkeypatch.setattr(grid_mod, "_score_one", flaky)
        inst, mapping, truth = problem
        spec = GridSpec(alphas=(0.5, 1.0), betas=(1.0,), repeats=2, base=_base())
        result = run_grid(inst.a1, inst.a2, mapping, truth, spec, z_threshold=Z)
        assert result.cells[(0.5, 1.0)].failed
        assert not result.cells[(1.0, 1.0)].failed
        assert result.best == (1.0, 1.0)


class TestHeatmap:
    def test_round_trip_recovers_means_exactly(self, problem, tmp_path):
        inst, mapping, truth = problem
        spec = GridSpec(alphas=(0.1, 1.0), betas=(0.0, 10.0), repeats=2, base=_base())
        result = run_grid(inst.a1, inst.a2, mapping, truth, spec, z_threshold=Z)
        path = tmp_path / "heatmap.csv"
        emit_heatmap(result, path)
        rows = read_heatmap(path)
        assert len(rows) == 4
        for row in rows:
            cell = result.cells[(row["alpha"], row["beta"])]
            assert row["mean"] == cell.mean
            assert row["std"] == cell.std
        # sorted by (alpha, beta)
        keys = [(r["alpha"], r["beta"]) for r in rows]
        assert keys == sorted(keys)

    def test_failed_cell_row(self, tmp_path):
        result = GridResult(
            cells={
                (1.0, 1.0): GridCell(1.0, 1.0, (0.25,), 0.25, 0.0, False),
                (1.0, 2.0): GridCell(1.0, 2.0, (), None, None, True),
            },
            best=(1.0, 1.0),
            metric="f1",
        )
        path = tmp_path / "heatmap.csv"
        emit_heatmap(result, path)
        rows = read_heatmap(path)
        assert rows[1]["failed"] is True
        assert rows[1]["mean"] is None
        text = path.read_text()
        assert text.splitlines()[0] == "alpha,beta,mean,std,failed"
