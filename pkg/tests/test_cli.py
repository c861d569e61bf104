"""End-to-end command-line tests over the public file interfaces."""

import json
from collections import defaultdict

import pytest

from cmnmf.cli import main
from cmnmf.grid import read_heatmap
from cmnmf.ontology import parse_associations, parse_hierarchy, split_by_levels


@pytest.fixture
def synth_dir(tmp_path):
    data = tmp_path / "data"
    assert main(["synth", "--out", str(data), "--n", "9", "--k", "3",
                 "--noise", "0.0", "--seed", "1"]) == 0
    return data


def _run_args(data, out, extra=()):
    return [
        "run",
        "--associations", str(data / "associations.tsv"),
        "--hierarchy", str(data / "hierarchy.tsv"),
        "--test-truth", str(data / "truth_pairs.tsv"),
        "--k", "3",
        "--z-threshold", "1.0",
        "--seed", "7",
        "--out", str(out),
        *extra,
    ]


class TestSynth:
    def test_files_round_trip_through_parsers(self, synth_dir):
        assoc = parse_associations(synth_dir / "associations.tsv")
        hier = parse_hierarchy(synth_dir / "hierarchy.tsv")
        views = split_by_levels(assoc, hier, 1, 2)
        assert views.a1.shape == (9, 9)
        assert views.a2.shape == (9, 12)
        assert views.m.nnz == 36

    def test_noise_bounds(self, tmp_path):
        ok = main(["synth", "--out", str(tmp_path / "a"), "--noise", "0.4"])
        bad = main(["synth", "--out", str(tmp_path / "b"), "--noise", "0.6"])
        assert ok == 0
        assert bad == 1

    def test_same_seed_byte_identical(self, tmp_path):
        for sub in ("one", "two"):
            assert main(["synth", "--out", str(tmp_path / sub), "--n", "6",
                         "--k", "2", "--noise", "0.25", "--seed", "11"]) == 0
        for name in ("associations.tsv", "hierarchy.tsv", "truth_pairs.tsv",
                     "pathways.tsv"):
            one = (tmp_path / "one" / name).read_bytes()
            two = (tmp_path / "two" / name).read_bytes()
            assert one == two


class TestRun:
    def test_cmnmf_writes_all_artifacts(self, synth_dir, tmp_path):
        out = tmp_path / "out"
        assert main(_run_args(synth_dir, out)) == 0
        for name in ("g.tsv", "p1.tsv", "p2.tsv", "clusters.tsv",
                     "universe.txt", "objective_trace.csv",
                     "metrics.json", "metrics.csv", "manifest.json"):
            assert (out / name).exists(), name
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seed"] == 7
        assert manifest["config"]["k"] == 3
        metrics = json.loads((out / "metrics.json").read_text())
        assert metrics["f1"] == 1.0  # noise-free planted instance

    def test_nmf_has_no_p2(self, synth_dir, tmp_path):
        out = tmp_path / "out"
        assert main(_run_args(synth_dir, out, ["--method", "nmf"])) == 0
        assert (out / "g.tsv").exists()
        assert not (out / "p2.tsv").exists()

    def test_rerun_byte_identical(self, synth_dir, tmp_path):
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        assert main(_run_args(synth_dir, out1)) == 0
        assert main(_run_args(synth_dir, out2)) == 0
        for name in ("g.tsv", "p1.tsv", "p2.tsv", "metrics.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_config_file_with_flag_override(self, synth_dir, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "\n".join(
                [
                    f"associations = {synth_dir / 'associations.tsv'}",
                    f"hierarchy = {synth_dir / 'hierarchy.tsv'}",
                    "k = 3",
                    "seed = 5",
                    "z_threshold = 1.0",
                    "method = colnmf",
                ]
            )
            + "\n",
            encoding="utf-8",
        )
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg), "--seed", "9",
                     "--out", str(out)]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seed"] == 9  # flag wins over file
        assert manifest["config"]["method"] == "colnmf"

    def test_obo_hierarchy_gives_identical_factors(self, synth_dir, tmp_path):
        edges = [
            line.split("\t")
            for line in (synth_dir / "hierarchy.tsv").read_text().splitlines()
        ]
        parents = defaultdict(list)
        terms = {}
        for parent, child in edges:
            terms.setdefault(parent, None)
            terms.setdefault(child, None)
            parents[child].append(parent)
        stanzas = []
        for term in terms:
            lines = ["[Term]", f"id: {term}"]
            lines += [f"is_a: {p} ! parent term" for p in parents.get(term, [])]
            stanzas.append("\n".join(lines))
        obo = tmp_path / "hierarchy.obo"
        obo.write_text("format-version: 1.2\n\n" + "\n\n".join(stanzas) + "\n",
                       encoding="utf-8")

        out_tsv, out_obo = tmp_path / "tsv", tmp_path / "obo"
        assert main(_run_args(synth_dir, out_tsv)) == 0
        assert main([
            "run",
            "--associations", str(synth_dir / "associations.tsv"),
            "--hierarchy", str(obo),
            "--test-truth", str(synth_dir / "truth_pairs.tsv"),
            "--k", "3", "--z-threshold", "1.0", "--seed", "7",
            "--out", str(out_obo),
        ]) == 0
        assert (out_tsv / "g.tsv").read_bytes() == (out_obo / "g.tsv").read_bytes()

    def test_true_path_flag(self, synth_dir, tmp_path):
        out = tmp_path / "out"
        assert main(_run_args(synth_dir, out, ["--true-path"])) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["true_path"] is True

    def test_missing_input_exits_one(self, tmp_path):
        code = main(["run", "--associations", str(tmp_path / "nope.tsv"),
                     "--hierarchy", str(tmp_path / "nope2.tsv"),
                     "--k", "2", "--out", str(tmp_path / "out")])
        assert code == 1

    def test_validation_truth_used_when_no_test_truth(self, synth_dir, tmp_path):
        out = tmp_path / "out"
        code = main([
            "run",
            "--associations", str(synth_dir / "associations.tsv"),
            "--hierarchy", str(synth_dir / "hierarchy.tsv"),
            "--validation-truth", str(synth_dir / "truth_pairs.tsv"),
            "--k", "3", "--z-threshold", "1.0", "--out", str(out),
        ])
        assert code == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["truth_source"].endswith("truth_pairs.tsv")
        assert (out / "metrics.json").exists()

    def test_numerical_failure_exits_two(self, synth_dir, tmp_path, monkeypatch):
        import cmnmf.cli as cli_mod
        from cmnmf.exceptions import NumericalError

        def blow_up(*args, **kwargs):
            raise NumericalError("went non-finite", iteration=12)

        monkeypatch.setattr(cli_mod, "fit_cmnmf", blow_up)
        code = main(_run_args(synth_dir, tmp_path / "out"))
        assert code == 2

    def test_partial_outputs_removed_on_failure(self, synth_dir, tmp_path):
        bad_truth = tmp_path / "bad_truth.tsv"
        bad_truth.write_text("not a pair line\n", encoding="utf-8")
        out = tmp_path / "out"
        code = main([
            "run",
            "--associations", str(synth_dir / "associations.tsv"),
            "--hierarchy", str(synth_dir / "hierarchy.tsv"),
            "--test-truth", str(bad_truth),
            "--k", "3", "--out", str(out),
        ])
        assert code == 1
        assert not (out / "g.tsv").exists()
        assert not (out / "manifest.json").exists()


class TestGrid:
    def _grid_args(self, data, out, jobs="1", extra=()):
        return [
            "grid",
            "--associations", str(data / "associations.tsv"),
            "--hierarchy", str(data / "hierarchy.tsv"),
            "--validation-truth", str(data / "truth_pairs.tsv"),
            "--k", "3",
            "--z-threshold", "1.0",
            "--seed", "3",
            "--max-iters", "80",
            "--grid-alphas", "0.5,1.0",
            "--grid-betas", "0.0,1.0",
            "--repeats", "2",
            "--jobs", jobs,
            "--out", str(out),
            *extra,
        ]

    def test_two_by_two_grid(self, synth_dir, tmp_path):
        out = tmp_path / "grid"
        assert main(self._grid_args(synth_dir, out)) == 0
        rows = read_heatmap(out / "heatmap.csv")
        assert len(rows) == 4
        best = json.loads((out / "best_params.json").read_text())
        ranked = sorted(
            (r for r in rows if not r["failed"]),
            key=lambda r: (-r["mean"], r["alpha"], r["beta"]),
        )
        assert (best["alpha"], best["beta"]) == (ranked[0]["alpha"], ranked[0]["beta"])

    def test_finalize_writes_test_report(self, synth_dir, tmp_path):
        out = tmp_path / "grid"
        args = self._grid_args(
            synth_dir, out,
            extra=["--test-truth", str(synth_dir / "truth_pairs.tsv"), "--finalize"],
        )
        assert main(args) == 0
        final = json.loads((out / "final_metrics.json").read_text())
        assert final["repeats"] == 2
        assert set(final["indices"]) == {"precision", "recall", "f1", "jaccard", "rand"}
        assert (out / "final_metrics.csv").exists()

    def test_jobs_do_not_change_results(self, synth_dir, tmp_path):
        out1, out4 = tmp_path / "j1", tmp_path / "j4"
        assert main(self._grid_args(synth_dir, out1, jobs="1")) == 0
        assert main(self._grid_args(synth_dir, out4, jobs="4")) == 0
        assert (out1 / "heatmap.csv").read_bytes() == (out4 / "heatmap.csv").read_bytes()


class TestEval:
    def test_eval_run_output(self, synth_dir, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(_run_args(synth_dir, out)) == 0
        code = main([
            "eval",
            "--clusters", str(out / "clusters.tsv"),
            "--truth", str(synth_dir / "truth_pairs.tsv"),
            "--universe", str(out / "universe.txt"),
        ])
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["f1"] == 1.0
        assert report["tp"] == 9

    def test_eval_writes_files(self, synth_dir, tmp_path, capsys):
        run_out = tmp_path / "out"
        assert main(_run_args(synth_dir, run_out)) == 0
        eval_out = tmp_path / "eval"
        code = main([
            "eval",
            "--clusters", str(run_out / "clusters.tsv"),
            "--truth", str(synth_dir / "truth_pairs.tsv"),
            "--universe", str(run_out / "universe.txt"),
            "--out", str(eval_out),
            "--method-name", "cmnmf",
        ])
        assert code == 0
        capsys.readouterr()
        assert (eval_out / "metrics.json").exists()
        row = (eval_out / "metrics.csv").read_text().splitlines()[1]
        assert row.startswith("cmnmf,")


def test_usage_error_exits_one(capsys):
    assert main(["run", "--unknown-flag"]) == 1
    capsys.readouterr()
