"""Command-line front end tying the pipeline together.

Subcommands: ``run`` (fit one model from association/hierarchy files and
write artifacts), ``grid`` (alpha/beta search scored on validation truth),
``synth`` (write a planted instance in the ingest file formats) and ``eval``
(score an existing cluster TSV against a truth TSV).

Settings come from an optional flat ``key = value`` config file plus flags;
flags win. Exit codes: 0 success, 1 input or parse error, 2 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .clusters import co_membership_pairs, extract_clusters
from .exceptions import CmnmfError, NumericalError, ParameterError, ParseError
from .factorize import HierarchyMapping, HyperParams, fit_cmnmf, fit_nmf
from .grid import DEFAULT_GRID, GridSpec, emit_heatmap, run_grid
from .io import (
    read_clusters_tsv,
    read_universe,
    write_clusters_tsv,
    write_factor_tsv,
    write_json,
    write_metrics_csv,
    write_metrics_json,
    write_trace_csv,
    write_universe,
)
from .metrics import confusion, ground_truth, indices
from .ontology import (
    parse_associations,
    parse_hierarchy,
    parse_truth_pairs,
    split_by_levels,
    true_path_enrich,
)
from .oracle import plant, planted_pairs

_DEFAULTS = {
    "method": "cmnmf",
    "alpha": 1.0,
    "beta": 1.0,
    "seed": 0,
    "max_iters": 500,
    "rel_tol": 1e-6,
    "z_threshold": 3.0,
    "parent_level": 1,
    "child_level": 2,
    "true_path": False,
    "repeats": 10,
    "metric": "f1",
    "out": "out",
    "grid_alphas": DEFAULT_GRID,
    "grid_betas": DEFAULT_GRID,
}

_CONFIG_TYPES = {
    "associations": str,
    "hierarchy": str,
    "validation_truth": str,
    "test_truth": str,
    "out": str,
    "method": str,
    "metric": str,
    "parent_level": int,
    "child_level": int,
    "k": int,
    "seed": int,
    "max_iters": int,
    "repeats": int,
    "alpha": float,
    "beta": float,
    "rel_tol": float,
    "z_threshold": float,
    "true_path": bool,
    "grid_alphas": "float_list",
    "grid_betas": "float_list",
}


def _parse_bool(raw, path, lineno):
    low = raw.lower()
    if low in ("1", "true", "yes"):
        return True
    if low in ("0", "false", "no"):
        return False
    raise ParseError(f"expected a boolean, got {raw!r}", path=path, line=lineno)


def _float_list(raw):
    return tuple(float(v) for v in raw.split(",") if v.strip())


def load_config(path) -> dict:
    """Read a flat ``key = value`` config file."""
    cfg = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError("expected key = value", path=path, line=lineno)
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in _CONFIG_TYPES:
                raise ParseError(f"unknown config key {key!r}", path=path, line=lineno)
            typ = _CONFIG_TYPES[key]
            try:
                if typ is bool:
                    cfg[key] = _parse_bool(value, path, lineno)
                elif typ == "float_list":
                    cfg[key] = _float_list(value)
                else:
                    cfg[key] = typ(value)
            except ValueError:
                raise ParseError(
                    f"bad value {value!r} for {key}", path=path, line=lineno
                ) from None
    return cfg


def _merge_config(args) -> dict:
    cfg = dict(_DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(load_config(args.config))
    for key in _CONFIG_TYPES:
        value = getattr(args, key, None)
        if value is not None and value is not False:
            cfg[key] = value
    return cfg


def _require(cfg, *keys):
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise ParameterError(f"missing required setting(s): {', '.join(missing)}")


def _check_inputs_exist(cfg, *keys):
    for key in keys:
        path = cfg.get(key)
        if path is not None and not os.path.exists(path):
            raise FileNotFoundError(f"{key} file not found: {path}")


def _load_views(cfg):
    assoc = parse_associations(cfg["associations"])
    hier = parse_hierarchy(cfg["hierarchy"])
    if cfg["true_path"]:
        assoc = true_path_enrich(assoc, hier)
    return split_by_levels(assoc, hier, cfg["parent_level"], cfg["child_level"])


def _manifest(cfg, command, started, artifacts) -> dict:
    return {
        "command": command,
        "config": {k: list(v) if isinstance(v, tuple) else v for k, v in sorted(cfg.items())},
        "seed": cfg.get("seed"),
        "versions": {
            "cmnmf": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": sys.version.split()[0],
        },
        "wall_time_s": time.perf_counter() - started,
        "artifacts": sorted(str(a) for a in artifacts),
    }


class _ArtifactWriter:
    """Tracks written files so a failing command leaves no partial output."""

    def __init__(self, out_dir: Path):
        self.out = out_dir
        self.written: list[Path] = []

    def path(self, name) -> Path:
        p = self.out / name
        self.written.append(p)
        return p

    def discard_all(self):
        for p in self.written:
            try:
                p.unlink()
            except OSError:
                pass


def cmd_run(args) -> int:
    cfg = _merge_config(args)
    _require(cfg, "associations", "hierarchy", "k")
    _check_inputs_exist(cfg, "associations", "hierarchy", "validation_truth", "test_truth")
    started = time.perf_counter()

    views = _load_views(cfg)
    mapping = HierarchyMapping.from_matrix(views.m)
    method = cfg["method"]
    if method not in ("nmf", "colnmf", "cmnmf"):
        raise ParameterError(f"unknown method {method!r}")
    beta = 0.0 if method == "colnmf" else cfg["beta"]
    hp = HyperParams(
        alpha=cfg["alpha"],
        beta=beta,
        k=cfg["k"],
        max_iters=cfg["max_iters"],
        rel_tol=cfg["rel_tol"],
        seed=cfg["seed"],
    )
    if method == "nmf":
        state = fit_nmf(views.a1, hp)
    else:
        state = fit_cmnmf(views.a1, views.a2, mapping, hp)
    assign = extract_clusters(state.g, views.gene_labels, cfg["z_threshold"])

    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    writer = _ArtifactWriter(out)
    cluster_names = [f"c{i}" for i in range(hp.k)]
    try:
        write_factor_tsv(writer.path("g.tsv"), "gene", views.gene_labels, cluster_names, state.g)
        write_factor_tsv(writer.path("p1.tsv"), "cluster", cluster_names, views.parent_labels, state.p1)
        if state.p2 is not None:
            write_factor_tsv(writer.path("p2.tsv"), "cluster", cluster_names, views.child_labels, state.p2)
        write_clusters_tsv(writer.path("clusters.tsv"), assign)
        write_universe(writer.path("universe.txt"), views.gene_labels)
        write_trace_csv(writer.path("objective_trace.csv"), state.objective_trace)

        truth_path = cfg.get("test_truth") or cfg.get("validation_truth")
        if truth_path:
            truth = ground_truth(views.gene_labels, parse_truth_pairs(truth_path))
            conf = confusion(co_membership_pairs(assign), truth)
            idx = indices(conf)
            write_metrics_json(writer.path("metrics.json"), idx, conf)
            write_metrics_csv(writer.path("metrics.csv"), method, idx)

        manifest = _manifest(cfg, "run", started, writer.written)
        manifest["converged"] = state.converged
        manifest["iterations_run"] = state.iterations_run
        if truth_path:
            manifest["truth_source"] = str(truth_path)
        write_json(writer.path("manifest.json"), manifest)
    except Exception:
        writer.discard_all()
        raise
    return 0


def cmd_grid(args) -> int:
    cfg = _merge_config(args)
    _require(cfg, "associations", "hierarchy", "validation_truth", "k")
    if args.finalize:
        _require(cfg, "test_truth")
    _check_inputs_exist(cfg, "associations", "hierarchy", "validation_truth", "test_truth")
    started = time.perf_counter()

    views = _load_views(cfg)
    mapping = HierarchyMapping.from_matrix(views.m)
    truth_val = ground_truth(views.gene_labels, parse_truth_pairs(cfg["validation_truth"]))
    base = HyperParams(
        alpha=0.0,
        beta=0.0,
        k=cfg["k"],
        max_iters=cfg["max_iters"],
        rel_tol=cfg["rel_tol"],
        seed=cfg["seed"],
    )
    spec = GridSpec(
        alphas=tuple(cfg["grid_alphas"]),
        betas=tuple(cfg["grid_betas"]),
        repeats=cfg["repeats"],
        base=base,
        objective_metric=cfg["metric"],
    )
    result = run_grid(
        views.a1, views.a2, mapping, truth_val, spec,
        z_threshold=cfg["z_threshold"], jobs=args.jobs,
    )

    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    writer = _ArtifactWriter(out)
    try:
        emit_heatmap(result, writer.path("heatmap.csv"))
        with open(writer.path("cell_values.csv"), "w", encoding="utf-8") as fh:
            fh.write("alpha,beta,repeat,value\n")
            for cell in result.sorted_cells():
                for r, value in enumerate(cell.values):
                    fh.write(f"{cell.alpha!r},{cell.beta!r},{r},{value!r}\n")
        if result.best is None:
            raise NumericalError("every grid cell failed")
        best_cell = result.cells[result.best]
        write_json(
            writer.path("best_params.json"),
            {
                "alpha": best_cell.alpha,
                "beta": best_cell.beta,
                "metric": result.metric,
                "mean": best_cell.mean,
                "std": best_cell.std,
            },
        )

        if args.finalize:
            truth_test = ground_truth(views.gene_labels, parse_truth_pairs(cfg["test_truth"]))
            per_metric: dict[str, list[float]] = {}
            for r in range(spec.repeats):
                hp = replace(base, alpha=best_cell.alpha, beta=best_cell.beta,
                             seed=base.seed + r)
                state = fit_cmnmf(views.a1, views.a2, mapping, hp)
                assign = extract_clusters(state.g, views.gene_labels, cfg["z_threshold"])
                idx = indices(confusion(co_membership_pairs(assign), truth_test))
                for name, value in idx.items():
                    per_metric.setdefault(name, []).append(value)
            summary = {
                name: {
                    "mean": sum(vals) / len(vals),
                    "values": vals,
                }
                for name, vals in per_metric.items()
            }
            write_json(
                writer.path("final_metrics.json"),
                {
                    "alpha": best_cell.alpha,
                    "beta": best_cell.beta,
                    "repeats": spec.repeats,
                    "truth_source": str(cfg["test_truth"]),
                    "indices": summary,
                },
            )
            write_metrics_csv(
                writer.path("final_metrics.csv"),
                "cmnmf",
                {name: summary[name]["mean"] for name in summary},
            )

        write_json(writer.path("manifest.json"), _manifest(cfg, "grid", started, writer.written))
    except Exception:
        writer.discard_all()
        raise
    return 0


def cmd_synth(args) -> int:
    inst = plant(
        n=args.n,
        k=args.k,
        phenos_per_cluster_parent=args.phenos_parent,
        phenos_per_cluster_child=args.phenos_child,
        noise_rate=args.noise,
        seed=args.seed,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    with open(out / "associations.tsv", "w", encoding="utf-8") as fh:
        a1 = inst.a1.tocoo()
        a2 = inst.a2.tocoo()
        rows: list[tuple[int, str, str]] = []
        for i, j in zip(*a1.coords):
            rows.append((int(i), inst.gene_labels[i], inst.parent_labels[j]))
        for i, j in zip(*a2.coords):
            rows.append((int(i), inst.gene_labels[i], inst.child_labels[j]))
        for _, gene, pheno in sorted(rows):
            fh.write(f"{gene}\t{pheno}\n")

    with open(out / "hierarchy.tsv", "w", encoding="utf-8") as fh:
        m = inst.m.tocoo()
        for i, j in sorted(zip(*m.coords)):
            fh.write(f"{inst.parent_labels[i]}\t{inst.child_labels[j]}\n")

    truth = planted_pairs(inst)
    with open(out / "truth_pairs.tsv", "w", encoding="utf-8") as fh:
        for a, b in sorted(truth.positive_pairs):
            fh.write(f"{a}\t{b}\n")

    with open(out / "pathways.tsv", "w", encoding="utf-8") as fh:
        for gene in inst.gene_labels:
            fh.write(f"cluster{inst.true_assignment[gene]}\t{gene}\n")

    write_json(
        out / "instance.json",
        {
            "n": inst.n,
            "k": inst.k,
            "m1": inst.m1,
            "m2": inst.m2,
            "noise_rate": inst.noise_rate,
            "seed": args.seed,
        },
    )
    return 0


def cmd_eval(args) -> int:
    universe = read_universe(args.universe)
    assign = read_clusters_tsv(args.clusters, universe)
    truth = ground_truth(universe, parse_truth_pairs(args.truth))
    conf = confusion(co_membership_pairs(assign), truth)
    idx = indices(conf)
    report = {
        **idx,
        "tp": conf.tp,
        "fp": conf.fp,
        "fn": conf.fn,
        "tn": conf.tn,
    }
    print(json.dumps(report, sort_keys=True))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_metrics_json(out / "metrics.json", idx, conf)
        write_metrics_csv(out / "metrics.csv", args.method_name, idx)
    return 0


class _Parser(argparse.ArgumentParser):
    # usage mistakes are input errors: exit 1, reserving 2 for numerical failures
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(f"{self.prog}: error: {message}") from None


def _add_model_flags(p):
    p.add_argument("--config", help="flat key = value settings file")
    p.add_argument("--associations", help="gene<TAB>phenotype TSV")
    p.add_argument("--hierarchy", help="parent<TAB>child TSV or .obo subset")
    p.add_argument("--validation-truth", dest="validation_truth",
                   help="geneA<TAB>geneB pairs used for tuning")
    p.add_argument("--test-truth", dest="test_truth",
                   help="geneA<TAB>geneB pairs used for final reporting")
    p.add_argument("--parent-level", dest="parent_level", type=int)
    p.add_argument("--child-level", dest="child_level", type=int)
    p.add_argument("--true-path", dest="true_path", action="store_true", default=None,
                   help="propagate annotations to ancestor terms before splitting")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--k", type=int, help="number of latent clusters")
    p.add_argument("--seed", type=int)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--rel-tol", dest="rel_tol", type=float)
    p.add_argument("--z-threshold", dest="z_threshold", type=float)
    p.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cmnmf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_run = sub.add_parser("run", parents=[], help="fit one model and write artifacts")
    _add_model_flags(p_run)
    p_run.add_argument("--method", choices=("nmf", "colnmf", "cmnmf"))
    p_run.set_defaults(func=cmd_run)

    p_grid = sub.add_parser("grid", help="search an (alpha, beta) grid")
    _add_model_flags(p_grid)
    p_grid.add_argument("--grid-alphas", dest="grid_alphas", type=_float_list,
                        help="comma-separated alpha values")
    p_grid.add_argument("--grid-betas", dest="grid_betas", type=_float_list,
                        help="comma-separated beta values")
    p_grid.add_argument("--repeats", type=int)
    p_grid.add_argument("--metric", choices=("f1", "precision", "recall", "jaccard", "rand"))
    p_grid.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                        help="parallel workers for grid cells")
    p_grid.add_argument("--finalize", action="store_true",
                        help="re-run the best cell against the test truth")
    p_grid.set_defaults(func=cmd_grid)

    p_synth = sub.add_parser("synth", help="write a planted instance as input files")
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument("--n", type=int, default=9)
    p_synth.add_argument("--k", type=int, default=3)
    p_synth.add_argument("--phenos-parent", dest="phenos_parent", type=int, default=3)
    p_synth.add_argument("--phenos-child", dest="phenos_child", type=int, default=4)
    p_synth.add_argument("--noise", type=float, default=0.0)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.set_defaults(func=cmd_synth)

    p_eval = sub.add_parser("eval", help="score an existing cluster TSV")
    p_eval.add_argument("--clusters", required=True, help="gene<TAB>cluster_index TSV")
    p_eval.add_argument("--truth", required=True, help="geneA<TAB>geneB pairs TSV")
    p_eval.add_argument("--universe", required=True,
                        help="file listing every evaluated gene, one per line")
    p_eval.add_argument("--out", help="also write metrics files here")
    p_eval.add_argument("--method-name", dest="method_name", default="external")
    p_eval.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(exc.code, file=sys.stderr)
            return 1
        return exc.code if isinstance(exc.code, int) else 0
    except NumericalError as exc:
        print(f"cmnmf: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (CmnmfError, OSError) as exc:
        print(f"cmnmf: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
