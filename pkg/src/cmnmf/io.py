"""Readers and writers for the run artifacts.

All floats are written with ``repr`` (shortest round-trip form), so a rerun
with the same inputs produces byte-identical numeric files.
"""

from __future__ import annotations

import json

import numpy as np

from .clusters import ClusterAssignment
from .exceptions import EmptyInputError, ParseError
from .metrics import PairConfusion

__all__ = [
    "write_factor_tsv",
    "read_factor_tsv",
    "write_clusters_tsv",
    "read_clusters_tsv",
    "write_universe",
    "read_universe",
    "write_trace_csv",
    "write_metrics_json",
    "write_metrics_csv",
    "write_json",
]


def _fmt(x: float) -> str:
    return repr(float(x))


def write_factor_tsv(path, corner: str, row_labels, col_labels, values) -> None:
    """Write a labeled matrix: header of column labels, one row per label."""
    values = np.asarray(values)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join([corner, *col_labels]) + "\n")
        for label, row in zip(row_labels, values):
            fh.write("\t".join([label, *(_fmt(v) for v in row)]) + "\n")


def read_factor_tsv(path):
    """Inverse of :func:`write_factor_tsv`; returns (rows, cols, matrix)."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        col_labels = tuple(header[1:])
        row_labels = []
        rows = []
        for line in fh:
            fields = line.rstrip("\n").split("\t")
            row_labels.append(fields[0])
            rows.append([float(v) for v in fields[1:]])
    return tuple(row_labels), col_labels, np.array(rows, dtype=np.float64)


def write_clusters_tsv(path, assign: ClusterAssignment) -> None:
    """One ``gene<TAB>cluster_index`` line per membership."""
    with open(path, "w", encoding="utf-8") as fh:
        for gene, ms in zip(assign.gene_labels, assign.memberships):
            for c in sorted(ms):
                fh.write(f"{gene}\t{c}\n")


def read_clusters_tsv(path, universe) -> ClusterAssignment:
    """Rebuild an assignment over ``universe`` from a membership TSV.

    Genes of the universe absent from the file have no memberships.
    """
    memberships: dict[str, set[int]] = {g: set() for g in universe}
    max_cluster = -1
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise ParseError("expected gene<TAB>cluster_index", path=path, line=lineno)
            gene, cluster = fields
            try:
                c = int(cluster)
            except ValueError:
                raise ParseError(
                    f"cluster index {cluster!r} is not an integer", path=path, line=lineno
                ) from None
            if gene not in memberships:
                raise ParseError(
                    f"gene {gene!r} not in the evaluation universe", path=path, line=lineno
                )
            memberships[gene].add(c)
            max_cluster = max(max_cluster, c)
    return ClusterAssignment(
        tuple(universe),
        tuple(frozenset(memberships[g]) for g in universe),
        max_cluster + 1,
    )


def write_universe(path, labels) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for label in labels:
            fh.write(label + "\n")


def read_universe(path) -> tuple[str, ...]:
    labels = []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if line and not line.startswith("#"):
                labels.append(line)
    if not labels:
        raise EmptyInputError(f"{path}: no gene identifiers")
    return tuple(labels)


def write_trace_csv(path, trace) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("iteration,objective\n")
        for i, value in enumerate(trace, start=1):
            fh.write(f"{i},{_fmt(value)}\n")


def write_metrics_json(path, idx: dict, conf: PairConfusion) -> None:
    payload = {
        "precision": idx["precision"],
        "recall": idx["recall"],
        "f1": idx["f1"],
        "jaccard": idx["jaccard"],
        "rand": idx["rand"],
        "tp": conf.tp,
        "fp": conf.fp,
        "fn": conf.fn,
        "tn": conf.tn,
    }
    write_json(path, payload)


def write_metrics_csv(path, method: str, idx: dict) -> None:
    """One table-style row: method name plus the five indices."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("method,f1,precision,recall,jaccard,rand\n")
        fh.write(
            ",".join(
                [
                    method,
                    _fmt(idx["f1"]),
                    _fmt(idx["precision"]),
                    _fmt(idx["recall"]),
                    _fmt(idx["jaccard"]),
                    _fmt(idx["rand"]),
                ]
            )
            + "\n"
        )


def write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
