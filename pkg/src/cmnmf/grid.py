"""Hyperparameter selection by seeded grid search over (alpha, beta).

Every cell runs the same set of seeded fits (seed, seed+1, ...), extracts
clusters, scores them against validation truth pairs, and records the
per-repeat values of the chosen index. Cells are independent pure
computations, so they may run in any order or in parallel; results are
always reduced by cell key, never by completion order.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from .clusters import co_membership_pairs, extract_clusters
from .exceptions import NumericalError, ParameterError
from .factorize import HierarchyMapping, HyperParams, fit_cmnmf
from .metrics import GroundTruthPairs, INDEX_NAMES, confusion, indices

__all__ = [
    "DEFAULT_GRID",
    "GridSpec",
    "GridCell",
    "GridResult",
    "run_grid",
    "emit_heatmap",
    "read_heatmap",
]

# Default search values for both alpha and beta: seven decades around 1.
DEFAULT_GRID = (0.001, 0.01, 0.1, 1.0, 10.0, 100.0, 1000.0)


@dataclass(frozen=True)
class GridSpec:
    """The (alpha, beta) grid, repeat count and scoring index for a search."""

    alphas: tuple[float, ...]
    betas: tuple[float, ...]
    repeats: int
    base: HyperParams
    objective_metric: str = "f1"

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(self.alphas))
        object.__setattr__(self, "betas", tuple(self.betas))
        if not self.alphas or not self.betas:
            raise ParameterError("alpha and beta lists must be nonempty")
        if self.repeats < 1:
            raise ParameterError("repeats must be a positive integer")
        if self.objective_metric not in INDEX_NAMES:
            raise ParameterError(
                f"objective_metric must be one of {INDEX_NAMES}, "
                f"got {self.objective_metric!r}"
            )


@dataclass(frozen=True)
class GridCell:
    alpha: float
    beta: float
    values: tuple[float, ...]
    mean: float | None
    std: float | None
    failed: bool


@dataclass(frozen=True)
class GridResult:
    """Per-cell score summaries plus the winning (alpha, beta)."""

    cells: dict[tuple[float, float], GridCell]
    best: tuple[float, float] | None
    metric: str

    def sorted_cells(self) -> list[GridCell]:
        return [self.cells[key] for key in sorted(self.cells)]


def _score_one(a1, a2, mapping, truth, hp, z_threshold, metric):
    state = fit_cmnmf(a1, a2, mapping, hp)
    assign = extract_clusters(state.g, truth.universe, z_threshold)
    return indices(confusion(co_membership_pairs(assign), truth))[metric]


def _grid_task(args):
    alpha, beta, repeat, a1, a2, mapping, truth, base, z_threshold, metric = args
    hp = replace(base, alpha=alpha, beta=beta, seed=base.seed + repeat)
    try:
        return _score_one(a1, a2, mapping, truth, hp, z_threshold, metric)
    except NumericalError as exc:
        return exc


def run_grid(
    a1,
    a2,
    mapping: HierarchyMapping,
    truth: GroundTruthPairs,
    spec: GridSpec,
    z_threshold: float = 3.0,
    jobs: int = 1,
) -> GridResult:
    """Evaluate every (alpha, beta) cell with ``spec.repeats`` seeded fits.

    The truth universe must be the gene labels of the factorized rows, in
    row order. A numerical failure in any repeat marks its whole cell as
    failed without aborting the rest of the grid. Deterministic given
    ``spec.base.seed``, for any ``jobs``.
    """
    if len(truth.universe) != a1.shape[0]:
        raise ParameterError(
            f"truth universe has {len(truth.universe)} genes; views have "
            f"{a1.shape[0]} rows"
        )
    tasks = [
        (alpha, beta, r, a1, a2, mapping, truth, spec.base, z_threshold,
         spec.objective_metric)
        for alpha in spec.alphas
        for beta in spec.betas
        for r in range(spec.repeats)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_grid_task, tasks))
    else:
        outcomes = [_grid_task(t) for t in tasks]

    cells: dict[tuple[float, float], GridCell] = {}
    per_cell: dict[tuple[float, float], list] = {}
    for (alpha, beta, r, *_), outcome in zip(tasks, outcomes):
        per_cell.setdefault((alpha, beta), []).append(outcome)
    for (alpha, beta), values in per_cell.items():
        if any(isinstance(v, Exception) for v in values):
            cells[(alpha, beta)] = GridCell(alpha, beta, (), None, None, True)
            continue
        mean = sum(values) / len(values)
        std = math.sqrt(sum((v - mean) ** 2 for v in values) / len(values))
        cells[(alpha, beta)] = GridCell(alpha, beta, tuple(values), mean, std, False)

    candidates = [c for c in cells.values() if not c.failed]
    best = None
    if candidates:
        top = min(candidates, key=lambda c: (-c.mean, c.alpha, c.beta))
        best = (top.alpha, top.beta)
    return GridResult(cells, best, spec.objective_metric)


def emit_heatmap(result: GridResult, path) -> None:
    """Write one CSV row per cell: ``alpha,beta,mean,std,failed``.

    Failed cells keep empty mean/std fields and set the flag. Floats are
    written with ``repr`` so a round-trip parse recovers them exactly.
    """
    if not result.cells:
        raise ValueError("empty grid result")
    lines = ["alpha,beta,mean,std,failed"]
    for cell in result.sorted_cells():
        if cell.failed:
            lines.append(f"{cell.alpha!r},{cell.beta!r},,,1")
        else:
            lines.append(f"{cell.alpha!r},{cell.beta!r},{cell.mean!r},{cell.std!r},0")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_heatmap(path) -> list[dict]:
    """Parse a heat-map CSV back into row dicts (None mean/std when failed)."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "alpha,beta,mean,std,failed":
            raise ValueError(f"unexpected heat-map header {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            alpha, beta, mean, std, failed = line.split(",")
            rows.append(
                {
                    "alpha": float(alpha),
                    "beta": float(beta),
                    "mean": float(mean) if mean else None,
                    "std": float(std) if std else None,
                    "failed": failed == "1",
                }
            )
    return rows
