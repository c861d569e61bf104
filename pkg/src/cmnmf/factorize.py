"""Joint nonnegative factorization of two-level association matrices.

The model factorizes the parent-level view ``A1 (n x m1)`` and child-level
view ``A2 (n x m2)`` with a shared gene factor ``G (n x k)`` and per-level
phenotype factors ``P1 (k x m1)``, ``P2 (k x m2)``, minimizing

    ||A1 - G P1||_F^2 + alpha ||A2 - G P2||_F^2
        + beta * sum_ij M_ij ||P1[:, i] - P2[:, j]||^2

subject to G, P1, P2 >= 0, where ``M`` is the binary parent-child mapping
matrix. The penalty term pulls the factor columns of phenotypes that are
hierarchy neighbours toward each other. With ``beta = 0`` the model is a
collective two-view NMF; with ``alpha = beta = 0`` the second view is inert
and the G/P1 updates coincide with plain single-view NMF on ``A1``.

Minimization is by alternating multiplicative updates (G, then P1, then
P2), each of which keeps its factor nonnegative and does not increase the
loss. Writing ``D1 = diag(row sums of M)`` and ``D2 = diag(col sums of M)``:

    G   <- G   * (A1 P1^T + alpha A2 P2^T) / (G P1 P1^T + alpha G P2 P2^T)
    P1  <- P1  * (G^T A1 + beta P2 M^T)    / (G^T G P1 + beta P1 D1)
    P2  <- P2  * (alpha G^T A2 + beta P1 M) / (alpha G^T G P2 + beta P2 D2)

Denominators are floored at ``EPS`` before dividing. After convergence the
columns of G are rescaled to unit Euclidean length (the factorization is
only determined up to a positive diagonal rescaling), with P1 and P2
adjusted so the reconstructions do not change.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import sparse

from .exceptions import NumericalError, ParameterError, ShapeMismatchError
from .matrix import degree_diagonals

__all__ = [
    "EPS",
    "HyperParams",
    "HierarchyMapping",
    "FactorizationState",
    "objective",
    "hierarchy_penalty",
    "update_g",
    "update_p1",
    "update_p2",
    "normalize",
    "fit_cmnmf",
    "fit_nmf",
]

# Floor applied to every multiplicative-update denominator before division.
EPS = 1e-12

IterationCallback = Callable[[int, np.ndarray, np.ndarray, Optional[np.ndarray], float], None]


@dataclass(frozen=True)
class HyperParams:
    """Model and solver settings for one fit."""

    alpha: float
    beta: float
    k: int
    max_iters: int = 500
    rel_tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ParameterError("alpha and beta must be nonnegative")
        if self.k < 1:
            raise ParameterError("k must be a positive integer")
        if self.max_iters < 1:
            raise ParameterError("max_iters must be a positive integer")
        if not self.rel_tol > 0:
            raise ParameterError("rel_tol must be positive")


@dataclass(frozen=True)
class HierarchyMapping:
    """Parent-child mapping matrix plus its two degree vectors.

    ``d1[i]`` is the i-th row sum of ``m`` and ``d2[j]`` the j-th column
    sum; they are the diagonals that appear when the pairwise penalty is
    rewritten in trace form.
    """

    m: sparse.csr_array
    d1: np.ndarray
    d2: np.ndarray

    @classmethod
    def from_matrix(cls, m: sparse.csr_array) -> "HierarchyMapping":
        d1, d2 = degree_diagonals(m)
        return cls(m, d1, d2)


@dataclass(frozen=True)
class FactorizationState:
    """Factors plus the per-iteration objective trace of the fit.

    ``p2`` is ``None`` for single-view fits. ``objective_trace`` holds one
    value per completed iteration and is non-increasing up to float noise.
    """

    g: np.ndarray
    p1: np.ndarray
    p2: Optional[np.ndarray]
    objective_trace: tuple[float, ...]
    iterations_run: int
    converged: bool


def _check_dims(a1, a2, mapping, g, p1, p2):
    n, m1 = a1.shape
    m2 = a2.shape[1]
    if a2.shape[0] != n:
        raise ShapeMismatchError(
            f"views must share gene rows: {a1.shape} vs {a2.shape}"
        )
    if mapping.m.shape != (m1, m2):
        raise ShapeMismatchError(
            f"mapping shape {mapping.m.shape} does not match views ({m1}, {m2})"
        )
    k = g.shape[1]
    if g.shape[0] != n or p1.shape != (k, m1) or p2.shape != (k, m2):
        raise ShapeMismatchError(
            f"factor shapes {g.shape}, {p1.shape}, {p2.shape} do not match "
            f"views ({n}, {m1}) and ({n}, {m2})"
        )


def hierarchy_penalty(p1: np.ndarray, p2: np.ndarray, mapping: HierarchyMapping) -> float:
    """sum_ij M_ij ||P1[:, i] - P2[:, j]||^2, evaluated in trace form.

    Expands to ``tr(P1 D1 P1^T) + tr(P2 D2 P2^T) - 2 tr(P1 M P2^T)``, which
    needs only column norms and one sparse product. Clamped at 0 against
    cancellation noise.
    """
    t1 = float(mapping.d1 @ (p1 * p1).sum(axis=0))
    t2 = float(mapping.d2 @ (p2 * p2).sum(axis=0))
    cross = float((p1 * (mapping.m @ p2.T).T).sum())
    return max(t1 + t2 - 2.0 * cross, 0.0)


def _frob_gram(a, g, p) -> float:
    """||a - g p||_F^2 for binary sparse ``a`` without forming ``g p``.

    Uses ``||g p||_F^2 - 2 <a, g p> + nnz(a)`` with both terms reduced to
    k-by-k products, so evaluating the loss costs far less than one dense
    reconstruction. Equal to ``frobenius_sq_diff(a, g @ p)`` up to float
    noise; clamped at 0 like it.
    """
    hit = float(((a.T @ g) * p.T).sum())
    normsq = float(((g.T @ g) * (p @ p.T)).sum())
    return max(normsq - 2.0 * hit + float(a.nnz), 0.0)


def _objective_raw(a1, a2, mapping, g, p1, p2, alpha, beta) -> float:
    loss = _frob_gram(a1, g, p1)
    loss += alpha * _frob_gram(a2, g, p2)
    if beta != 0.0:
        loss += beta * hierarchy_penalty(p1, p2, mapping)
    return loss


def objective(a1, a2, mapping: HierarchyMapping, state: FactorizationState, hp: HyperParams) -> float:
    """Total loss of ``state`` on the two views under ``hp``."""
    _check_dims(a1, a2, mapping, state.g, state.p1, state.p2)
    return _objective_raw(
        a1, a2, mapping, state.g, state.p1, state.p2, hp.alpha, hp.beta
    )


def _guarded(factor, num, den, iteration):
    with np.errstate(over="ignore", invalid="ignore"):
        out = factor * num / np.maximum(den, EPS)
    if not np.isfinite(out).all():
        raise NumericalError("update produced NaN or Inf", iteration=iteration)
    return out


def _step_g(g, p1, p2, a1, a2, alpha, iteration):
    num = a1 @ p1.T + alpha * (a2 @ p2.T)
    den = g @ (p1 @ p1.T) + alpha * (g @ (p2 @ p2.T))
    return _guarded(g, num, den, iteration)


def _step_p1(g, p1, p2, a1, mapping, beta, iteration):
    num = (a1.T @ g).T + beta * (mapping.m @ p2.T).T
    den = (g.T @ g) @ p1 + beta * (p1 * mapping.d1[None, :])
    return _guarded(p1, num, den, iteration)


def _step_p2(g, p1, p2, a2, mapping, alpha, beta, iteration):
    num = alpha * (a2.T @ g).T + beta * (mapping.m.T @ p1.T).T
    den = alpha * ((g.T @ g) @ p2) + beta * (p2 * mapping.d2[None, :])
    return _guarded(p2, num, den, iteration)


def update_g(a1, a2, mapping, state: FactorizationState, hp: HyperParams) -> np.ndarray:
    """One multiplicative step on the shared gene factor, P1 and P2 fixed."""
    _check_dims(a1, a2, mapping, state.g, state.p1, state.p2)
    return _step_g(state.g, state.p1, state.p2, a1, a2, hp.alpha, state.iterations_run)


def update_p1(a1, mapping, state: FactorizationState, hp: HyperParams) -> np.ndarray:
    """One multiplicative step on the parent-level phenotype factor."""
    return _step_p1(
        state.g, state.p1, state.p2, a1, mapping, hp.beta, state.iterations_run
    )


def update_p2(a2, mapping, state: FactorizationState, hp: HyperParams) -> np.ndarray:
    """One multiplicative step on the child-level phenotype factor."""
    return _step_p2(
        state.g, state.p1, state.p2, a2, mapping, hp.alpha, hp.beta,
        state.iterations_run,
    )


def normalize(state: FactorizationState) -> FactorizationState:
    """Rescale G to unit column norms, adjusting P rows to keep G P fixed.

    A dead (all-zero) G column cannot be normalized: it is left as zero,
    the matching P1/P2 rows are zeroed, and a warning is emitted.
    """
    norms = np.sqrt((state.g * state.g).sum(axis=0))
    dead = norms == 0.0
    if dead.any():
        warnings.warn(
            f"{int(dead.sum())} dead cluster column(s) left unnormalized",
            RuntimeWarning,
        )
    safe = np.where(dead, 1.0, norms)
    g = state.g / safe
    p1 = state.p1 * norms[:, None]
    p2 = None if state.p2 is None else state.p2 * norms[:, None]
    return FactorizationState(
        g, p1, p2, state.objective_trace, state.iterations_run, state.converged
    )


def _converged(trace, rel_tol) -> bool:
    if len(trace) < 2:
        return False
    prev, cur = trace[-2], trace[-1]
    return abs(cur - prev) / max(prev, EPS) < rel_tol


def _init_factor(rng, shape):
    # uniform on (0, 1]: strictly positive so no entry starts zero-locked
    return 1.0 - rng.random(shape)


def fit_cmnmf(
    a1,
    a2,
    mapping: HierarchyMapping,
    hp: HyperParams,
    callback: IterationCallback | None = None,
) -> FactorizationState:
    """Fit the joint two-view model by alternating multiplicative updates.

    Starts from seeded uniform-(0, 1] factors, updates G, P1, P2 in that
    order each iteration (each update sees the freshest other factors),
    records the objective once per iteration, and stops when the relative
    objective change drops below ``hp.rel_tol`` or ``hp.max_iters`` is
    reached. The returned state is column-normalized. Deterministic given
    ``hp.seed``; ``callback(iteration, g, p1, p2, loss)`` observes the raw
    (pre-normalization) iterates.
    """
    n, m1 = a1.shape
    m2 = a2.shape[1]
    if hp.k > min(n, m1 + m2):
        raise ParameterError(
            f"k={hp.k} exceeds min(n, m1+m2) = {min(n, m1 + m2)}"
        )
    rng = np.random.default_rng(hp.seed)
    g = _init_factor(rng, (n, hp.k))
    p1 = _init_factor(rng, (hp.k, m1))
    p2 = _init_factor(rng, (hp.k, m2))
    _check_dims(a1, a2, mapping, g, p1, p2)

    trace: list[float] = []
    converged = False
    for it in range(1, hp.max_iters + 1):
        g = _step_g(g, p1, p2, a1, a2, hp.alpha, it)
        p1 = _step_p1(g, p1, p2, a1, mapping, hp.beta, it)
        p2 = _step_p2(g, p1, p2, a2, mapping, hp.alpha, hp.beta, it)
        loss = _objective_raw(a1, a2, mapping, g, p1, p2, hp.alpha, hp.beta)
        trace.append(loss)
        if callback is not None:
            callback(it, g, p1, p2, loss)
        if _converged(trace, hp.rel_tol):
            converged = True
            break

    state = FactorizationState(g, p1, p2, tuple(trace), len(trace), converged)
    return normalize(state)


def fit_nmf(
    a, hp: HyperParams, callback: IterationCallback | None = None
) -> FactorizationState:
    """Single-view baseline with the classic multiplicative update pair.

    Same initialization scheme, iteration loop, convergence rule and final
    normalization as :func:`fit_cmnmf`; ``alpha`` and ``beta`` are unused
    and the returned state has ``p2 = None``.
    """
    n, m = a.shape
    if hp.k > min(n, m):
        raise ParameterError(f"k={hp.k} exceeds min(n, m) = {min(n, m)}")
    rng = np.random.default_rng(hp.seed)
    g = _init_factor(rng, (n, hp.k))
    p = _init_factor(rng, (hp.k, m))

    trace: list[float] = []
    converged = False
    for it in range(1, hp.max_iters + 1):
        num = a @ p.T
        den = g @ (p @ p.T)
        g = _guarded(g, num, den, it)
        num = (a.T @ g).T
        den = (g.T @ g) @ p
        p = _guarded(p, num, den, it)
        loss = _frob_gram(a, g, p)
        trace.append(loss)
        if callback is not None:
            callback(it, g, p, None, loss)
        if _converged(trace, hp.rel_tol):
            converged = True
            break

    state = FactorizationState(g, p, None, tuple(trace), len(trace), converged)
    return normalize(state)
