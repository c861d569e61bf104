"""Matrix representations and the few kernels the update rules need.

Factor matrices (gene and phenotype cluster memberships) are dense float64
arrays; association and mapping matrices are binary CSR arrays. All
arithmetic is 64-bit: multiplicative updates compound rounding error and
32-bit drifts visibly over hundreds of iterations. Summation order is
unspecified, so callers compare results with tolerances, never bitwise.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse

from .exceptions import ShapeMismatchError

__all__ = [
    "as_dense",
    "sparse_binary",
    "densify",
    "matmul",
    "sparse_matmul",
    "frobenius_sq_diff",
    "degree_diagonals",
]


def as_dense(values) -> np.ndarray:
    """Coerce ``values`` to a validated nonnegative float64 matrix.

    Raises ``ValueError`` on anything that is not 2-d, nonnegative and
    finite with at least one row and column.
    """
    a = np.array(values, dtype=np.float64, order="C")
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("matrix contains NaN or Inf entries")
    if (a < 0).any():
        raise ValueError("matrix contains negative entries")
    return a


def sparse_binary(shape: tuple[int, int], pairs) -> sparse.csr_array:
    """Build a binary CSR matrix from (row, col) index pairs.

    Duplicate pairs and out-of-range indices are rejected: every stored
    entry means exactly one association.
    """
    rows, cols = shape
    if rows < 1 or cols < 1:
        raise ValueError(f"invalid shape {shape}")
    pairs = list(pairs)
    if len(set(pairs)) != len(pairs):
        raise ValueError("duplicate (row, col) pairs")
    for r, c in pairs:
        if not (0 <= r < rows and 0 <= c < cols):
            raise ValueError(f"index ({r}, {c}) out of range for shape {shape}")
    if pairs:
        r_idx = np.fromiter((p[0] for p in pairs), dtype=np.int64, count=len(pairs))
        c_idx = np.fromiter((p[1] for p in pairs), dtype=np.int64, count=len(pairs))
        data = np.ones(len(pairs), dtype=np.float64)
    else:
        r_idx = c_idx = np.empty(0, dtype=np.int64)
        data = np.empty(0, dtype=np.float64)
    return sparse.coo_array((data, (r_idx, c_idx)), shape=(rows, cols)).tocsr()


def densify(a: sparse.csr_array) -> np.ndarray:
    return np.asarray(a.toarray(), dtype=np.float64)


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Dense matrix product with an explicit shape check."""
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatchError(
            f"cannot multiply {a.shape} by {b.shape}: inner dimensions differ"
        )
    return a @ b


def sparse_matmul(a: sparse.csr_array, b: np.ndarray) -> np.ndarray:
    """Sparse-times-dense product, equal to densifying ``a`` then multiplying."""
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatchError(
            f"cannot multiply {a.shape} by {b.shape}: inner dimensions differ"
        )
    return np.asarray(a @ b)


def frobenius_sq_diff(a: sparse.csr_array, b: np.ndarray) -> float:
    """Squared Frobenius distance between a binary sparse matrix and a dense one.

    Computed without densifying ``a``::

        ||a - b||_F^2 = ||b||_F^2 - 2 * sum_{a_ij=1} b_ij + nnz(a)

    Cancellation can push the float result a hair below zero near an exact
    reconstruction; the result is clamped at 0.
    """
    if a.shape != b.shape:
        raise ShapeMismatchError(f"shape mismatch: {a.shape} vs {b.shape}")
    coo = a.tocoo()
    hit = float(b[coo.coords].sum()) if a.nnz else 0.0
    val = float((b * b).sum()) - 2.0 * hit + float(a.nnz)
    return max(val, 0.0)


def degree_diagonals(m: sparse.csr_array) -> tuple[np.ndarray, np.ndarray]:
    """Row-sum and column-sum degree vectors of a mapping matrix.

    Returned as 1-d arrays; the i-th row sum weighs parent phenotype i and
    the j-th column sum weighs child phenotype j in the hierarchy penalty.
    """
    d1 = np.asarray(m.sum(axis=1), dtype=np.float64).ravel()
    d2 = np.asarray(m.sum(axis=0), dtype=np.float64).ravel()
    return d1, d2
