"""Sparse kernels, weighted norms and diagonal-dominance checks.

Matrices are ``scipy.sparse.csr_matrix`` objects in canonical form
(sorted column indices, no duplicates, double precision).  Vectors are
one-dimensional float64 arrays.
"""

import numpy as np
import scipy.io
import scipy.sparse as sp

__all__ = [
    "as_csr",
    "as_vector",
    "as_weights",
    "diagonal",
    "matvec",
    "weighted_l1_norm",
    "weighted_column_sums",
    "comparison_matrix",
    "column_dominance_slack",
    "mean_inequality_check",
    "read_matrix_market",
    "write_matrix_market",
    "read_vector",
    "write_vector",
]


def as_csr(A, square=False):
    """Return `A` as a validated canonical CSR matrix of float64.

    Duplicates are rejected rather than summed: a matrix with repeated
    (i, j) entries is almost always an assembly bug.
    """
    if sp.issparse(A):
        A = sp.csr_matrix(A, dtype=np.float64)
    else:
        A = np.asarray(A, dtype=np.float64)
        if A.ndim != 2:
            raise ValueError("matrix must be two-dimensional")
        A = sp.csr_matrix(A)
    if square and A.shape[0] != A.shape[1]:
        raise ValueError(f"matrix must be square, got shape {A.shape}")
    if not A.has_canonical_format:
        A = A.copy()
        A.sort_indices()
        rows = np.repeat(np.arange(A.shape[0]), np.diff(A.indptr))
        dup = (rows[1:] == rows[:-1]) & (A.indices[1:] == A.indices[:-1])
        if np.any(dup):
            raise ValueError(f"duplicate entries in row {rows[1:][dup][0]}")
        A.has_canonical_format = True
    if not np.all(np.isfinite(A.data)):
        raise ValueError("matrix has non-finite entries")
    return A


def as_vector(x, n=None, name="vector"):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if n is not None and x.shape[0] != n:
        raise ValueError(f"{name} has length {x.shape[0]}, expected {n}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} has non-finite entries")
    return x


def as_weights(u, n=None, name="weights"):
    u = as_vector(u, n, name)
    if np.any(u <= 0):
        raise ValueError(f"{name} must be strictly positive")
    return u


def diagonal(A, require_nonzero=True):
    """Stored diagonal of a square CSR matrix.

    Raises ValueError when a diagonal entry is missing (or zero, when
    `require_nonzero`).
    """
    A = as_csr(A, square=True)
    d = np.zeros(A.shape[0])
    present = np.zeros(A.shape[0], dtype=bool)
    rows = np.repeat(np.arange(A.shape[0]), np.diff(A.indptr))
    on_diag = rows == A.indices
    d[rows[on_diag]] = A.data[on_diag]
    present[rows[on_diag]] = True
    if not present.all():
        i = int(np.flatnonzero(~present)[0])
        raise ValueError(f"missing diagonal entry in row {i}")
    if require_nonzero and np.any(d == 0):
        i = int(np.flatnonzero(d == 0)[0])
        raise ValueError(f"zero diagonal entry in row {i}")
    return d


def matvec(A, x):
    A = as_csr(A)
    x = as_vector(x, A.shape[1], "x")
    return A @ x


def weighted_l1_norm(x, u):
    """Sum of u_j |x_j|."""
    x = np.asarray(x, dtype=np.float64)
    u = as_weights(u)
    if x.shape != u.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {u.shape}")
    return float(np.dot(u, np.abs(x)))


def weighted_column_sums(H, u):
    """Weighted column sums rho_j = (1/u_j) sum_i u_i |h_ij|.

    The maximum over j is the operator norm of H induced by the
    u-weighted l1-norm.
    """
    H = as_csr(H, square=True)
    n = H.shape[0]
    u = as_weights(u, n, "u")
    rows = np.repeat(np.arange(n), np.diff(H.indptr))
    acc = np.bincount(H.indices, weights=u[rows] * np.abs(H.data), minlength=n)
    return acc / u


def comparison_matrix(A):
    """Comparison matrix: |a_ii| on the diagonal, -|a_ij| elsewhere."""
    A = as_csr(A, square=True)
    diagonal(A, require_nonzero=False)
    C = A.copy()
    rows = np.repeat(np.arange(A.shape[0]), np.diff(A.indptr))
    C.data = np.where(rows == A.indices, np.abs(A.data), -np.abs(A.data))
    return C


def column_dominance_slack(A, u):
    """Per-column slack s_j = u_j |a_jj| - sum_{i != j} u_i |a_ij|.

    All entries are positive exactly when `u` certifies generalized
    diagonal dominance of `A` by columns.
    """
    A = as_csr(A, square=True)
    n = A.shape[0]
    u = as_weights(u, n, "u")
    d = diagonal(A, require_nonzero=False)
    rows = np.repeat(np.arange(n), np.diff(A.indptr))
    off = rows != A.indices
    colsum = np.bincount(A.indices[off], weights=u[rows[off]] * np.abs(A.data[off]),
                         minlength=n)
    return u * np.abs(d) - colsum


def mean_inequality_check(a, g):
    """Return (min_i g_i a_i, H(a) * mean(g), max_i g_i a_i).

    H(a) = n / sum(1/a_i) is the harmonic mean of `a`.  The middle value
    is a convex combination of the g_i a_i (weights proportional to
    1/a_i), so it is clamped to the extremes to absorb rounding.
    """
    a = np.asarray(a, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    if a.size == 0:
        raise ValueError("empty input")
    if a.shape != g.shape:
        raise ValueError("a and g must have the same length")
    if np.any(a <= 0):
        raise ValueError("a must be strictly positive")
    if np.any(g < 0):
        raise ValueError("g must be nonnegative")
    n = a.size
    harmonic = n / np.sum(1.0 / a)
    prod = g * a
    lo, hi = float(prod.min()), float(prod.max())
    return lo, min(max(float(harmonic * np.mean(g)), lo), hi), hi


def read_matrix_market(path):
    """Read a real coordinate Matrix Market file into canonical CSR."""
    M = scipy.io.mmread(path)
    if np.iscomplexobj(M.data if sp.issparse(M) else M):
        raise ValueError("complex matrices are not supported")
    A = sp.csr_matrix(M, dtype=np.float64)
    A.sum_duplicates()
    return as_csr(A)


def write_matrix_market(path, A, comment=""):
    A = as_csr(A)
    scipy.io.mmwrite(path, sp.coo_matrix(A), comment=comment, field="real",
                     symmetry="general")


def read_vector(path):
    return as_vector(np.loadtxt(path, dtype=np.float64, ndmin=1))


def write_vector(path, x):
    np.savetxt(path, np.asarray(x, dtype=np.float64), fmt="%.17g")
