"""Relaxed Jacobi splitting and single-component relaxation.

With A = D - B and relaxation parameter omega the iteration matrix is
H_omega = (1 - omega) I + omega D^{-1} B.  One relaxation of component i
is x <- x + omega (r_i / a_ii) e_i, which needs column i of A to update
the residual; the splitting caches a CSC copy of A for that.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve_triangular

from . import _kernels
from .sparse_core import as_csr, as_vector, diagonal

__all__ = [
    "JacobiSplitting",
    "IterationVectors",
    "iteration_matrix_row",
    "iteration_matrix",
    "relax_component",
    "energy_error_sq_drop",
    "cyclic_sweep",
    "gauss_seidel_iterate",
]

RESYNC_SWEEPS = 10


@dataclass(frozen=True, eq=False)
class JacobiSplitting:
    """A = D/omega - ((1 - 1/omega) D + B), stored as A plus its diagonal.

    Use :meth:`from_matrix` to build one; it validates the diagonal and
    caches the column-access structure used by every relaxation.
    """

    A: sp.csr_matrix
    diag: np.ndarray
    omega: float = 1.0
    _cptr: np.ndarray = field(repr=False, default=None)
    _crow: np.ndarray = field(repr=False, default=None)
    _cval: np.ndarray = field(repr=False, default=None)

    @classmethod
    def from_matrix(cls, A, omega=1.0):
        A = as_csr(A, square=True)
        d = diagonal(A, require_nonzero=True)
        if not np.isfinite(omega):
            raise ValueError("omega must be finite")
        C = A.tocsc()
        C.sort_indices()
        return cls(A, d, float(omega),
                   C.indptr.astype(np.int64), C.indices.astype(np.int64), C.data.copy())

    @property
    def n(self):
        return self.A.shape[0]

    def with_omega(self, omega):
        return JacobiSplitting(self.A, self.diag, float(omega),
                               self._cptr, self._crow, self._cval)

    def column_arrays(self):
        return self._cptr, self._crow, self._cval


@dataclass(eq=False)
class IterationVectors:
    """Mutable solver state: x, r = b - Ax and rhat = D^{-1} r.

    r and rhat are updated incrementally and recomputed from `b` every
    ``RESYNC_SWEEPS * n`` relaxations.
    """

    x: np.ndarray
    r: np.ndarray
    r_hat: np.ndarray
    since_resync: int = 0

    @classmethod
    def from_x(cls, s, b, x0=None):
        b = as_vector(b, s.n, "b")
        x = np.zeros(s.n) if x0 is None else as_vector(x0, s.n, "x0").copy()
        r = b - s.A @ x
        return cls(x, r, r / s.diag)

    def resync(self, s, b):
        self.r[:] = b - s.A @ self.x
        self.r_hat[:] = self.r / s.diag
        self.since_resync = 0

    def copy(self):
        return IterationVectors(self.x.copy(), self.r.copy(), self.r_hat.copy(),
                                self.since_resync)


def iteration_matrix_row(s, i):
    """Row i of H_omega as (column indices, values), without forming H."""
    n = s.n
    if not 0 <= i < n:
        raise IndexError(f"row index {i} out of range for n={n}")
    A = s.A
    lo, hi = A.indptr[i], A.indptr[i + 1]
    cols = A.indices[lo:hi].astype(np.int64)
    vals = -s.omega * A.data[lo:hi] / s.diag[i]
    vals[cols == i] = 1.0 - s.omega
    return cols, vals


def iteration_matrix(s):
    """H_omega as an explicit CSR matrix (small problems, bounds)."""
    A = s.A
    H = sp.diags(1.0 / s.diag) @ A
    H = sp.identity(s.n, format="csr") - s.omega * H
    H = sp.csr_matrix(H)
    H.sort_indices()
    return H


def relax_component(s, v, b, i):
    """Relax component i in place: x_i += omega r_i / a_ii; returns `v`."""
    if not 0 <= i < s.n:
        raise IndexError(f"component {i} out of range for n={s.n}")
    cptr, crow, cval = s.column_arrays()
    _kernels.relax_sequence(np.array([i], dtype=np.int64), cptr, crow, cval,
                            s.diag, s.omega, v.x, v.r, v.r_hat)
    v.since_resync += 1
    if v.since_resync >= RESYNC_SWEEPS * s.n:
        v.resync(s, b)
    return v


def energy_error_sq_drop(s, r_i, i):
    """Decrease of ||x - x*||_A^2 caused by relaxing component i.

    Equals omega (2 - omega) |r_i|^2 / a_ii for hpd A.
    """
    a_ii = s.diag[i]
    if a_ii <= 0:
        raise ValueError("energy drop needs a positive diagonal (hpd matrix)")
    return s.omega * (2.0 - s.omega) * abs(r_i) ** 2 / a_ii


def cyclic_sweep(s, v, b):
    """Relax components 0..n-1 in natural order; returns `v`.

    For omega = 1 this is one Gauss-Seidel iteration.
    """
    cptr, crow, cval = s.column_arrays()
    _kernels.relax_sequence(np.arange(s.n, dtype=np.int64), cptr, crow, cval,
                            s.diag, s.omega, v.x, v.r, v.r_hat)
    v.since_resync += s.n
    if v.since_resync >= RESYNC_SWEEPS * s.n:
        v.resync(s, b)
    return v


def gauss_seidel_iterate(A, b, x):
    """Textbook Gauss-Seidel step x <- (D - L)^{-1} (U x + b) by triangular solve."""
    A = as_csr(A, square=True)
    lower = sp.tril(A, format="csr")
    upper = -sp.triu(A, k=1, format="csr")
    return spsolve_triangular(lower, upper @ x + b, lower=True)
