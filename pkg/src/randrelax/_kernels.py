"""Compiled inner loops for single-component relaxations.

The state is (x, r, rhat) with r = b - A x and rhat = r / diag kept in
sync incrementally.  Relaxing component i touches column i of A, read
from a CSC copy (cptr, crow, cval).
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _relax_one(i, cptr, crow, cval, diag, omega, x, r, rhat):
    delta = omega * r[i] / diag[i]
    if delta == 0.0:
        return
    x[i] += delta
    for p in range(cptr[i], cptr[i + 1]):
        k = crow[p]
        r[k] -= delta * cval[p]
        rhat[k] = r[k] / diag[k]


@njit(cache=True, nogil=True)
def relax_sequence(order, cptr, crow, cval, diag, omega, x, r, rhat):
    """Relax the components listed in `order`, one after the other."""
    for t in range(order.shape[0]):
        _relax_one(order[t], cptr, crow, cval, diag, omega, x, r, rhat)


@njit(cache=True, nogil=True)
def relax_greedy(nsteps, beta, use_rhat, cptr, crow, cval, diag, omega, x, r, rhat, picked):
    """Gauss-Southwell steps; full argmax scan, lowest index wins ties."""
    n = x.shape[0]
    for t in range(nsteps):
        best = -1.0
        i = 0
        if use_rhat:
            for j in range(n):
                v = beta[j] * abs(rhat[j])
                if v > best:
                    best = v
                    i = j
        else:
            for j in range(n):
                v = beta[j] * abs(r[j])
                if v > best:
                    best = v
                    i = j
        picked[t] = i
        _relax_one(i, cptr, crow, cval, diag, omega, x, r, rhat)


@njit(cache=True, nogil=True)
def kaczmarz_sequence(order, indptr, indices, data, rownorm2, b, x):
    """Project x onto the hyperplanes a_i^T x = b_i for i in `order`."""
    for t in range(order.shape[0]):
        i = order[t]
        s = b[i]
        for p in range(indptr[i], indptr[i + 1]):
            s -= data[p] * x[indices[p]]
        c = s / rownorm2[i]
        for p in range(indptr[i], indptr[i + 1]):
            x[indices[p]] += c * data[p]


def warm_up():
    """Trigger compilation on tiny inputs."""
    cptr = np.array([0, 1], dtype=np.int64)
    crow = np.array([0], dtype=np.int64)
    cval = np.array([1.0])
    d = np.array([1.0])
    x, r, rh = np.zeros(1), np.ones(1), np.ones(1)
    relax_sequence(np.zeros(1, dtype=np.int64), cptr, crow, cval, d, 1.0, x, r, rh)
    relax_greedy(1, np.ones(1), True, cptr, crow, cval, d, 1.0, x, r, rh,
                 np.zeros(1, dtype=np.int64))
    kaczmarz_sequence(np.zeros(1, dtype=np.int64), cptr, crow, cval, np.ones(1),
                      np.ones(1), np.zeros(1))
