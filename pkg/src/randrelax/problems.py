"""Test systems: implicit-Euler convection-diffusion and the 2-D Laplacian.

The unit square carries N x N interior nodes, h = 1/(N+1), homogeneous
Dirichlet boundaries, lexicographic ordering with x running fastest
(node (i, j) -> index j*N + i, zero based).
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .sparse_core import as_csr, as_weights, column_dominance_slack

__all__ = [
    "ProblemSpec",
    "DominanceSummary",
    "build_operator",
    "build_system",
    "build_laplacian",
    "manufactured_solution",
    "dominance_report",
]


@dataclass(frozen=True)
class ProblemSpec:
    """Parameters of one implicit-Euler system A = I + (tau/2) B.

    ``diffusion`` is "const" (alpha = beta = 1) or "var"
    (alpha = beta = 1 + 9(x + y)).  The velocity field is
    sigma * (4x(x-1)(1-2y), -4y(y-1)(1-2x)) when `convection_on`.
    """

    N: int
    sigma: float = 0.0
    diffusion: str = "const"
    tau: float | None = None
    convection_on: bool = True

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("N must be at least 2")
        if self.diffusion not in ("const", "var"):
            raise ValueError("diffusion must be 'const' or 'var'")
        if self.tau is not None and not self.tau > 0:
            raise ValueError("tau must be positive")

    @property
    def h(self):
        return 1.0 / (self.N + 1)

    @property
    def step(self):
        return 0.5 * self.h**2 if self.tau is None else self.tau

    @property
    def n(self):
        return self.N * self.N


def _diffusivity(kind, x, y):
    if kind == "const":
        return np.ones_like(x + y)
    return 1.0 + 9.0 * (x + y)


def _velocity(x, y, sigma):
    nu = sigma * 4.0 * x * (x - 1.0) * (1.0 - 2.0 * y)
    mu = -sigma * 4.0 * y * (y - 1.0) * (1.0 - 2.0 * x)
    return nu, mu


def build_operator(spec):
    """Spatial operator B with A = I + (tau/2) B.

    B discretizes -d/dx(alpha dc/dx) - d/dy(beta dc/dy) + d(nu c)/dx
    + d(mu c)/dy: diffusion in flux form with coefficients at face
    midpoints (its part of B is an M-matrix), convection by central
    differences on nodal values of nu c and mu c.
    """
    N, h = spec.N, spec.h
    t = h * np.arange(1, N + 1)
    X, Y = np.meshgrid(t, t)            # X[j, i] = x_i, Y[j, i] = y_j
    idx = np.arange(N * N).reshape(N, N)

    # face midpoints shared by both neighbours, so B's diffusion part is exactly symmetric
    tf = h * (np.arange(N + 1) + 0.5)
    Xf, Yc = np.meshgrid(tf, t)         # x-faces: shape (N, N+1)
    Xc, Yf = np.meshgrid(t, tf)         # y-faces: shape (N+1, N)
    ax = _diffusivity(spec.diffusion, Xf, Yc)
    by = _diffusivity(spec.diffusion, Xc, Yf)
    ae, aw = ax[:, 1:], ax[:, :-1]
    bn, bs = by[1:, :], by[:-1, :]

    if spec.convection_on and spec.sigma != 0.0:
        nu, mu = _velocity(X, Y, spec.sigma)
    else:
        nu = mu = np.zeros_like(X)

    rows = [idx.ravel()]
    cols = [idx.ravel()]
    vals = [((ae + aw + bn + bs) / h**2).ravel()]
    c = 1.0 / (2.0 * h)
    # (neighbour shift along axis, face coefficient, velocity, sign of d/dx term)
    for axis, shift, face, vel, sgn in (
        (1, +1, ae, nu, +1.0),
        (1, -1, aw, nu, -1.0),
        (0, +1, bn, mu, +1.0),
        (0, -1, bs, mu, -1.0),
    ):
        J, I = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
        Jn, In = (J + shift, I) if axis == 0 else (J, I + shift)
        ok = (Jn >= 0) & (Jn < N) & (In >= 0) & (In < N)
        rows.append(idx[J[ok], I[ok]])
        cols.append(idx[Jn[ok], In[ok]])
        vals.append(-face[ok] / h**2 + sgn * c * vel[Jn[ok], In[ok]])
    B = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(N * N, N * N)).tocsr()
    B.sum_duplicates()
    B.sort_indices()
    return B


def manufactured_solution(N):
    """Grid sampling of x y (1 - x)(1 - y)."""
    t = np.arange(1, N + 1) / (N + 1)
    X, Y = np.meshgrid(t, t)
    return (X * Y * (1 - X) * (1 - Y)).ravel()


def build_system(spec):
    """Return (A, z, b) with A = I + (tau/2) B and b = A z."""
    B = build_operator(spec)
    A = sp.identity(spec.n, format="csr") + (spec.step / 2.0) * B
    A = as_csr(A.tocsr(), square=True)
    z = manufactured_solution(spec.N)
    return A, z, A @ z


def build_laplacian(N):
    """Five-point Dirichlet Laplacian (positive definite) scaled by 1/h^2."""
    if N < 3:
        raise ValueError("N must be at least 3")
    h = 1.0 / (N + 1)
    T = sp.diags([-np.ones(N - 1), 2 * np.ones(N), -np.ones(N - 1)], [-1, 0, 1])
    I = sp.identity(N)
    L = (sp.kron(I, T) + sp.kron(T, I)) / h**2
    return as_csr(L.tocsr(), square=True)


@dataclass(frozen=True)
class DominanceSummary:
    min_slack_e: float
    max_slack_e: float
    dominant_e: bool
    min_slack_u: float | None = None
    max_slack_u: float | None = None
    dominant_u: bool | None = None


def dominance_report(A, u=None):
    """Column-dominance slacks with u = e and, optionally, a supplied u."""
    A = as_csr(A, square=True)
    s = column_dominance_slack(A, np.ones(A.shape[0]))
    out = dict(min_slack_e=float(s.min()), max_slack_e=float(s.max()),
               dominant_e=bool(np.all(s > 0)))
    if u is not None:
        su = column_dominance_slack(A, as_weights(u, A.shape[0], "u"))
        out.update(min_slack_u=float(su.min()), max_slack_u=float(su.max()),
                   dominant_u=bool(np.all(su > 0)))
    return DominanceSummary(**out)
