"""Perron vectors, H-matrix certificates and extremal eigenvalue estimates."""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .sparse_core import as_csr, column_dominance_slack, comparison_matrix, diagonal

__all__ = [
    "ConvergenceError",
    "PerronResult",
    "HMatrixCertificate",
    "left_perron_vector",
    "perturbed_perron_vector",
    "h_matrix_certificate",
    "conjugate_gradient",
    "lambda_min_hpd",
    "sigma_min",
]


class ConvergenceError(RuntimeError):
    """An iteration did not reach its tolerance.

    ``result`` carries the best iterate found, when there is one.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class PerronResult:
    rho: float
    w: np.ndarray
    residual: float
    iterations: int
    delta: float = 0.0


@dataclass(frozen=True)
class HMatrixCertificate:
    is_h_matrix: bool
    u: np.ndarray | None = None
    slack: np.ndarray | None = None
    iterations: int = 0


def _nonnegative(H_abs):
    H = as_csr(H_abs, square=True)
    if np.any(H.data < 0):
        raise ValueError("matrix must be entrywise nonnegative")
    return H


def _power_left(apply_t, n, tol, max_iter):
    """Power iteration for y^T = w^T M with w normalized to max entry 1.

    `apply_t(w)` returns M^T w.  Oscillating estimates (period-2 spectra)
    switch the iteration to M + rho_est I, which has the same left
    Perron vector and a dominant eigenvalue of its own.
    """
    w = np.ones(n)
    shift = 0.0
    history = []
    best = None
    for it in range(1, max_iter + 1):
        y = apply_t(w)
        rho = float(np.dot(y, w) / np.dot(w, w))
        residual = float(np.max(np.abs(y - rho * w))) if n else 0.0
        if best is None or residual < best[2]:
            best = (rho, w.copy(), residual, it)
        if residual <= tol:
            return rho, w, residual, it
        y = y + shift * w
        m = y.max()
        if m <= 0:
            # y == 0: nilpotent direction exhausted, w is a left null vector
            return 0.0, w, residual, it
        w = y / m
        history.append(rho)
        if shift == 0.0 and len(history) >= 8:
            d = np.diff(history[-8:])
            if np.all(d[1:] * d[:-1] < 0) and np.all(np.abs(d) > tol):
                shift = max(history[-1], history[-2], tol)
                history.clear()
    raise ConvergenceError(
        f"power iteration did not reach residual {tol:g} in {max_iter} steps",
        result=PerronResult(best[0], best[1], best[2], best[3]))


def left_perron_vector(H_abs, tol=1e-12, max_iter=50_000):
    """Spectral radius and left Perron vector of a nonnegative matrix.

    Returns w > 0 (max entry 1) and rho with w^T H ~ rho w^T; the
    residual is the inf-norm of w^T H - rho w^T.  Inputs without a
    positive left Perron vector (reducible ones) raise ConvergenceError.
    """
    H = _nonnegative(H_abs)
    n = H.shape[0]
    Ht = H.T.tocsr()
    rho, w, residual, it = _power_left(lambda v: Ht @ v, n, tol, max_iter)
    result = PerronResult(max(rho, 0.0), w, residual, it)
    if np.any(w <= 0) or (rho > 0 and _decaying_entries(Ht, w)):
        raise ConvergenceError("left Perron vector is not strictly positive "
                               "(reducible input?)", result=result)
    return result


def _decaying_entries(Ht, w, steps=10):
    """True if some entry of w keeps shrinking under further iteration.

    At a converged positive Perron vector the iterates stand still; for
    reducible input the components outside the dominant block decay
    geometrically and only look positive because they have not reached
    zero yet.
    """
    v = w.copy()
    for _ in range(steps):
        v = Ht @ v
        m = v.max()
        if m <= 0:
            return True
        v /= m
    return bool(np.any(v < 0.5 * w))


def _collatz_wielandt(Ht, w):
    """Lower and upper bounds on rho(H) from a nonnegative vector w."""
    y = Ht @ w
    pos = w > 0
    ratios = y[pos] / w[pos]
    lower = float(ratios.min()) if ratios.size else 0.0
    upper = float(ratios.max()) if np.all(pos) else np.inf
    return lower, upper


def _best_lower_bound(Ht, w):
    """Largest Collatz-Wielandt lower bound over truncations of w.

    Dropping tiny entries keeps w nonnegative and nonzero, so every
    truncation still bounds rho(H) from below; for reducible H this
    removes components that only decay towards zero.
    """
    best = 0.0
    for t in (0.0, 1e-12, 1e-9, 1e-6, 1e-3):
        v = np.where(w > t * w.max(), w, 0.0)
        if v.any():
            best = max(best, _collatz_wielandt(Ht, v)[0])
    return best


def perturbed_perron_vector(H_abs, eps, tol=1e-12, max_iter=50_000, max_halvings=60):
    """Positive w with w^T H <= (rho(H) + eps) w^T entrywise.

    w is the left Perron vector of H + delta E (E all ones, applied as a
    rank-one term).  delta starts at eps/(2n) and is halved until the
    Collatz-Wielandt upper bound of w against H is within eps of a
    certified lower bound on rho(H).
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    H = _nonnegative(H_abs)
    n = H.shape[0]
    Ht = H.T.tocsr()

    # lower bound on rho(H); any nonnegative iterate gives one
    try:
        _, w0, _, _ = _power_left(lambda v: Ht @ v, n, tol, max_iter)
    except ConvergenceError as exc:
        w0 = exc.result.w
    rho_low = _best_lower_bound(Ht, w0)

    delta = eps / (2 * n)
    last = None
    for _ in range(max_halvings):
        d = delta
        _, w, residual, it = _power_left(lambda v: Ht @ v + d * v.sum(), n, tol, max_iter)
        _, upper = _collatz_wielandt(Ht, w)
        last = PerronResult(rho_low, w, residual, it, delta)
        if np.all(w > 0) and upper <= rho_low + eps:
            return last
        delta /= 2
    raise ConvergenceError("could not certify w^T H <= (rho + eps) w^T", result=last)


def h_matrix_certificate(A, tol=1e-12, max_iter=50_000):
    """Certify generalized column dominance via u^T <A> = e^T.

    Runs u_{k+1,j} = (1 + sum_{i != j} u_{k,i} |a_ij|) / |a_jj| from u = 0.
    The iteration converges iff the Jacobi matrix of <A> has spectral
    radius < 1, i.e. iff A is an H-matrix.
    """
    A = as_csr(A, square=True)
    n = A.shape[0]
    d = np.abs(diagonal(A, require_nonzero=True))
    C = comparison_matrix(A)
    Boff = (sp.diags(d) - C).tocsr()     # |B|, nonnegative off-diagonal part
    Bt = Boff.T.tocsr()
    u = np.zeros(n)
    prev_step = None
    growth_hits = 0
    for it in range(1, max_iter + 1):
        u_new = (1.0 + Bt @ u) / d
        step = float(np.max(np.abs(u_new - u)))
        u = u_new
        if not np.all(np.isfinite(u)) or u.max() > 1e150:
            return HMatrixCertificate(False, iterations=it)
        if step <= tol * max(1.0, float(u.max())):
            break
        if prev_step is not None and prev_step > 0:
            # increments obey d_{k+1} = d_k |B| |D|^{-1}; ratio -> rho
            growth_hits = growth_hits + 1 if step >= prev_step * (1 - 1e-12) else 0
            if growth_hits >= 10:
                slack = column_dominance_slack(A, u)
                if np.all(slack > 0):
                    break
                return HMatrixCertificate(False, iterations=it)
        prev_step = step
    slack = column_dominance_slack(A, u)
    if np.all(slack > 0):
        return HMatrixCertificate(True, u, slack, it)
    return HMatrixCertificate(False, iterations=it)


def _as_operator(A):
    if callable(A):
        return A
    M = as_csr(A, square=True)
    return lambda v: M @ v


def conjugate_gradient(apply_a, b, x0=None, tol=1e-10, max_iter=None):
    """Plain CG; raises ConvergenceError on breakdown (p^T A p <= 0)."""
    n = b.shape[0]
    max_iter = 10 * n if max_iter is None else max_iter
    x = np.zeros(n) if x0 is None else x0.copy()
    r = b - apply_a(x)
    p = r.copy()
    rr = float(r @ r)
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros(n)
    for _ in range(max_iter):
        if np.sqrt(rr) <= tol * bnorm:
            return x
        Ap = apply_a(p)
        pAp = float(p @ Ap)
        if not pAp > 0:
            raise ConvergenceError("CG breakdown: operator is not positive definite")
        a = rr / pAp
        x += a * p
        r -= a * Ap
        rr_new = float(r @ r)
        p = r + (rr_new / rr) * p
        rr = rr_new
    if np.sqrt(rr) <= tol * bnorm:
        return x
    raise ConvergenceError(f"CG did not converge in {max_iter} iterations")


def lambda_min_hpd(A, tol=1e-8, max_iter=10_000, inner_tol=1e-10, n=None):
    """Smallest eigenvalue of a symmetric positive definite matrix.

    Inverse iteration with CG inner solves, stopped when the Rayleigh
    quotient changes by less than `tol` relative.  `A` may be a sparse
    matrix or a callable v -> A v (then `n` is required).
    """
    if not callable(A):
        M = as_csr(A, square=True)
        asym = abs(M - M.T)
        if asym.nnz and asym.max() > 1e-12 * max(abs(M).max(), 1.0):
            raise ValueError("matrix is not symmetric")
        n = M.shape[0]
    elif n is None:
        raise ValueError("n is required for operator input")
    apply_a = _as_operator(A)
    rng = np.random.default_rng(12345)
    v = np.ones(n) + 0.01 * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    theta = float(v @ apply_a(v))
    for _ in range(max_iter):
        y = conjugate_gradient(apply_a, v, x0=v / theta if theta > 0 else None,
                               tol=inner_tol)
        v = y / np.linalg.norm(y)
        theta_new = float(v @ apply_a(v))
        if not theta_new > 0:
            raise ConvergenceError("nonpositive Rayleigh quotient: matrix is not hpd")
        if abs(theta_new - theta) <= tol * theta_new:
            return theta_new
        theta = theta_new
    raise ConvergenceError(f"inverse iteration did not stagnate in {max_iter} steps")


def sigma_min(A, tol=1e-8, max_iter=10_000, inner_tol=1e-10):
    """Smallest singular value via lambda_min of v -> A^T (A v)."""
    M = as_csr(A, square=True)
    Mt = M.T.tocsr()
    lam = lambda_min_hpd(lambda v: Mt @ (M @ v), tol=tol, max_iter=max_iter,
                         inner_tol=inner_tol, n=M.shape[0])
    return float(np.sqrt(lam))
