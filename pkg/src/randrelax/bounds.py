"""Convergence-rate constants for randomized and greedy relaxation.

Every function returns a :class:`BoundReport` whose ``alpha`` is the
per-relaxation contraction margin: the traced quantity decays at least
like (1 - alpha)^k after k relaxations (in expectation for randomized
picks, deterministically for greedy ones).  For the energy norm the
decaying quantity is the *squared* A-norm of the error.
"""

import json
from dataclasses import asdict, dataclass

import numpy as np

from .sparse_core import as_csr, as_weights, column_dominance_slack, diagonal, weighted_column_sums
from .splittings import JacobiSplitting, iteration_matrix

__all__ = [
    "BoundInapplicableError",
    "BoundReport",
    "hpd_alpha",
    "hpd_optimal_probabilities",
    "hpd_optimal_betas",
    "weighted_alpha_random",
    "weighted_alpha_greedy",
    "perron_alpha",
    "jacobi_column_sums",
    "h_matrix_bounds",
    "relaxed_alpha",
    "kaczmarz_alpha",
]

PROB_TOL = 1e-12


class BoundInapplicableError(ValueError):
    """The hypotheses of the requested bound do not hold."""


@dataclass(frozen=True)
class BoundReport:
    kind: str
    alpha: float
    alpha_opt: float
    n: int
    rho: np.ndarray | None = None
    gamma: np.ndarray | None = None
    pi: np.ndarray | None = None
    p_opt: np.ndarray | None = None
    beta_opt: np.ndarray | None = None
    weights: np.ndarray | None = None
    weights_w: np.ndarray | None = None

    @property
    def per_relaxation_factor(self):
        return 1.0 - self.alpha

    @property
    def per_sweep_factor(self):
        return (1.0 - self.alpha) ** self.n

    def decay(self, sweeps, power=1.0):
        """(1 - alpha)^(power * n * sweeps); power=0.5 turns a bound on a
        squared norm into one on the norm itself."""
        sweeps = np.asarray(sweeps, dtype=np.float64)
        return (1.0 - self.alpha) ** (power * self.n * sweeps)

    def to_dict(self):
        out = {}
        for key, value in asdict(self).items():
            out[key] = value.tolist() if isinstance(value, np.ndarray) else value
        out["per_relaxation_factor"] = self.per_relaxation_factor
        out["per_sweep_factor"] = self.per_sweep_factor
        return out

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def _probabilities(p, n=None):
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or (n is not None and p.size != n):
        raise ValueError("probability vector has wrong shape")
    if np.any(p <= 0) or np.any(p >= 1) and p.size > 1:
        raise ValueError("probabilities must lie in (0, 1)")
    if abs(p.sum() - 1.0) > PROB_TOL:
        raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
    return p


def _positive(a, name):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 1 or a.size == 0 or np.any(~(a > 0)):
        raise ValueError(f"{name} must be a nonempty array of positive numbers")
    return a


def _gamma(rho):
    rho = np.asarray(rho, dtype=np.float64)
    if rho.ndim != 1 or rho.size == 0 or np.any(rho < 0):
        raise ValueError("rho must be a nonempty array of nonnegative numbers")
    if np.any(rho >= 1):
        j = int(np.argmax(rho))
        raise BoundInapplicableError(
            f"weighted column sum rho_{j} = {rho[j]:.6g} >= 1; the l1 bound does not apply")
    return rho, 1.0 / (1.0 - rho)


def hpd_optimal_probabilities(diag):
    """p_i = a_ii / tr(A)."""
    d = _positive(diag, "diagonal")
    return d / d.sum()


def hpd_optimal_betas(diag):
    """Greedy weights beta_i = 1 / sqrt(a_ii)."""
    return 1.0 / np.sqrt(_positive(diag, "diagonal"))


def hpd_alpha(omega, lambda_min, diag, p=None, beta=None):
    """Energy-norm rate for randomized (p) or greedy (beta) relaxation of hpd A.

    alpha = omega (2 - omega) lambda_min min_i q_i / a_ii with q = p, or
    q = pi, pi_i proportional to 1 / beta_i^2.
    """
    if not 0 < omega <= 2:
        raise ValueError("omega must lie in (0, 2]")
    if not lambda_min > 0:
        raise ValueError("lambda_min must be positive")
    d = _positive(diag, "diagonal")
    n = d.size
    scale = omega * (2.0 - omega) * lambda_min
    if (p is None) == (beta is None):
        raise ValueError("give exactly one of p or beta")
    if p is not None:
        q = _probabilities(p, n)
        kind, pi = "hpd-randomized", None
    else:
        b = _positive(beta, "beta")
        inv2 = 1.0 / b**2
        q = pi = inv2 / inv2.sum()
        kind = "hpd-greedy"
    return BoundReport(kind=kind, alpha=float(scale * np.min(q / d)),
                       alpha_opt=float(scale / d.sum()), n=n, pi=pi,
                       p_opt=d / d.sum(), beta_opt=1.0 / np.sqrt(d))


def weighted_alpha_random(rho, p):
    """alpha = min_j p_j / gamma_j with gamma_j = 1 / (1 - rho_j)."""
    rho, gamma = _gamma(rho)
    p = _probabilities(p, rho.size)
    return BoundReport(kind="l1-randomized", alpha=float(np.min(p / gamma)),
                       alpha_opt=float(1.0 / gamma.sum()), n=rho.size, rho=rho,
                       gamma=gamma, p_opt=gamma / gamma.sum())


def weighted_alpha_greedy(rho, u, beta):
    """alpha = min_j pi_j / gamma_j with pi_j proportional to u_j / beta_j.

    The optimal weights beta_j = u_j / gamma_j give alpha = 1 / sum gamma.
    """
    rho, gamma = _gamma(rho)
    u = _positive(u, "u")
    beta = _positive(beta, "beta")
    if u.size != rho.size or beta.size != rho.size:
        raise ValueError("rho, u and beta must have equal length")
    ratio = u / beta
    pi = ratio / ratio.sum()
    return BoundReport(kind="l1-greedy", alpha=float(np.min(pi / gamma)),
                       alpha_opt=float(1.0 / gamma.sum()), n=rho.size, rho=rho,
                       gamma=gamma, pi=pi, p_opt=gamma / gamma.sum(),
                       beta_opt=u / gamma, weights=u)


def perron_alpha(rho_abs_h, p):
    """Rate in the Perron-weighted norm: alpha = (1 - rho(|H|)) min_j p_j."""
    if not 0 <= rho_abs_h < 1:
        raise BoundInapplicableError(f"rho(|H|) = {rho_abs_h:.6g} is not < 1")
    p = _probabilities(p)
    n = p.size
    return BoundReport(kind="l1-perron", alpha=float((1.0 - rho_abs_h) * p.min()),
                       alpha_opt=float((1.0 - rho_abs_h) / n), n=n,
                       p_opt=np.full(n, 1.0 / n))


def jacobi_column_sums(A, u, omega=1.0):
    """rho_j of H_omega = (1 - omega) I + omega D^{-1} B under weights u."""
    s = JacobiSplitting.from_matrix(A, omega)
    return weighted_column_sums(iteration_matrix(s), u)


def h_matrix_bounds(A, u, p=None, beta=None, residual_kind="preconditioned"):
    """Rates for Gauss-Seidel type relaxation of an H-matrix.

    residual_kind="original": traced quantity ||r||_{1,u}, hypothesis
    u^T <A> > 0, rho_j = 1 - (u^T <A>)_j / (u_j |a_jj|) (column sums of
    B D^{-1}); greedy `beta` weighs |r_i|.

    residual_kind="preconditioned": traced quantity ||D^{-1} r||_{1,u},
    rho_j the u-weighted column sums of H = D^{-1} B, which are < 1 iff
    w^T <A> > 0 for w = u / |d|; greedy `beta` weighs |r_i / a_ii|.

    Both coincide when the diagonal is constant.  Without p or beta the
    optimal probabilities are used.
    """
    A = as_csr(A, square=True)
    n = A.shape[0]
    u = as_weights(u, n, "u")
    if residual_kind not in ("original", "preconditioned"):
        raise ValueError("residual_kind must be 'original' or 'preconditioned'")
    d = np.abs(diagonal(A))
    cert = u if residual_kind == "original" else u / d
    slack = column_dominance_slack(A, cert)
    if np.any(slack <= 0):
        j = int(np.argmin(slack))
        raise BoundInapplicableError(
            f"weights do not certify column dominance (slack {slack[j]:.3g} at column {j})")
    if residual_kind == "original":
        rho = np.clip(1.0 - slack / (u * d), 0.0, None)
    else:
        rho = jacobi_column_sums(A, u)
    if beta is not None:
        rep = weighted_alpha_greedy(rho, u, beta)
    else:
        if p is None:
            gamma = 1.0 / (1.0 - rho)
            p = gamma / gamma.sum()
        rep = weighted_alpha_random(rho, p)
    return BoundReport(kind=f"hmatrix-{rep.kind.split('-')[1]}-{residual_kind}",
                       alpha=rep.alpha, alpha_opt=rep.alpha_opt, n=n, rho=rep.rho,
                       gamma=rep.gamma, pi=rep.pi, p_opt=rep.p_opt, beta_opt=u / rep.gamma,
                       weights=u, weights_w=u / d)


def relaxed_alpha(rho_abs_h, omega, p, eps=0.0):
    """Rate for relaxed randomized Gauss-Seidel in the Perron-weighted norm.

    rho_omega = omega rho + |1 - omega|; alpha = (1 - rho_omega - eps) min p.
    Requires 0 < omega < 2 / (1 + rho).
    """
    if not 0 <= rho_abs_h < 1:
        raise BoundInapplicableError(f"rho(|H|) = {rho_abs_h:.6g} is not < 1")
    cap = 2.0 / (1.0 + rho_abs_h)
    if not 0 < omega < cap:
        raise BoundInapplicableError(
            f"omega = {omega:.6g} outside (0, 2/(1+rho)) = (0, {cap:.6g})")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    rho_w = omega * rho_abs_h + abs(1.0 - omega)
    if not rho_w + eps < 1:
        raise BoundInapplicableError(f"rho_omega + eps = {rho_w + eps:.6g} is not < 1")
    p = _probabilities(p)
    n = p.size
    margin = 1.0 - rho_w - eps
    return BoundReport(kind="l1-relaxed", alpha=float(margin * p.min()),
                       alpha_opt=float(margin / n), n=n,
                       rho=np.full(n, rho_w + eps), p_opt=np.full(n, 1.0 / n))


def kaczmarz_alpha(A, sigma=None, **spectral_kwargs):
    """alpha_K = sigma_min(A)^2 / ||A||_F^2 with row-norm probabilities.

    Bounds E||x_k - x*||_2^2 <= (1 - alpha_K)^k ||x_0 - x*||_2^2, k counting
    single row projections.
    """
    from .spectral import sigma_min

    A = as_csr(A, square=True)
    if sigma is None:
        sigma = sigma_min(A, **spectral_kwargs)
    rownorm2 = np.asarray(A.multiply(A).sum(axis=1)).ravel()
    fro2 = rownorm2.sum()
    alpha = float(sigma**2 / fro2)
    return BoundReport(kind="kaczmarz", alpha=alpha, alpha_opt=alpha, n=A.shape[0],
                       p_opt=rownorm2 / fro2)
