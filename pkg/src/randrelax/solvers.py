"""Cyclic, randomized and greedy relaxation drivers plus Kaczmarz baselines.

A *sweep* is n consecutive relaxations; traces record one entry per
sweep (plus the initial state).  Randomness comes from a seeded
``numpy.random.Generator`` so identical configurations give bitwise
identical traces.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .sparse_core import as_csr, as_vector, as_weights
from .splittings import RESYNC_SWEEPS, IterationVectors, JacobiSplitting

__all__ = [
    "DivergenceError",
    "PickRule",
    "WeightedSampler",
    "RunConfig",
    "RunTrace",
    "NORM_KINDS",
    "pick_index",
    "trace_norms",
    "run_relaxation",
    "kaczmarz_step",
    "kaczmarz_probabilities",
    "run_kaczmarz",
    "run_ensemble",
]

NORM_KINDS = ("l2_residual", "l1w_residual", "l1w_prec_residual", "energy_error", "l2_error")
PROB_TOL = 1e-12


class DivergenceError(ArithmeticError):
    """Non-finite iterate; ``trace`` holds the history up to that point."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True, eq=False)
class PickRule:
    """Which component to relax next.

    kind is one of "cyclic", "random" (weights = probabilities p),
    "greedy_raw" (argmax beta_j |r_j|) or "greedy_prec"
    (argmax beta_j |r_j / a_jj|).  Use the constructors below.
    """

    kind: str
    weights: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == "cyclic":
            return
        if self.kind not in ("random", "greedy_raw", "greedy_prec"):
            raise ValueError(f"unknown pick rule {self.kind!r}")
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0 or not np.all(np.isfinite(w)):
            raise ValueError("pick-rule weights must be a finite 1-d array")
        if self.kind == "random":
            if np.any(w < 0) or (w.size > 1 and np.any(w >= 1)):
                raise ValueError("probabilities must lie in [0, 1)")
            if abs(w.sum() - 1.0) > PROB_TOL:
                raise ValueError(f"probabilities sum to {w.sum()!r}, not 1")
        elif np.any(w <= 0):
            raise ValueError("greedy weights must be strictly positive")
        object.__setattr__(self, "weights", w)

    @classmethod
    def cyclic(cls):
        return cls("cyclic")

    @classmethod
    def random(cls, p):
        return cls("random", p)

    @classmethod
    def uniform(cls, n):
        return cls("random", np.full(n, 1.0 / n))

    @classmethod
    def greedy_raw(cls, beta):
        return cls("greedy_raw", beta)

    @classmethod
    def greedy_preconditioned(cls, beta):
        return cls("greedy_prec", beta)

    @property
    def is_random(self):
        return self.kind == "random"


class WeightedSampler:
    """Inverse-CDF sampling of indices with fixed probabilities."""

    def __init__(self, p, seed):
        p = np.asarray(p, dtype=np.float64)
        self.n = p.size
        cdf = np.cumsum(p)
        self.cdf = cdf / cdf[-1]
        self.rng = np.random.default_rng(seed)

    def draw(self, k):
        idx = np.searchsorted(self.cdf, self.rng.random(k), side="right")
        return np.minimum(idx, self.n - 1).astype(np.int64)


def pick_index(rule, v, sampler, k):
    """Index chosen at global relaxation count k (zero based)."""
    if rule.kind == "cyclic":
        return int(k % v.x.size)
    if rule.kind == "random":
        return int(sampler.draw(1)[0])
    vec = v.r if rule.kind == "greedy_raw" else v.r_hat
    return int(np.argmax(rule.weights * np.abs(vec)))


@dataclass(frozen=True)
class RunConfig:
    """Settings for one relaxation or Kaczmarz run.

    `weights` is the u of the weighted l1 norms (default all ones);
    `x_star` is needed for the error norms.  With `record_relaxations`
    the traced norms are also stored after every single relaxation.
    """

    omega: float = 1.0
    pick: PickRule = field(default_factory=PickRule.cyclic)
    max_sweeps: int = 100
    rtol: float = 1e-10
    seed: int = 0
    trace_norms: tuple = ("l2_residual",)
    stop_norm: str = "l2_residual"
    weights: np.ndarray | None = None
    x_star: np.ndarray | None = None
    record_relaxations: bool = False

    def __post_init__(self):
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be at least 1")
        if not self.rtol > 0:
            raise ValueError("rtol must be positive")
        for kind in (*self.trace_norms, self.stop_norm):
            if kind not in NORM_KINDS:
                raise ValueError(f"unknown norm {kind!r}; choose from {NORM_KINDS}")
        if self.x_star is None and any(k in ("energy_error", "l2_error")
                                       for k in (*self.trace_norms, self.stop_norm)):
            raise ValueError("error norms need x_star")

    @property
    def norm_kinds(self):
        kinds = list(self.trace_norms)
        if self.stop_norm not in kinds:
            kinds.append(self.stop_norm)
        return tuple(kinds)


@dataclass
class RunTrace:
    norms: dict
    relaxation_count: int
    terminated_reason: str
    seed: int
    x: np.ndarray
    relaxation_norms: dict | None = None
    picked: np.ndarray | None = None

    @property
    def sweeps(self):
        return len(next(iter(self.norms.values()))) - 1

    def relative(self, kind):
        h = self.norms[kind]
        return h / h[0] if h[0] != 0 else h


def trace_norms(kinds, A, b, x, diag=None, u=None, x_star=None):
    """Requested norms of the true residual b - Ax and of the error."""
    r = b - A @ x
    u = np.ones_like(r) if u is None else u
    out = {}
    for kind in kinds:
        if kind == "l2_residual":
            out[kind] = float(np.linalg.norm(r))
        elif kind == "l1w_residual":
            out[kind] = float(np.dot(u, np.abs(r)))
        elif kind == "l1w_prec_residual":
            out[kind] = float(np.dot(u, np.abs(r / diag)))
        elif kind == "energy_error":
            e = x - x_star
            out[kind] = float(np.sqrt(max(np.dot(e, A @ e), 0.0)))
        elif kind == "l2_error":
            out[kind] = float(np.linalg.norm(x - x_star))
    return out


class _History:
    def __init__(self, kinds):
        self.kinds = kinds
        self.data = {k: [] for k in kinds}

    def add(self, values):
        for k in self.kinds:
            self.data[k].append(values[k])

    def arrays(self):
        return {k: np.asarray(v) for k, v in self.data.items()}


def _finish(hist, count, reason, seed, x, rel_hist=None, picked=None):
    return RunTrace(hist.arrays(), count, reason, seed, x,
                    None if rel_hist is None else rel_hist.arrays(),
                    None if picked is None else np.concatenate(picked) if picked else
                    np.zeros(0, dtype=np.int64))


def run_relaxation(A, b, x0, cfg):
    """Relax Ax = b one component at a time under `cfg`.

    Stops once the `cfg.stop_norm` of the current iterate falls to
    rtol times its initial value, or after `cfg.max_sweeps` sweeps.
    Raises DivergenceError if the iterate becomes non-finite.
    """
    s = JacobiSplitting.from_matrix(A, cfg.omega)
    n = s.n
    b = as_vector(b, n, "b")
    v = IterationVectors.from_x(s, b, x0)
    u = np.ones(n) if cfg.weights is None else as_weights(cfg.weights, n, "weights")
    x_star = None if cfg.x_star is None else as_vector(cfg.x_star, n, "x_star")
    rule = cfg.pick
    if rule.kind != "cyclic" and rule.weights.size != n:
        raise ValueError(f"pick-rule weights have length {rule.weights.size}, expected {n}")
    kinds = cfg.norm_kinds
    sampler = WeightedSampler(rule.weights, cfg.seed) if rule.is_random else None
    cptr, crow, cval = s.column_arrays()

    def norms():
        return trace_norms(kinds, s.A, b, v.x, s.diag, u, x_star)

    hist = _History(kinds)
    rel_hist = _History(kinds) if cfg.record_relaxations else None
    picked = [] if cfg.record_relaxations else None
    first = norms()
    hist.add(first)
    if rel_hist is not None:
        rel_hist.add(first)
    target = cfg.rtol * first[cfg.stop_norm]
    if first[cfg.stop_norm] <= target:
        return _finish(hist, 0, "tolerance", cfg.seed, v.x, rel_hist, picked)

    greedy_buf = np.zeros(n, dtype=np.int64)
    count = 0
    for sweep in range(1, cfg.max_sweeps + 1):
        if rule.kind == "cyclic":
            order = np.arange(n, dtype=np.int64)
        elif rule.is_random:
            order = sampler.draw(n)
        else:
            order = None
        if cfg.record_relaxations:
            for t in range(n):
                if order is not None:
                    i = order[t:t + 1]
                    _kernels.relax_sequence(i, cptr, crow, cval, s.diag, s.omega,
                                            v.x, v.r, v.r_hat)
                else:
                    i = greedy_buf[:1].copy()
                    _kernels.relax_greedy(1, rule.weights, rule.kind == "greedy_prec",
                                          cptr, crow, cval, s.diag, s.omega,
                                          v.x, v.r, v.r_hat, i)
                picked.append(i)
                rel_hist.add(norms())
        elif order is not None:
            _kernels.relax_sequence(order, cptr, crow, cval, s.diag, s.omega,
                                    v.x, v.r, v.r_hat)
        else:
            _kernels.relax_greedy(n, rule.weights, rule.kind == "greedy_prec",
                                  cptr, crow, cval, s.diag, s.omega,
                                  v.x, v.r, v.r_hat, greedy_buf)
        count += n
        v.since_resync += n
        if v.since_resync >= RESYNC_SWEEPS * n:
            v.resync(s, b)
        if not np.all(np.isfinite(v.x)):
            trace = _finish(hist, count, "diverged", cfg.seed, v.x, rel_hist, picked)
            raise DivergenceError(f"non-finite iterate after sweep {sweep}", trace)
        current = norms()
        hist.add(current)
        if current[cfg.stop_norm] <= target:
            return _finish(hist, count, "tolerance", cfg.seed, v.x, rel_hist, picked)
    return _finish(hist, count, "max_sweeps", cfg.seed, v.x, rel_hist, picked)


def _row_norms2(A):
    return np.asarray(A.multiply(A).sum(axis=1)).ravel()


def kaczmarz_probabilities(A):
    """p_i = ||a_i||^2 / ||A||_F^2."""
    A = as_csr(A)
    r2 = _row_norms2(A)
    return r2 / r2.sum()


def kaczmarz_step(A, b, x, i):
    """Project x onto {y : a_i^T y = b_i}; returns a new vector."""
    A = as_csr(A)
    lo, hi = A.indptr[i], A.indptr[i + 1]
    cols, vals = A.indices[lo:hi], A.data[lo:hi]
    nrm2 = float(np.dot(vals, vals))
    if nrm2 == 0.0:
        raise ValueError(f"row {i} is zero")
    x = np.array(x, dtype=np.float64)
    x[cols] += (b[i] - np.dot(vals, x[cols])) / nrm2 * vals
    return x


def run_kaczmarz(A, b, x0, mode, cfg):
    """Cyclic or randomized Kaczmarz (row probabilities ||a_i||^2/||A||_F^2).

    Only the norms in `cfg` are used from the configuration (pick and
    omega are ignored).
    """
    if mode not in ("cyclic", "randomized"):
        raise ValueError("mode must be 'cyclic' or 'randomized'")
    A = as_csr(A, square=True)
    n = A.shape[0]
    b = as_vector(b, n, "b")
    x = np.zeros(n) if x0 is None else as_vector(x0, n, "x0").copy()
    r2 = _row_norms2(A)
    if np.any(r2 == 0):
        raise ValueError(f"row {int(np.flatnonzero(r2 == 0)[0])} is zero")
    u = np.ones(n) if cfg.weights is None else as_weights(cfg.weights, n, "weights")
    x_star = None if cfg.x_star is None else as_vector(cfg.x_star, n, "x_star")
    diag = A.diagonal()
    diag = np.where(diag == 0, 1.0, diag)
    kinds = cfg.norm_kinds
    sampler = WeightedSampler(r2 / r2.sum(), cfg.seed) if mode == "randomized" else None
    indptr, indices = A.indptr.astype(np.int64), A.indices.astype(np.int64)

    hist = _History(kinds)
    first = trace_norms(kinds, A, b, x, diag, u, x_star)
    hist.add(first)
    target = cfg.rtol * first[cfg.stop_norm]
    if first[cfg.stop_norm] <= target:
        return _finish(hist, 0, "tolerance", cfg.seed, x)
    count = 0
    for sweep in range(1, cfg.max_sweeps + 1):
        order = np.arange(n, dtype=np.int64) if sampler is None else sampler.draw(n)
        _kernels.kaczmarz_sequence(order, indptr, indices, A.data, r2, b, x)
        count += n
        if not np.all(np.isfinite(x)):
            raise DivergenceError(f"non-finite iterate after sweep {sweep}",
                                  _finish(hist, count, "diverged", cfg.seed, x))
        current = trace_norms(kinds, A, b, x, diag, u, x_star)
        hist.add(current)
        if current[cfg.stop_norm] <= target:
            return _finish(hist, count, "tolerance", cfg.seed, x)
    return _finish(hist, count, "max_sweeps", cfg.seed, x)


def run_ensemble(A, b, x0, cfg, runs, seed_base=None, kaczmarz=None, max_workers=None):
    """Independent seeded runs (seed_base + r); returns traces in run order.

    `kaczmarz` selects run_kaczmarz with that mode instead of relaxation.
    The compiled kernels release the GIL, so threads run concurrently.
    """
    if runs < 1:
        raise ValueError("runs must be at least 1")
    base = cfg.seed if seed_base is None else seed_base
    configs = [replace(cfg, seed=base + r) for r in range(runs)]

    def one(c):
        if kaczmarz is None:
            return run_relaxation(A, b, x0, c)
        return run_kaczmarz(A, b, x0, kaczmarz, c)

    if max_workers == 1 or runs == 1:
        return [one(c) for c in configs]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(one, configs))
