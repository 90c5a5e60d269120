"""
Gauss-Seidel vs Kaczmarz on the sigma = 1 convection-diffusion system.

Both families are run cyclically and randomized; the table shows the
mean relative residual (2-norm) every 10 sweeps.
"""

import numpy as np

from randrelax import PickRule, ProblemSpec, RunConfig, build_system, run_ensemble
from randrelax.bounds import h_matrix_bounds

A, z, b = build_system(ProblemSpec(100, sigma=1.0))
p = h_matrix_bounds(A, np.ones(A.shape[0]), residual_kind="original").p_opt
cfg = RunConfig(max_sweeps=100, rtol=1e-300)


def mean_rel(traces):
    return np.mean([t.relative("l2_residual") for t in traces], axis=0)


curves = {
    "gs cyclic": mean_rel(run_ensemble(A, b, None, cfg, 1)),
    "gs random": mean_rel(run_ensemble(A, b, None, RunConfig(pick=PickRule.random(p),
                                                             max_sweeps=100, rtol=1e-300), 10)),
    "kacz cyclic": mean_rel(run_ensemble(A, b, None, cfg, 1, kaczmarz="cyclic")),
    "kacz random": mean_rel(run_ensemble(A, b, None, cfg, 10, kaczmarz="randomized")),
}
print("sweep " + " ".join(f"{k:>12}" for k in curves))
for s in range(0, 101, 10):
    print(f"{s:5d} " + " ".join(f"{c[s]:12.3e}" for c in curves.values()))
