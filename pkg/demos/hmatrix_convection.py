"""
Weighted l1 bounds on a convection-diffusion system.

For sigma = 1 the matrix is column diagonally dominant, so u = e works
as weight vector.  The greedy bound holds relaxation by relaxation; the
randomized bound holds for the expected value, estimated here by the
mean of 10 seeded runs.
"""

import numpy as np

from randrelax import PickRule, ProblemSpec, RunConfig, build_system, run_ensemble
from randrelax.bounds import h_matrix_bounds
from randrelax.problems import dominance_report

A, z, b = build_system(ProblemSpec(40, sigma=1.0))
n = A.shape[0]
print(dominance_report(A))

u = np.ones(n)
rep = h_matrix_bounds(A, u, residual_kind="original")
print(f"max rho = {rep.rho.max():.4f}, alpha_opt = {rep.alpha_opt:.3e}")

base = dict(max_sweeps=30, rtol=1e-300, trace_norms=("l1w_residual",), weights=u)
schemes = {
    "cyclic": PickRule.cyclic(),
    "uniform": PickRule.uniform(n),
    "optimal p": PickRule.random(rep.p_opt),
    "greedy": PickRule.greedy_raw(rep.beta_opt),
}
curves = {}
for name, rule in schemes.items():
    runs = 10 if rule.is_random else 1
    traces = run_ensemble(A, b, None, RunConfig(pick=rule, **base), runs)
    curves[name] = np.mean([t.relative("l1w_residual") for t in traces], axis=0)

bound = rep.decay(np.arange(31))
print("sweep " + " ".join(f"{k:>11}" for k in curves) + "       bound")
for s in range(0, 31, 5):
    print(f"{s:5d} " + " ".join(f"{c[s]:11.3e}" for c in curves.values()) + f" {bound[s]:11.3e}")
