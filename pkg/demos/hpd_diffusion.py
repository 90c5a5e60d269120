"""
Randomized vs cyclic relaxation on a symmetric diffusion system.

Builds the implicit-Euler diffusion matrix, runs cyclic Gauss-Seidel and
randomized relaxation with the optimal probabilities, and prints the
A-norm error next to the theoretical curve (1 - alpha)^{kn/2}.
"""

from dataclasses import replace

import numpy as np

from randrelax import PickRule, ProblemSpec, RunConfig, build_system, run_ensemble
from randrelax.bounds import hpd_alpha, hpd_optimal_probabilities
from randrelax.spectral import lambda_min_hpd

N = 30
A, z, b = build_system(ProblemSpec(N, diffusion="var"))
n = A.shape[0]
d = A.diagonal()
print(f"n = {n}, diagonal in [{d.min():.3f}, {d.max():.3f}]")

# smallest eigenvalue and the rate constant for p_i = a_ii / tr(A)
lam = lambda_min_hpd(A)
p = hpd_optimal_probabilities(d)
rep = hpd_alpha(1.0, lam, d, p=p)
print(f"lambda_min = {lam:.4f}, alpha_opt = {rep.alpha_opt:.3e}")

base = RunConfig(max_sweeps=40, rtol=1e-300, trace_norms=("energy_error",), x_star=z)
cyclic = run_ensemble(A, b, None, base, 1)[0]
rand = run_ensemble(A, b, None, replace(base, pick=PickRule.random(p)), 10)

err0 = cyclic.norms["energy_error"][0]
mean = np.mean([t.norms["energy_error"] for t in rand], axis=0)
k = np.arange(41)
bound = err0 * rep.decay(k, power=0.5)

print(f"{'sweep':>5} {'cyclic':>12} {'random mean':>12} {'bound':>12}")
for s in range(0, 41, 5):
    print(f"{s:5d} {cyclic.norms['energy_error'][s] / err0:12.3e} "
          f"{mean[s] / err0:12.3e} {bound[s] / err0:12.3e}")
