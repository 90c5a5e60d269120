"""
V-cycle counts for the Laplacian with relaxation smoothers.

Counts should stay flat as the grid is refined; randomized smoothing
needs more cycles per unit of work, which fractional s compensates.
"""

from randrelax.multigrid import SmootherConfig, multigrid_study

smoothers = [
    SmootherConfig("cyclic", 1),
    SmootherConfig("greedy", 1),
    SmootherConfig("randomized", 1),
    SmootherConfig("randomized", 1.5),
    SmootherConfig("randomized", 2),
]
rows = multigrid_study(sizes=(31, 63, 127), smoothers=smoothers)

print(f"{'N':>4} {'scheme':>11} {'s':>4} {'cycles':>6} {'residual':>10}")
for N, scheme, s, cycles, res in rows:
    print(f"{N:4d} {scheme:>11} {s:4g} {cycles:6d} {res:10.2e}")
