"""Cyclic, randomized and greedy relaxation for sparse linear systems.

Solvers, convergence-rate constants for hpd and H-matrices, Perron and
H-matrix certificates, the convection-diffusion test systems and a
multigrid smoother study.
"""

from .bounds import (
    BoundInapplicableError,
    BoundReport,
    h_matrix_bounds,
    hpd_alpha,
    hpd_optimal_betas,
    hpd_optimal_probabilities,
    jacobi_column_sums,
    kaczmarz_alpha,
    perron_alpha,
    relaxed_alpha,
    weighted_alpha_greedy,
    weighted_alpha_random,
)
from .multigrid import (
    GridHierarchy,
    SmootherConfig,
    build_hierarchy,
    cycles_to_tolerance,
    prolong,
    restrict,
    v_cycle,
)
from .problems import (
    ProblemSpec,
    build_laplacian,
    build_operator,
    build_system,
    dominance_report,
    manufactured_solution,
)
from .solvers import (
    DivergenceError,
    PickRule,
    RunConfig,
    RunTrace,
    WeightedSampler,
    kaczmarz_step,
    pick_index,
    run_ensemble,
    run_kaczmarz,
    run_relaxation,
)
from .sparse_core import (
    as_csr,
    column_dominance_slack,
    comparison_matrix,
    matvec,
    mean_inequality_check,
    read_matrix_market,
    read_vector,
    weighted_column_sums,
    weighted_l1_norm,
    write_matrix_market,
    write_vector,
)
from .spectral import (
    ConvergenceError,
    h_matrix_certificate,
    lambda_min_hpd,
    left_perron_vector,
    perturbed_perron_vector,
    sigma_min,
)
from .splittings import (
    IterationVectors,
    JacobiSplitting,
    cyclic_sweep,
    energy_error_sq_drop,
    gauss_seidel_iterate,
    iteration_matrix,
    iteration_matrix_row,
    relax_component,
)

__version__ = "0.1.0"
