"""Induced matchings in G(n,p): samplers, exact and heuristic solvers,
second-moment computations and numerical checks of the bound chain."""

from .bound_checks import (
    CheckConfig,
    CheckReport,
    Lattice,
    check_boundary_ratios,
    check_dense_regime,
    check_final_assembly,
    check_global_bound,
    check_interior_bound,
    check_talagrand_arithmetic,
    f_terms,
)
from .errors import DomainError, RefusalError
from .experiments import (
    ExperimentConfig,
    ExperimentReport,
    run_certificate_property,
    run_concentration_stats,
    run_first_moment_mc,
    run_lipschitz_property,
    run_matching_distribution,
    run_upper_bound_check,
)
from .graph import (
    GnpParams,
    Graph,
    Matching,
    conflict_graph,
    count_induced_matchings,
    derive_seed,
    is_induced_matching,
    read_graph,
    sample_gnp,
    sample_gnp_product,
    write_graph,
)
from .logspace import LogValue
from .moments import (
    ModelParams,
    MomentTable,
    a_term,
    b_term,
    brute_force_second_moment,
    build_moment_table,
    conditional_expectation,
    count_compatible,
    log_expected_matchings,
    second_moment_ratio,
    target_size,
)
from .solvers import SolveResult, mim_bruteforce, mim_exact, mim_greedy, mim_local_search

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
