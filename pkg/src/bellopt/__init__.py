"""Noise thresholds for local realism with two entangled N-level systems.

The package computes the largest white-noise fraction at which the joint
measurement statistics of two maximally entangled quNits stop admitting a
local hidden-variable model, maximized over measurement settings:

- :mod:`bellopt.quantum` builds measurement unitaries and probability tables,
- :mod:`bellopt.simplex` is a self-contained dense two-phase simplex solver,
- :mod:`bellopt.lhv` poses and certifies the threshold linear program,
- :mod:`bellopt.search` runs seeded downhill-simplex searches over settings,
- :mod:`bellopt.cli` drives everything from the command line.
"""

# BLAS thread handoff is slower than single-threaded kernels at the matrix
# sizes used here, and thread count changes floating-point summation order,
# which would break bitwise-reproducible reruns.  Opt out by setting
# BELLOPT_ALLOW_THREADS before import.
import os as _os

if not _os.environ.get("BELLOPT_ALLOW_THREADS"):
    import threadpoolctl as _threadpoolctl

    _threadpoolctl.threadpool_limits(limits=1)

from .lhv import (
    LhvThreshold,
    build_lp,
    chsh_oracle_threshold,
    critical_noise_fraction,
    has_lhv_model,
    verify_lhv_model,
)
from .quantum import (
    NoisyTable,
    ObservableParams,
    PhaseSettings,
    ProbabilityTable,
    SgDirections,
    bell_multiport,
    joint_probability_multiport,
    probability_table_general,
    probability_table_multiport,
    probability_table_sg_spin1,
    unitary_from_params,
)
from .search import (
    AmoebaConfig,
    SearchAbortError,
    SearchResult,
    nelder_mead,
    optimize_general,
    optimize_multiport,
    optimize_sg_spin1,
)
from .simplex import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    LpProblem,
    LpSolution,
    SimplexStallError,
    solve_lp,
)

__version__ = "0.1.0"

__all__ = [
    "AmoebaConfig",
    "INFEASIBLE",
    "LhvThreshold",
    "LpProblem",
    "LpSolution",
    "NoisyTable",
    "ObservableParams",
    "OPTIMAL",
    "PhaseSettings",
    "ProbabilityTable",
    "SearchAbortError",
    "SearchResult",
    "SgDirections",
    "SimplexStallError",
    "UNBOUNDED",
    "bell_multiport",
    "build_lp",
    "chsh_oracle_threshold",
    "critical_noise_fraction",
    "has_lhv_model",
    "joint_probability_multiport",
    "nelder_mead",
    "optimize_general",
    "optimize_multiport",
    "optimize_sg_spin1",
    "probability_table_general",
    "probability_table_multiport",
    "probability_table_sg_spin1",
    "solve_lp",
    "unitary_from_params",
    "verify_lhv_model",
]
