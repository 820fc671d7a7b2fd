"""Hybrid surrogate/solver rollouts for dissipative PDEs.

A fast autoregressive surrogate advances the solution; an exponential
moving average of the normalized PDE residual is monitored online, and a
high-fidelity solver takes over for fixed-length corrective bursts
whenever the estimate crosses a time-decaying threshold.
"""

from .benchmarks import BENCHMARK_NAMES, benchmark, build_grid, build_spec
from .controller import HybridConfig, compare_rollouts, hybrid_rollout, surrogate_rollout
from .errors import (
    CoefficientOverflowError,
    DegenerateReferenceError,
    EmptyDomainError,
    EstimatorCorruptError,
    GridMismatchError,
    HybridPdeError,
    InsufficientRankError,
    NoSpectralSplitError,
    NonFiniteFieldError,
    SolverDivergedError,
    SurrogateDivergedError,
    TrajectoryGapError,
    UndefinedCorrelationError,
)
from .estimator import (
    EstimatorState,
    ThresholdPolicy,
    ema_update,
    normalized_residual,
    pde_residual,
    threshold_at,
)
from .grids import FieldState, Grid, load_field, norm_l2, prolong, restrict, save_field, u0_max
from .metrics import ComparisonReport, pearson, relative_l2, time_block
from .pdes import PdeSpec, SplitOperator, rhs, split
from .records import RolloutRecord
from .sampling import IcSpec, default_ic_spec, sample_ensemble, sample_ic
from .solvers import Etdrk4Coefficients, SolverConfig, etdrk4_precompute, solve_trajectory, solver_step
from .surrogates import (
    CoarseSpectralSurrogate,
    LinearMapSurrogate,
    SolverSurrogate,
    fit_linear_surrogate,
    load_surrogate,
    save_surrogate,
    surrogate_step,
)

__version__ = "0.1.0"
