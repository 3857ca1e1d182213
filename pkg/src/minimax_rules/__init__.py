"""Minimax and minimax-regret decision rules with diagnostic probes."""

__version__ = "0.1.0"

from .core import CostMatrix, RegretKind, RegretMatrix, build_cost_matrix, regret_transform
from .errors import (
    DimensionMismatch,
    DuplicateLabel,
    EmptyScenarioSet,
    Infeasible,
    InvalidProbability,
    IterationLimit,
    MinimaxError,
    NonFiniteEntry,
    NotUniqueMinimizer,
    NumericFailure,
    OutOfBounds,
    ParseError,
    SolverError,
    TooManyProjects,
    UnknownLabel,
    UnknownScenario,
    ValidationError,
)
from .finite import (
    Selection,
    find_preference_cycles,
    gaming_construct,
    iia_probe,
    minimax_select,
    pairwise_preference,
    rationalizability,
    risk_aversion_limit,
)
from .simplex import LpSolution, LpStatus, solve_lp
from .robust import ProbabilityPolytope, block_structure, dual_certificate, inner_max, robust_select_finite
from .functions import ExpLinear, PiecewiseLinear, Quadratic
from .continuous import (
    AnchoredFamily,
    ContinuousProblem,
    ContinuousSolution,
    determining_set,
    hull_reduce,
    regret_functions,
    robust_block_solve,
    solve_1d,
    solve_nd,
)
from .projects import (
    AdditiveProjectInstance,
    essential_scenarios,
    induced_cost_matrix,
    mean_regret_additive,
    project_iia_probe,
    select_projects,
)
from .capacity import (
    CapacityScenario,
    CapacityStudy,
    capacity_cost,
    emit_curves,
    minimax_regret_capacity,
    scenario_optimum,
    synth_ecr,
)
from .montecarlo import McConfig, McResult, run_study
