"""Exact isotonic regression over finite pre-ordered sets and its limit laws."""

from .estimators import (
    EstimatorOutput,
    Sample,
    empirical_pmf,
    mixture_uniform_pmf,
    regression_means,
)
from .experiment_harness import (
    DistanceSummary,
    ExperimentConfig,
    distances,
    run_experiment,
    run_figure1,
    run_limit_check,
)
from .isotone_solver import (
    ConvergenceError,
    IsotonicFit,
    WeightedFunction,
    antitonic_regression,
    isotonic_regression,
    oracle_projection,
)
from .level_structure import (
    LevelPartition,
    NotIsotonicError,
    check_localization,
    level_partition,
    phi,
    truncated_level_partition,
)
from .limit_law import (
    LimitSpec,
    MCReport,
    PmfScenario,
    RegressionScenario,
    finite_sample_law,
    limit_check,
    sample_limit,
    truncate_infinite_pmf,
)
from .preorder import (
    ComponentPartition,
    PreOrder,
    PreOrderError,
    build_preorder,
    chain_preorder,
    comparable,
    comparable_components,
    grid_preorder,
)

__version__ = "0.1.0"
