"""Transductive classification from bag-level label proportions.

Instances come unlabeled; supervision is the class proportion of each bag.
A Gaussian similarity graph propagates label mass between neighbors while
alternating projections keep every bag's soft-label mass pinned to its
prescribed count, recovering per-instance labels.
"""

from .data import (
    BagConstraintSystem,
    BagStructure,
    Dataset,
    RngSeed,
    bag_structure_from_proportions,
    load_bag_csv,
    load_dataset_csv,
    make_bag_structure,
    write_bag_csv,
    write_dataset_csv,
)
from .datasets import BagSpec, assign_bags, gen_half_kernel, gen_xor, preset_proportions
from .estimator import ProportionPropagation
from .exceptions import (
    ConfigError,
    DataFormatError,
    EmptyBagError,
    IllConditionedError,
    InfeasibleSpecError,
    LLPError,
    NonConvergenceError,
    ZeroDegreeError,
)
from .experiment import (
    ExperimentConfig,
    ExperimentResult,
    accuracy,
    emit_results,
    run_experiment,
    select_gamma,
    smoothness_score,
    solve_trial,
)
from .graph import RowStochasticGraph, build_graph, compute_similarity, row_normalize
from .projections import (
    ProjectionResult,
    alternating_projections,
    project_bag_mass,
    project_box,
    project_row_simplex,
)
from .propagation import (
    PropagationConfig,
    PropagationDiagnostics,
    decide_labels,
    decide_labels_multiclass,
    evaluate_objective,
    init_soft_labels,
    propagate_closed_form,
    propagate_constrained,
    propagate_power_iteration,
    weighted_knn_baseline,
)

__version__ = "0.1.0"

__all__ = [
    "BagConstraintSystem",
    "BagSpec",
    "BagStructure",
    "ConfigError",
    "DataFormatError",
    "Dataset",
    "EmptyBagError",
    "ExperimentConfig",
    "ExperimentResult",
    "IllConditionedError",
    "InfeasibleSpecError",
    "LLPError",
    "NonConvergenceError",
    "ProjectionResult",
    "PropagationConfig",
    "PropagationDiagnostics",
    "ProportionPropagation",
    "RngSeed",
    "RowStochasticGraph",
    "ZeroDegreeError",
    "accuracy",
    "alternating_projections",
    "assign_bags",
    "bag_structure_from_proportions",
    "build_graph",
    "compute_similarity",
    "decide_labels",
    "decide_labels_multiclass",
    "emit_results",
    "evaluate_objective",
    "gen_half_kernel",
    "gen_xor",
    "init_soft_labels",
    "load_bag_csv",
    "load_dataset_csv",
    "make_bag_structure",
    "preset_proportions",
    "project_bag_mass",
    "project_box",
    "project_row_simplex",
    "propagate_closed_form",
    "propagate_constrained",
    "propagate_power_iteration",
    "row_normalize",
    "run_experiment",
    "select_gamma",
    "smoothness_score",
    "solve_trial",
    "weighted_knn_baseline",
    "write_bag_csv",
    "write_dataset_csv",
]
