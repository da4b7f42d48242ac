"""Sparse differential-network estimation via the exact penalized solution path."""

from .covariance import (
    Dataset,
    DatasetCollection,
    TiesWarning,
    estimate_correlation,
    kendall_tau,
    kendall_tau_brute,
    project_psd,
    tau_matrix,
    tau_to_correlation,
    weighted_tau,
)
from .exceptions import (
    DiffPathError,
    DimensionMismatch,
    InsufficientSamples,
    NoStableLambda,
    NotPSD,
    NotSymmetric,
    OutOfRange,
    SingularActiveSet,
)
from .datagen import (
    GraphStructure,
    PrecisionPair,
    SyntheticInstance,
    build_precision_pair,
    perturb_graph,
    precision_to_correlation,
    sample_collection,
    sample_npn,
    scale_free_graph,
    synthetic_instance,
)
from .estimator import DifferentialNetwork
from .evaluation import (
    PRCurve,
    PRPoint,
    StabilityProfile,
    default_lambda_grid,
    precision_recall,
    stars_select,
    timing_benchmark,
)
from .hessian import ActiveBlockInverse, DTraceHessian, exchange_index, vec_index, vec_pair
from .pathsolver import (
    Knot,
    KKTReport,
    PathEvent,
    PathState,
    SolutionPath,
    SparseDelta,
    compute_path,
    crossing_event,
    hitting_event,
    interpolate,
    kkt_check,
)
from .proximal import SolveReport, objective_value, proximal_gradient_solve

__version__ = "0.1.0"

__all__ = [
    "ActiveBlockInverse",
    "Dataset",
    "DatasetCollection",
    "DiffPathError",
    "DifferentialNetwork",
    "DimensionMismatch",
    "DTraceHessian",
    "GraphStructure",
    "InsufficientSamples",
    "Knot",
    "KKTReport",
    "NoStableLambda",
    "NotPSD",
    "NotSymmetric",
    "OutOfRange",
    "PathEvent",
    "PathState",
    "PRCurve",
    "PRPoint",
    "PrecisionPair",
    "SingularActiveSet",
    "SolutionPath",
    "SolveReport",
    "SparseDelta",
    "StabilityProfile",
    "SyntheticInstance",
    "TiesWarning",
    "build_precision_pair",
    "compute_path",
    "crossing_event",
    "default_lambda_grid",
    "estimate_correlation",
    "exchange_index",
    "hitting_event",
    "interpolate",
    "kendall_tau",
    "kendall_tau_brute",
    "kkt_check",
    "objective_value",
    "perturb_graph",
    "precision_recall",
    "precision_to_correlation",
    "project_psd",
    "proximal_gradient_solve",
    "sample_collection",
    "sample_npn",
    "scale_free_graph",
    "stars_select",
    "synthetic_instance",
    "tau_matrix",
    "tau_to_correlation",
    "timing_benchmark",
    "vec_index",
    "vec_pair",
    "weighted_tau",
]
