"""DV-Hop localization with hop-loss driven multi-objective refinement.

Submodules:

* :mod:`dcchop.network`    -- synthetic sensor layouts, connectivity, hop counts
* :mod:`dcchop.dvhop`      -- classic DV-Hop distance estimation and multilateration
* :mod:`dcchop.objectives` -- distance residual and the Base / ACCC / DCC hop losses
* :mod:`dcchop.moga`       -- NSGA-II style optimizer over unknown-node coordinates
* :mod:`dcchop.metrics`    -- MLEs, confidence intervals, timing decomposition
* :mod:`dcchop.bench`      -- seeded sweeps, summaries and plot-ready CSV output
"""

from dcchop.errors import (
    DcchopError,
    DegenerateGeometry,
    DimensionMismatch,
    EmptyFront,
    EmptyInput,
    GenerationFailed,
    InsufficientSamples,
    InvalidConfig,
    MissingCells,
    NoReachableAnchor,
)
from dcchop.network import (
    UNREACHABLE,
    MaskParams,
    Network,
    Topology,
    build_adjacency,
    generate_topology,
    hop_matrix,
    predicted_hops,
)
from dcchop.dvhop import DistanceEstimate, avg_hop_distance, estimate_distances, least_squares_fix
from dcchop.objectives import HopLossKind, ObjectiveVector, distance_residual_loss, evaluate, hop_loss
from dcchop.moga import GaConfig, ParetoFront, evolve, select_solution
from dcchop.metrics import RunResult, confidence_interval, mles, time_profile

__version__ = "0.1.0"

__all__ = [
    "UNREACHABLE",
    "DcchopError",
    "DegenerateGeometry",
    "DimensionMismatch",
    "DistanceEstimate",
    "EmptyFront",
    "EmptyInput",
    "GaConfig",
    "GenerationFailed",
    "HopLossKind",
    "InsufficientSamples",
    "InvalidConfig",
    "MaskParams",
    "MissingCells",
    "Network",
    "NoReachableAnchor",
    "ObjectiveVector",
    "ParetoFront",
    "RunResult",
    "Topology",
    "avg_hop_distance",
    "build_adjacency",
    "confidence_interval",
    "distance_residual_loss",
    "estimate_distances",
    "evaluate",
    "evolve",
    "generate_topology",
    "hop_loss",
    "hop_matrix",
    "least_squares_fix",
    "mles",
    "predicted_hops",
    "select_solution",
    "time_profile",
]
