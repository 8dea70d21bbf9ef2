"""MAP inference for pairwise MRFs with semi-metric potentials.

Hierarchical graph-cut solvers over mixtures of tree metrics, move-making
baselines, a synthetic benchmark harness, and a file-driven CLI.
"""

__version__ = "0.1.0"

from .distances import (
    MatrixDistance,
    TreeDistance,
    TruncatedLinear,
    TruncatedQuadratic,
    Uniform,
    gamma,
    metric_closure,
    validate_semimetric,
)
from .hst import (
    HstMixture,
    HstTree,
    distortion,
    dp_solve,
    embed_semimetric,
    frt_sample,
    learn_mixture,
    tree_distance,
)
from .maxflow import FlowGraph, max_flow
from .moves import MoveStats, alpha_expansion, ab_swap, expansion_move, fuse
from .mrf import MrfInstance, energy, grid_edges
from .solver import SolveConfig, SolveReport, refine, solve, solve_hst, solve_semimetric

__all__ = [
    "FlowGraph",
    "HstMixture",
    "HstTree",
    "MatrixDistance",
    "MoveStats",
    "MrfInstance",
    "SolveConfig",
    "SolveReport",
    "TreeDistance",
    "TruncatedLinear",
    "TruncatedQuadratic",
    "Uniform",
    "ab_swap",
    "alpha_expansion",
    "distortion",
    "dp_solve",
    "embed_semimetric",
    "energy",
    "expansion_move",
    "frt_sample",
    "fuse",
    "gamma",
    "grid_edges",
    "learn_mixture",
    "max_flow",
    "metric_closure",
    "refine",
    "solve",
    "solve_hst",
    "solve_semimetric",
    "tree_distance",
    "validate_semimetric",
    "__version__",
]
