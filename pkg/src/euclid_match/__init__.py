"""Approximate and exact Euclidean minimum-weight perfect matching."""

from .baseline import even_forest_baseline
from .even_component import Matching, even_component_matching
from .exact import blossom_mwpm, brute_force_mwpm, exact_matching
from .geometry import L2, Metric, OddCardinalityError, PointFileError, PointSet, read_points, write_points
from .instances import gen_clustered, gen_collinear, gen_lower_bound, gen_uniform
from .iterated import RunReport, SolveConfig, approximation_ratio, solve
from .node_reduction import ReductionResult, node_reduction
from .schedule import Schedule, solve_schedule

__all__ = [
    "L2",
    "Matching",
    "Metric",
    "OddCardinalityError",
    "PointFileError",
    "PointSet",
    "ReductionResult",
    "RunReport",
    "Schedule",
    "SolveConfig",
    "approximation_ratio",
    "blossom_mwpm",
    "brute_force_mwpm",
    "even_component_matching",
    "even_forest_baseline",
    "exact_matching",
    "gen_clustered",
    "gen_collinear",
    "gen_lower_bound",
    "gen_uniform",
    "node_reduction",
    "read_points",
    "solve",
    "solve_schedule",
    "write_points",
]
