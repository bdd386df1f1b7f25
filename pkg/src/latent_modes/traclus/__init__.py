from .entropy import (EntropyProfile, epsilon_entropy, epsilon_grid, min_lns_heuristic,
                      neighbor_counts, tune_epsilon)
from .grouping import NO_CLUSTER, ClusterAssignment, Kind, TraclusParams, group_segments
from .noise import NoiseReport, assign_noise, noise_sweep
from .partition import characteristic_points, mdl_cost, partition
from .segments import (DEFAULT_WEIGHTS, LineSegment, SegmentDistance, distance_components,
                       pairwise_distances, segment_distance)

__all__ = [
    "EntropyProfile", "epsilon_entropy", "epsilon_grid", "min_lns_heuristic", "neighbor_counts",
    "tune_epsilon", "NO_CLUSTER", "ClusterAssignment", "Kind", "TraclusParams", "group_segments",
    "NoiseReport", "assign_noise", "noise_sweep", "characteristic_points", "mdl_cost", "partition",
    "DEFAULT_WEIGHTS", "LineSegment", "SegmentDistance", "distance_components",
    "pairwise_distances", "segment_distance",
]
