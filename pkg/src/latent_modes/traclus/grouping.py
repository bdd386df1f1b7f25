"""Density-based grouping of segments into core, border and noise."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .segments import DEFAULT_WEIGHTS, pairwise_distances

NO_CLUSTER = -1


class Kind(str, Enum):
    CORE = "core"
    BORDER = "border"
    NOISE = "noise"


@dataclass(frozen=True)
class TraclusParams:
    epsilon: float
    min_lns: int
    distance_weights: tuple[float, float, float] = DEFAULT_WEIGHTS

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if int(self.min_lns) != self.min_lns or self.min_lns < 1:
            raise ValueError("min_lns must be an integer >= 1")
        object.__setattr__(self, "min_lns", int(self.min_lns))
        object.__setattr__(self, "distance_weights", tuple(float(w) for w in self.distance_weights))


@dataclass(frozen=True, eq=False)
class ClusterAssignment:
    kinds: tuple[Kind, ...]
    cluster_ids: np.ndarray  # NO_CLUSTER where unassigned

    @property
    def n_clusters(self) -> int:
        return int(self.cluster_ids.max()) + 1 if len(self.cluster_ids) and self.cluster_ids.max() >= 0 else 0

    @property
    def labels(self) -> list[tuple[Kind, int | None]]:
        return [(k, None if c == NO_CLUSTER else int(c)) for k, c in zip(self.kinds, self.cluster_ids)]

    def count(self, kind: Kind) -> int:
        return sum(1 for k in self.kinds if k is kind)

    def __eq__(self, other):
        if not isinstance(other, ClusterAssignment):
            return NotImplemented
        return self.kinds == other.kinds and np.array_equal(self.cluster_ids, other.cluster_ids)


def group_segments(segments, params: TraclusParams, distances: np.ndarray | None = None) -> ClusterAssignment:
    """Label segments core/border/noise; cluster ids in discovery order.

    A segment's neighborhood includes itself. Seeds are visited in index
    order and clusters expand breadth-first with neighbors in index order;
    a border segment joins the first cluster that reaches it.
    """
    D = pairwise_distances(segments, params.distance_weights) if distances is None else distances
    m = len(D)
    neighbors = [np.nonzero(D[i] <= params.epsilon)[0] for i in range(m)]
    is_core = np.array([len(nb) >= params.min_lns for nb in neighbors], dtype=bool)
    cluster = np.full(m, NO_CLUSTER, dtype=np.int64)

    next_id = 0
    for seed in range(m):
        if not is_core[seed] or cluster[seed] != NO_CLUSTER:
            continue
        cluster[seed] = next_id
        queue = deque([seed])
        while queue:
            current = queue.popleft()
            for nb in neighbors[current]:
                if cluster[nb] == NO_CLUSTER:
                    cluster[nb] = next_id
                    if is_core[nb]:
                        queue.append(nb)
        next_id += 1

    kinds = tuple(Kind.CORE if is_core[i] else Kind.BORDER if cluster[i] != NO_CLUSTER else Kind.NOISE
                  for i in range(m))
    return ClusterAssignment(kinds, cluster)
