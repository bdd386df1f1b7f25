"""Greedy reassignment of noise segments to their nearest clusters."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grouping import NO_CLUSTER, ClusterAssignment, Kind
from .segments import DEFAULT_WEIGHTS, pairwise_distances


@dataclass(frozen=True)
class NoiseReport:
    sweeps: int  # sweeps that changed at least one assignment
    converged: bool


def noise_sweep(distances: np.ndarray, cluster_ids: np.ndarray, noise_idx: np.ndarray,
                n_clusters: int, n: int) -> np.ndarray:
    """One pass over the noise segments in index order.

    Each segment moves to the cluster with the smallest mean distance over its
    ``n`` nearest members (itself excluded). Updates are applied in place, so
    later segments in the pass already see earlier moves. Ties go to the lower
    cluster id.
    """
    out = cluster_ids.copy()
    for i in noise_idx:
        row = distances[i]
        labels = out.copy()
        labels[i] = NO_CLUSTER
        best, best_c = np.inf, NO_CLUSTER
        for c in range(n_clusters):
            d = row[labels == c]
            if len(d) == 0:
                continue
            k = min(n, len(d))
            score = np.partition(d, k - 1)[:k].mean() if k < len(d) else d.mean()
            if score < best:
                best, best_c = score, c
        out[i] = best_c
    return out


def assign_noise(segments, assignment: ClusterAssignment, n: int, weights=DEFAULT_WEIGHTS,
                 distances: np.ndarray | None = None,
                 max_sweeps: int = 50) -> tuple[ClusterAssignment, NoiseReport]:
    """Give every original noise segment a cluster, sweeping until a pass changes nothing.

    Core and border labels are untouched; reassigned segments keep kind noise.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    k = assignment.n_clusters
    if k == 0:
        raise ValueError("cannot assign noise: there are no clusters")
    D = pairwise_distances(segments, weights) if distances is None else distances
    noise_idx = np.array([i for i, kind in enumerate(assignment.kinds) if kind is Kind.NOISE], dtype=np.int64)
    current = assignment.cluster_ids.copy()
    current[noise_idx] = NO_CLUSTER

    changed_sweeps = 0
    converged = False
    for _ in range(max_sweeps):
        updated = noise_sweep(D, current, noise_idx, k, n)
        if np.array_equal(updated, current):
            converged = True
            break
        current = updated
        changed_sweeps += 1
    return ClusterAssignment(assignment.kinds, current), NoiseReport(changed_sweeps, converged)
