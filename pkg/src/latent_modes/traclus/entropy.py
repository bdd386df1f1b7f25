"""Entropy-based choice of the neighborhood radius and the MinLns heuristic."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .segments import DEFAULT_WEIGHTS, pairwise_distances

ZERO_FLOOR = 1e-9


@dataclass(frozen=True)
class EntropyProfile:
    candidates: tuple[tuple[float, float, float], ...]  # (epsilon, entropy, avg neighbor count)

    def as_list(self) -> list[dict]:
        return [{"epsilon": e, "entropy": h, "avg_neighbors": a} for e, h, a in self.candidates]


def _distances(segments, weights, distances):
    return pairwise_distances(segments, weights) if distances is None else distances


def neighbor_counts(distances: np.ndarray, epsilon: float) -> np.ndarray:
    return (distances <= epsilon).sum(axis=1)


def _entropy_from_counts(counts: np.ndarray) -> float:
    p = counts / counts.sum()
    return float(max(0.0, -(p * np.log2(p)).sum()))


def epsilon_entropy(segments, epsilon: float, weights=DEFAULT_WEIGHTS,
                    distances: np.ndarray | None = None) -> tuple[float, float]:
    """Entropy of the neighborhood-size distribution and the mean neighborhood size."""
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    D = _distances(segments, weights, distances)
    if len(D) == 0:
        raise ValueError("need at least one segment")
    counts = neighbor_counts(D, epsilon)
    return _entropy_from_counts(counts), float(counts.sum() / len(D))


def epsilon_grid(distances: np.ndarray, n_candidates: int = 64, sample_size: int = 10_000,
                 seed: int = 0) -> np.ndarray:
    """Log-spaced radii between the 1st and 99th percentile of sampled pairwise distances."""
    m = len(distances)
    iu, ju = np.triu_indices(m, 1)
    if len(iu) == 0:
        return np.array([1.0])
    if len(iu) > sample_size:
        pick = np.random.default_rng(seed).choice(len(iu), size=sample_size, replace=False)
        pick.sort()
        iu, ju = iu[pick], ju[pick]
    sample = distances[iu, ju]
    lo, hi = np.percentile(sample, [1, 99])
    # distances this far below the spread are rounding residue of duplicate segments
    floor = ZERO_FLOOR * max(hi, float(sample.max()))
    if lo <= floor:
        positive = sample[sample > floor]
        lo = float(positive.min()) if len(positive) else 1.0
    if hi <= lo:
        return np.array([lo])
    return np.geomspace(lo, hi, n_candidates)


def tune_epsilon(segments, candidate_grid, weights=DEFAULT_WEIGHTS,
                 distances: np.ndarray | None = None) -> tuple[float, EntropyProfile]:
    """Grid argmin of the entropy; ties go to the smallest radius."""
    grid = sorted(float(e) for e in candidate_grid)
    if not grid:
        raise ValueError("candidate grid is empty")
    D = _distances(segments, weights, distances)
    rows = []
    for eps in grid:
        counts = neighbor_counts(D, eps)
        rows.append((eps, _entropy_from_counts(counts), float(counts.sum() / len(D))))
    best = min(range(len(rows)), key=lambda k: (rows[k][1], k))
    return rows[best][0], EntropyProfile(tuple(rows))


def min_lns_heuristic(segments, epsilon: float, weights=DEFAULT_WEIGHTS,
                      distances: np.ndarray | None = None) -> int:
    """Mean neighborhood size at ``epsilon``, rounded up."""
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    D = _distances(segments, weights, distances)
    total = int(neighbor_counts(D, epsilon).sum())
    return max(1, -(-total // len(D)))


