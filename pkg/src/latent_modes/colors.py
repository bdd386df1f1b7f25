"""Mutually distinct plot colors, kept away from the white background."""
from __future__ import annotations

import numpy as np

WHITE = np.array([1.0, 1.0, 1.0])
WHITE_EXCLUSION = 0.15


def candidate_pool(seed: int = 0, size: int = 4096) -> np.ndarray:
    """Cube corners plus seeded uniform samples, minus anything near white."""
    corners = np.array([[r, g, b] for r in (0.0, 1.0) for g in (0.0, 1.0) for b in (0.0, 1.0)])
    pool = np.vstack([corners, np.random.default_rng(seed).random((size, 3))])
    return pool[np.linalg.norm(pool - WHITE, axis=1) > WHITE_EXCLUSION]


def distinct_colors(k: int, seed: int = 0, pool: np.ndarray | None = None) -> list[tuple[float, float, float]]:
    """Greedy farthest-point picks: each color maximizes its minimum distance to
    white and to the colors already chosen."""
    if k < 1:
        raise ValueError("k must be >= 1")
    pool = candidate_pool(seed) if pool is None else np.asarray(pool, dtype=float)
    if k > len(pool):
        raise ValueError(f"cannot pick {k} distinct colors from a pool of {len(pool)}")
    nearest = np.linalg.norm(pool - WHITE, axis=1)
    chosen = []
    for _ in range(k):
        best = int(np.argmax(nearest))
        chosen.append(best)
        nearest = np.minimum(nearest, np.linalg.norm(pool - pool[best], axis=1))
    return [tuple(float(c) for c in pool[i]) for i in chosen]


def to_hex(rgb) -> str:
    return "#" + "".join(f"{int(round(255 * min(max(c, 0.0), 1.0))):02x}" for c in rgb)
