"""Approximate trajectory partitioning by minimum description length."""
from __future__ import annotations

import numpy as np

from .segments import DEFAULT_WEIGHTS, LineSegment, distance_components


def _log2_clamped(x):
    return np.log2(np.maximum(x, 1.0))


def mdl_cost(points, i: int, j: int, partitioned: bool, weights=DEFAULT_WEIGHTS) -> float:
    """Description length of the sub-trajectory ``points[i..j]``.

    ``partitioned``: L(H) = log2 |p_i p_j| plus L(D|H), the log2 of the summed
    perpendicular and summed angle distances of the original segments to the
    chord (the chord is the projection base). Otherwise the sum of log2
    lengths of the original segments. Every log argument is clamped to >= 1.
    Only the perpendicular and angle weights are used.
    """
    pts = np.asarray(points, dtype=float)
    if not 0 <= i < j < len(pts):
        raise ValueError(f"need 0 <= i < j < {len(pts)}, got i={i}, j={j}")
    seg_s, seg_e = pts[i:j], pts[i + 1:j + 1]
    if not partitioned:
        return float(_log2_clamped(np.linalg.norm(seg_e - seg_s, axis=1)).sum())
    w_perp, _, w_angle = weights
    chord_s = np.broadcast_to(pts[i], seg_s.shape)
    chord_e = np.broadcast_to(pts[j], seg_s.shape)
    perp, _, angle = distance_components(chord_s, chord_e, seg_s, seg_e)
    l_h = _log2_clamped(np.linalg.norm(pts[j] - pts[i]))
    l_dh = _log2_clamped(w_perp * perp.sum()) + _log2_clamped(w_angle * angle.sum())
    return float(l_h + l_dh)


def characteristic_points(points, weights=DEFAULT_WEIGHTS) -> list[int]:
    """Indices of characteristic points; always includes the first and last point."""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if n < 2:
        raise ValueError("partition needs at least 2 points")
    cps = [0]
    start, length = 0, 1
    while start + length < n:
        curr = start + length
        cost_par = mdl_cost(pts, start, curr, True, weights)
        cost_nopar = mdl_cost(pts, start, curr, False, weights)
        if cost_par > cost_nopar and length > 1:
            cps.append(curr - 1)
            start, length = curr - 1, 1
        else:
            length += 1
    cps.append(n - 1)
    return cps


def partition(points, episode_id: int = 0, step_indices=None,
              weights=DEFAULT_WEIGHTS) -> list[LineSegment]:
    """Split one trajectory into segments between consecutive characteristic points.

    ``step_indices[k]`` is the episode step of ``points[k]`` (defaults to k).
    """
    pts = np.asarray(points, dtype=float)
    if len(pts) < 2:
        raise ValueError("partition needs at least 2 points")
    steps = np.arange(len(pts)) if step_indices is None else np.asarray(step_indices)
    cps = characteristic_points(pts, weights)
    return [LineSegment(pts[a], pts[b], episode_id, int(steps[a]), int(steps[b]))
            for a, b in zip(cps[:-1], cps[1:])]
