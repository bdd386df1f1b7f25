"""Line segments and the perpendicular/parallel/angle segment distance."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


@dataclass(frozen=True, eq=False)
class LineSegment:
    start: np.ndarray
    end: np.ndarray
    episode_id: int = 0
    start_step: int = 0
    end_step: int = 1

    def __post_init__(self):
        object.__setattr__(self, "start", np.asarray(self.start, dtype=float))
        object.__setattr__(self, "end", np.asarray(self.end, dtype=float))
        if self.start.shape != self.end.shape or self.start.ndim != 1:
            raise ValueError("segment endpoints must be vectors of equal length")
        if self.end_step < self.start_step:
            raise ValueError("end_step precedes start_step")

    @property
    def provenance(self) -> tuple[int, int, int]:
        return (self.episode_id, self.start_step, self.end_step)

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.end - self.start))

    @property
    def degenerate(self) -> bool:
        return bool(np.array_equal(self.start, self.end))


class SegmentDistance(NamedTuple):
    perpendicular: float
    parallel: float
    angle: float
    total: float


DEFAULT_WEIGHTS = (1.0, 1.0, 1.0)


def distance_components(base_s, base_e, other_s, other_e):
    """Distance components with ``base`` as the projection line. Works row-wise on (..., d) arrays.

    A zero-length base projects everything onto its single point.
    """
    u = base_e - base_s
    len2 = np.sum(u * u, axis=-1)
    safe = np.where(len2 > 0, len2, 1.0)
    t_s = np.where(len2 > 0, np.sum((other_s - base_s) * u, axis=-1) / safe, 0.0)
    t_e = np.where(len2 > 0, np.sum((other_e - base_s) * u, axis=-1) / safe, 0.0)
    # offsets from the base start, so an endpoint shared with the base yields exactly 0
    l1 = np.linalg.norm((other_s - base_s) - t_s[..., None] * u, axis=-1)
    l2 = np.linalg.norm((other_e - base_s) - t_e[..., None] * u, axis=-1)
    denom = l1 + l2
    perp = np.where(denom > 0, (l1 * l1 + l2 * l2) / np.where(denom > 0, denom, 1.0), 0.0)

    base_len = np.sqrt(len2)
    par1 = np.minimum(np.abs(t_s), np.abs(1.0 - t_s)) * base_len
    par2 = np.minimum(np.abs(t_e), np.abs(1.0 - t_e)) * base_len
    par = np.minimum(par1, par2)

    v = other_e - other_s
    other_len = np.linalg.norm(v, axis=-1)
    dot = np.sum(u * v, axis=-1)
    # |v| sin(theta) is the norm of v's component orthogonal to u; no cancellation near theta = 0
    along = np.where(len2 > 0, dot / safe, 0.0)
    across = np.linalg.norm(v - along[..., None] * u, axis=-1)
    angle = np.where((dot < 0) & (len2 > 0), other_len, np.where(len2 > 0, across, 0.0))
    return perp, par, angle


def _base_first(a: LineSegment, b: LineSegment) -> bool:
    la, lb = a.length, b.length
    if la != lb:
        return la > lb
    return a.provenance <= b.provenance


def segment_distance(a: LineSegment, b: LineSegment, weights=DEFAULT_WEIGHTS) -> SegmentDistance:
    """Symmetric TRACLUS distance; the longer segment is the projection base."""
    if a.start.shape != b.start.shape:
        raise ValueError("segments live in different dimensions")
    base, other = (a, b) if _base_first(a, b) else (b, a)
    perp, par, angle = (float(x) for x in
                        distance_components(base.start, base.end, other.start, other.end))
    w_perp, w_par, w_angle = weights
    return SegmentDistance(perp, par, angle, w_perp * perp + w_par * par + w_angle * angle)


def _stack(segments):
    starts = np.array([s.start for s in segments], dtype=float)
    ends = np.array([s.end for s in segments], dtype=float)
    return starts, ends


def pairwise_distances(segments, weights=DEFAULT_WEIGHTS, chunk_elems: int = 2_000_000) -> np.ndarray:
    """Full symmetric matrix of total segment distances."""
    m = len(segments)
    if m == 0:
        return np.zeros((0, 0))
    starts, ends = _stack(segments)
    lengths = np.array([s.length for s in segments])
    # rank by provenance for length ties
    prov = np.array([s.provenance for s in segments])
    rank = np.empty(m, dtype=np.int64)
    rank[np.lexsort(prov.T[::-1])] = np.arange(m)
    w_perp, w_par, w_angle = weights

    out = np.zeros((m, m))
    dim = starts.shape[1]
    step = max(1, chunk_elems // max(1, m * dim))
    for lo in range(0, m, step):
        rows = np.arange(lo, min(m, lo + step))
        li = lengths[rows][:, None]
        row_is_base = (li > lengths[None, :]) | ((li == lengths[None, :]) & (rank[rows][:, None] <= rank[None, :]))
        mask = row_is_base[..., None]
        si, ei = starts[rows][:, None, :], ends[rows][:, None, :]
        sj, ej = starts[None, :, :], ends[None, :, :]
        bs, be = np.where(mask, si, sj), np.where(mask, ei, ej)
        os_, oe = np.where(mask, sj, si), np.where(mask, ej, ei)
        perp, par, angle = distance_components(bs, be, os_, oe)
        out[rows] = w_perp * perp + w_par * par + w_angle * angle
    upper = np.triu(out, 1)
    return upper + upper.T
