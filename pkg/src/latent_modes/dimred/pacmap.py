"""PaCMAP: pair construction, the three-term loss, and the phased optimizer."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .adam import AdamHyper, adam_update, zero_moments
from .pca import pca


@dataclass(frozen=True)
class WeightPhase:
    """Loss weights for iterations ``start..end`` (1-based, inclusive).

    The mid-near weight moves linearly from ``w_mn_start`` to ``w_mn_end``
    across the phase.
    """
    start: int
    end: int
    w_nb: float
    w_mn_start: float
    w_mn_end: float
    w_fp: float


DEFAULT_SCHEDULE = (
    WeightPhase(1, 100, 2.0, 1000.0, 3.0, 1.0),
    WeightPhase(101, 200, 3.0, 3.0, 3.0, 1.0),
    WeightPhase(201, 450, 1.0, 0.0, 0.0, 1.0),
)


@dataclass(frozen=True)
class PacmapConfig:
    n_nb: int = 10
    mn_ratio: float = 0.5
    fp_ratio: float = 2.0
    output_dim: int = 2
    iterations: int = 450
    learning_rate: float = 1.0
    seed: int = 0
    weight_schedule: tuple[WeightPhase, ...] = DEFAULT_SCHEDULE
    candidate_pool: int = 150
    exact_max_n: int = 2000

    def __post_init__(self):
        if self.n_nb < 1 or self.output_dim < 1:
            raise ValueError("n_nb and output_dim must be >= 1")
        if self.mn_ratio <= 0 or self.fp_ratio <= 0:
            raise ValueError("MN and FP ratios must be positive")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        phases = tuple(p if isinstance(p, WeightPhase) else WeightPhase(**p)
                       for p in self.weight_schedule)
        if not phases:
            raise ValueError("weight_schedule must have at least one phase")
        object.__setattr__(self, "weight_schedule", phases)

    @property
    def n_mn(self) -> int:
        return int(round(self.n_nb * self.mn_ratio))

    @property
    def n_fp(self) -> int:
        return int(round(self.n_nb * self.fp_ratio))


@dataclass(frozen=True)
class PairSet:
    neighbor_pairs: np.ndarray  # (n * n_nb, 2)
    mn_pairs: np.ndarray
    fp_pairs: np.ndarray


@dataclass(frozen=True)
class LossWeights:
    w_nb: float
    w_mn: float
    w_fp: float


@dataclass
class Embedding:
    points: np.ndarray
    initial_loss: float = float("nan")
    final_loss: float = float("nan")
    loss_history: list[float] = field(default_factory=list)


def weights_at(schedule, iteration: int) -> LossWeights:
    """Weights in force at 1-based ``iteration``; past the last phase its end values hold."""
    for phase in schedule:
        if phase.start <= iteration <= phase.end:
            span = phase.end - phase.start
            frac = (iteration - phase.start) / span if span > 0 else 1.0
            w_mn = (1.0 - frac) * phase.w_mn_start + frac * phase.w_mn_end
            return LossWeights(phase.w_nb, w_mn, phase.w_fp)
    last = schedule[-1] if iteration > schedule[-1].end else schedule[0]
    w_mn = last.w_mn_end if last is schedule[-1] else last.w_mn_start
    return LossWeights(last.w_nb, w_mn, last.w_fp)


def _sqdist_rows(X, rows, exact):
    if exact:
        diff = X[rows, None, :] - X[None, :, :]
        return np.einsum("ijk,ijk->ij", diff, diff)
    sq = np.einsum("ij,ij->i", X, X)
    d = sq[rows, None] + sq[None, :] - 2.0 * (X[rows] @ X.T)
    return np.maximum(d, 0.0)


def _raw_candidates(X, pool, exact):
    """For each point, indices and squared distances of its ``pool`` nearest others."""
    n, dim = X.shape
    idx = np.empty((n, pool), dtype=np.int64)
    dist = np.empty((n, pool))
    chunk = max(1, int(4_000_000 // max(1, n * (dim if exact else 1))))
    for lo in range(0, n, chunk):
        rows = np.arange(lo, min(n, lo + chunk))
        d = _sqdist_rows(X, rows, exact)
        d[np.arange(len(rows)), rows] = np.inf
        if pool < n - 1:
            part = np.argpartition(d, pool - 1, axis=1)[:, :pool]
        else:
            part = np.broadcast_to(np.arange(n), d.shape)
        part_d = np.take_along_axis(d, part, axis=1)
        # order by (distance, index)
        order = np.lexsort((part, part_d), axis=1)
        sel = np.take_along_axis(part, order, axis=1)[:, :pool]
        idx[rows] = sel
        dist[rows] = np.take_along_axis(d, sel, axis=1)
    return idx, dist


def _sample_rows(rng, owners, k, n, forbidden=None):
    """For each owner, ``k`` distinct indices in [0, n) excluding the owner and ``forbidden[owner]``.

    Rejection sampling: offending entries are redrawn until every row is valid.
    """
    out = rng.integers(0, n, size=(len(owners), k))
    while True:
        bad = out == owners[:, None]
        if forbidden is not None:
            bad |= (out[:, :, None] == forbidden[owners][:, None, :]).any(axis=2)
        perm = np.argsort(out, axis=1, kind="stable")
        s = np.take_along_axis(out, perm, axis=1)
        dup_sorted = np.zeros(s.shape, dtype=bool)
        dup_sorted[:, 1:] = s[:, 1:] == s[:, :-1]
        dup = np.empty_like(dup_sorted)
        np.put_along_axis(dup, perm, dup_sorted, axis=1)
        bad |= dup
        n_bad = int(bad.sum())
        if n_bad == 0:
            return out
        out[bad] = rng.integers(0, n, size=n_bad)


def build_pairs(X, config: PacmapConfig = PacmapConfig()) -> PairSet:
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    if n <= max(7, config.n_nb + 1):
        raise ValueError(f"need more than {max(7, config.n_nb + 1)} points for n_nb={config.n_nb}, got {n}")
    if n - 1 - config.n_nb < config.n_fp:
        raise ValueError(f"too few non-neighbors ({n - 1 - config.n_nb}) to draw {config.n_fp} FP pairs")
    rng = np.random.default_rng(config.seed)
    exact = n <= config.exact_max_n
    pool = n - 1 if exact else max(min(n - 1, config.candidate_pool), config.n_nb, 6)
    cand, cand_d2 = _raw_candidates(X, pool, exact)

    # scale: mean distance to the 4th..6th nearest neighbors
    sigma = np.maximum(np.sqrt(cand_d2[:, 3:6]).mean(axis=1), 1e-10)
    scaled = cand_d2 / (sigma[:, None] * sigma[cand])
    order = np.lexsort((cand, scaled), axis=1)[:, :config.n_nb]
    nbrs = np.take_along_axis(cand, order, axis=1)
    rows = np.repeat(np.arange(n), config.n_nb)
    neighbor_pairs = np.column_stack([rows, nbrs.ravel()])

    owners = np.repeat(np.arange(n), config.n_mn)
    six = _sample_rows(rng, owners, 6, n)
    diff = X[six] - X[owners][:, None, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    rank = np.lexsort((six, d2), axis=1)
    second = np.take_along_axis(six, rank[:, 1:2], axis=1)[:, 0]
    mn_pairs = np.column_stack([owners, second])

    far = _sample_rows(rng, np.arange(n), config.n_fp, n, forbidden=nbrs)
    fp_pairs = np.column_stack([np.repeat(np.arange(n), config.n_fp), far.ravel()])
    return PairSet(neighbor_pairs.astype(np.int64), mn_pairs.astype(np.int64), fp_pairs.astype(np.int64))


def _pair_terms(Y, pairs, kind):
    i, j = pairs[:, 0], pairs[:, 1]
    diff = Y[i] - Y[j]
    d = np.einsum("ij,ij->i", diff, diff)
    if kind == "nb":
        return d / (10.0 + d), 10.0 / (10.0 + d) ** 2, diff
    if kind == "mn":
        return d / (10000.0 + d), 10000.0 / (10000.0 + d) ** 2, diff
    return 1.0 / (1.0 + d), -1.0 / (1.0 + d) ** 2, diff


def pacmap_loss(Y, pairs: PairSet, w: LossWeights) -> tuple[float, np.ndarray]:
    """Loss and its exact gradient with respect to ``Y``.

    Per-pair terms use the squared embedding distance ``d``:
    ``d/(10+d)`` for neighbors, ``d/(10000+d)`` for mid-near, ``1/(1+d)`` for FP.
    """
    Y = np.asarray(Y, dtype=float)
    n, dim = Y.shape
    loss = 0.0
    idx_i, idx_j, coef, diffs = [], [], [], []
    for kind, p, weight in (("nb", pairs.neighbor_pairs, w.w_nb),
                            ("mn", pairs.mn_pairs, w.w_mn),
                            ("fp", pairs.fp_pairs, w.w_fp)):
        if len(p) == 0 or weight == 0:
            continue
        value, dvalue, diff = _pair_terms(Y, p, kind)
        loss += weight * float(value.sum())
        idx_i.append(p[:, 0])
        idx_j.append(p[:, 1])
        coef.append(2.0 * weight * dvalue)
        diffs.append(diff)
    grad = np.zeros_like(Y)
    if not coef:
        return loss, grad
    i = np.concatenate(idx_i)
    j = np.concatenate(idx_j)
    contrib = np.concatenate(coef)[:, None] * np.concatenate(diffs)
    for k in range(dim):
        grad[:, k] = (np.bincount(i, weights=contrib[:, k], minlength=n)
                      - np.bincount(j, weights=contrib[:, k], minlength=n))
    return loss, grad


def initial_embedding(X, config: PacmapConfig) -> np.ndarray:
    """Leading principal-component projection scaled by 0.01."""
    X = np.asarray(X, dtype=float)
    k = min(config.output_dim, X.shape[1])
    Y = 0.01 * pca(X).transform(X, k)
    if k < config.output_dim:
        rng = np.random.default_rng(config.seed)
        pad = rng.normal(0.0, 1e-4, size=(X.shape[0], config.output_dim - k))
        Y = np.hstack([Y, pad])
    return Y


def pacmap_embed(X, config: PacmapConfig = PacmapConfig(), pairs: PairSet | None = None) -> Embedding:
    """Embed ``X`` into ``config.output_dim`` dimensions.

    ``initial_loss`` and ``final_loss`` are both evaluated under the weights
    of the last iteration so they are comparable.
    """
    X = np.asarray(X, dtype=float)
    if pairs is None:
        pairs = build_pairs(X, config)
    Y = initial_embedding(X, config)
    last_w = weights_at(config.weight_schedule, max(config.iterations, 1))
    initial_loss, _ = pacmap_loss(Y, pairs, last_w)
    hyper = AdamHyper(lr=config.learning_rate)
    moments = zero_moments(Y)
    history = []
    for t in range(1, config.iterations + 1):
        loss, grad = pacmap_loss(Y, pairs, weights_at(config.weight_schedule, t))
        history.append(loss)
        Y, moments = adam_update(Y, grad, moments, hyper, t)
    if not np.all(np.isfinite(Y)):
        raise FloatingPointError("PaCMAP embedding diverged to non-finite values")
    final_loss, _ = pacmap_loss(Y, pairs, last_w)
    return Embedding(Y, initial_loss, final_loss, history)
