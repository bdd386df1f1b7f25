from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# cumulative sums of float ratios rarely hit a threshold exactly
_CUMSUM_TOL = 1e-9


@dataclass(frozen=True)
class PcaResult:
    components: np.ndarray  # rows are principal directions, by decreasing variance
    explained_variance: np.ndarray
    explained_variance_ratio: np.ndarray
    mean: np.ndarray

    def transform(self, X: np.ndarray, n_components: int | None = None) -> np.ndarray:
        comps = self.components if n_components is None else self.components[:n_components]
        return (np.asarray(X, dtype=float) - self.mean) @ comps.T


def pca(X) -> PcaResult:
    """Exact PCA by eigendecomposition of the sample covariance.

    Each component is signed so its largest-magnitude entry is positive.
    Zero-variance input yields ratios (1, 0, ..., 0) by convention.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2 or X.shape[1] < 1:
        raise ValueError(f"pca needs an N x D matrix with N >= 2, got shape {X.shape}")
    mean = X.mean(axis=0)
    centered = X - mean
    cov = centered.T @ centered / (X.shape[0] - 1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(-evals, kind="stable")
    evals = np.clip(evals[order], 0.0, None)
    comps = evecs[:, order].T.copy()
    pivots = np.argmax(np.abs(comps), axis=1)
    signs = np.sign(comps[np.arange(len(comps)), pivots])
    comps *= np.where(signs == 0, 1.0, signs)[:, None]

    total = evals.sum()
    if total > 0:
        ratios = evals / total
    else:
        ratios = np.zeros_like(evals)
        ratios[0] = 1.0
    return PcaResult(comps, evals, ratios, mean)


def choose_target_dim(ratios, threshold: float = 0.999) -> int:
    """Smallest number of leading components whose cumulative ratio reaches ``threshold``."""
    if not 0 < threshold <= 1:
        raise ValueError("threshold must lie in (0, 1]")
    ratios = np.asarray(ratios, dtype=float)
    cumulative = np.cumsum(ratios)
    hits = np.nonzero(cumulative >= threshold - _CUMSUM_TOL)[0]
    return int(hits[0]) + 1 if len(hits) else len(ratios)
