"""Functional bias-corrected Adam, shared by PaCMAP and behavior cloning."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AdamHyper:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def zero_moments(params: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return np.zeros_like(params), np.zeros_like(params)


def adam_update(params: np.ndarray, grads: np.ndarray,
                moments: tuple[np.ndarray, np.ndarray], hyper: AdamHyper,
                t: int) -> tuple[np.ndarray, tuple[np.ndarray, np.ndarray]]:
    """One Adam step at 1-based iteration ``t``. Inputs are not modified."""
    if t < 1:
        raise ValueError("t must be >= 1")
    if params.shape != grads.shape:
        raise ValueError(f"shape mismatch: {params.shape} vs {grads.shape}")
    m, v = moments
    m = hyper.beta1 * m + (1.0 - hyper.beta1) * grads
    v = hyper.beta2 * v + (1.0 - hyper.beta2) * (grads * grads)
    m_hat = m / (1.0 - hyper.beta1 ** t)
    v_hat = v / (1.0 - hyper.beta2 ** t)
    return params - hyper.lr * m_hat / (np.sqrt(v_hat) + hyper.eps), (m, v)
