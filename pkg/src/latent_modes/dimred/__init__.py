from .adam import AdamHyper, adam_update, zero_moments
from .pacmap import (DEFAULT_SCHEDULE, Embedding, LossWeights, PacmapConfig, PairSet,
                     WeightPhase, build_pairs, pacmap_embed, pacmap_loss, weights_at)
from .pca import PcaResult, choose_target_dim, pca

__all__ = [
    "AdamHyper", "adam_update", "zero_moments",
    "DEFAULT_SCHEDULE", "Embedding", "LossWeights", "PacmapConfig", "PairSet", "WeightPhase",
    "build_pairs", "pacmap_embed", "pacmap_loss", "weights_at",
    "PcaResult", "choose_target_dim", "pca",
]
