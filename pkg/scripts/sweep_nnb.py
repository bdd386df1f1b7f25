#!/usr/bin/env python3
"""2-D PaCMAP embeddings of the policy latents for several neighbor counts.

Pick n_nb by eye from the SVGs, then set `pacmap.n_nb` in the config.
"""
from __future__ import annotations

import argparse
from pathlib import Path

from latent_modes.config import PipelineConfig, load_config
from latent_modes.pipeline import obtain_policy, rollout_dataset, sweep_documents


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", type=Path)
    parser.add_argument("--out", type=Path, default=Path("out/sweep"))
    parser.add_argument("--nnb", type=int, nargs="+", help="candidates (default: config sweep_nnb)")
    args = parser.parse_args()
    cfg = load_config(args.config) if args.config else PipelineConfig()
    if args.nnb:
        cfg.sweep_nnb = args.nnb
    net, _ = obtain_policy(cfg)
    dataset = rollout_dataset(net, cfg)
    for name, doc in sweep_documents(dataset.latent_matrix, dataset.row_provenance, cfg).items():
        path = args.out / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(doc)
        print(path)


if __name__ == "__main__":
    main()
