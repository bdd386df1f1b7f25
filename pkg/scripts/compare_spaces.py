#!/usr/bin/env python3
"""Cluster the same rollouts in reduced and raw latent space and tabulate the outcome."""
from __future__ import annotations

import argparse
import json
from pathlib import Path

from latent_modes.config import PipelineConfig, load_config
from latent_modes.pipeline import run_pipeline


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", type=Path)
    parser.add_argument("--out", type=Path, default=Path("out/compare_spaces"))
    args = parser.parse_args()
    cfg = load_config(args.config) if args.config else PipelineConfig()
    cfg.compare_spaces = True
    manifest = run_pipeline(cfg, args.out)

    header = f"{'space':<8} {'segments':>8} {'clusters':>8} {'epsilon':>10} {'min_lns':>7} {'noise':>6} {'sweeps':>6}"
    print(header)
    print("-" * len(header))
    for space in cfg.spaces:
        c, r = manifest["counts"][space], manifest["resolved"][space]
        print(f"{space:<8} {c['n_segments']:>8} {c['n_clusters']:>8} {r['epsilon']:>10.4g} {r['min_lns']:>7} "
              f"{c['noise']:>6} {c['noise_sweeps']:>6}")
    print(f"\ntarget dim {manifest['resolved']['target_dim']}; outputs in {args.out}")
    (args.out / "comparison.json").write_text(json.dumps(
        {s: {**manifest["counts"][s], **manifest["resolved"][s]} for s in cfg.spaces}, indent=1) + "\n")


if __name__ == "__main__":
    main()
