#!/usr/bin/env python3
"""Forced-action experiments: compare the policy's return with and without early overrides."""
from __future__ import annotations

import argparse
import json
from pathlib import Path

from latent_modes.config import PipelineConfig, load_config
from latent_modes.mountain_car import EnvState
from latent_modes.pipeline import obtain_policy, patch_eval, patch_reports


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", type=Path)
    parser.add_argument("--s0", type=float, nargs=2, metavar=("POS", "VEL"), help="ad hoc start state")
    parser.add_argument("--force", type=float, nargs="+", default=[], metavar="A",
                        help="actions forced on steps 0, 1, ... (with --s0)")
    args = parser.parse_args()
    cfg = load_config(args.config) if args.config else PipelineConfig()
    net, _ = obtain_policy(cfg)
    if args.s0:
        reports = [patch_eval(net, cfg.env.build(), EnvState(*args.s0), list(enumerate(args.force)), "ad hoc")]
    else:
        reports = patch_reports(net, cfg)
    for r in reports:
        print(json.dumps(r.to_dict()))


if __name__ == "__main__":
    main()
