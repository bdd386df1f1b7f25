#!/usr/bin/env python3
"""Run the shipped configs and freeze their counts and patch returns under tests/golden/.

Re-bless only after an intentional behavior change; the tests compare against these files.
"""
from __future__ import annotations

import argparse
import json
import tempfile
from pathlib import Path

from latent_modes.config import load_config
from latent_modes.pipeline import run_pipeline

ROOT = Path(__file__).resolve().parents[1]


def golden_from_manifest(manifest: dict) -> dict:
    counts = manifest["counts"]
    spaces = [s for s in ("reduced", "raw") if s in counts]
    return {
        "episodes": counts["episodes"],
        "terminated": counts["terminated"],
        "rows": counts["rows"],
        "target_dim": manifest["resolved"]["target_dim"],
        "spaces": {s: {"n_segments": counts[s]["n_segments"], "n_clusters": counts[s]["n_clusters"],
                       "min_lns": manifest["resolved"][s]["min_lns"]} for s in spaces},
        "patch_reports": manifest["patch_reports"],
    }


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("names", nargs="*", default=["smoke", "default"])
    args = parser.parse_args()
    out_dir = ROOT / "tests" / "golden"
    out_dir.mkdir(parents=True, exist_ok=True)
    for name in args.names:
        cfg = load_config(ROOT / "configs" / f"{name}.json")
        with tempfile.TemporaryDirectory() as tmp:
            manifest = run_pipeline(cfg, Path(tmp) / name)
        golden = golden_from_manifest(manifest)
        (out_dir / f"{name}.json").write_text(json.dumps(golden, indent=1) + "\n")
        print(name, json.dumps(golden["spaces"]))


if __name__ == "__main__":
    main()
