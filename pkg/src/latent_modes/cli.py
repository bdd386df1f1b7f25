"""``latent-modes`` command line: one subcommand per pipeline stage plus ``run-all``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import pipeline as pl
from .config import ConfigError, PipelineConfig, config_from_dict, load_config
from .policy import load_weights, save_weights

EXIT_OK, EXIT_CONFIG, EXIT_STAGE = 0, 2, 3

log = logging.getLogger("latent_modes")


def _require(path: Path, producer: str) -> Path:
    if not path.exists():
        raise FileNotFoundError(f"{path} not found; run `latent-modes {producer}` first")
    return path


def _policy(cfg: PipelineConfig, out: Path):
    if cfg.policy_path:
        return load_weights(cfg.policy_path)
    return load_weights(_require(out / pl.POLICY_FILE, "train-bc"))


def _dataset(cfg, out: Path):
    return pl.load_dataset(_require(out / pl.DATASET_FILE, "rollout"), cfg)


def cmd_train_bc(cfg, out: Path) -> None:
    net, loss = pl.obtain_policy(cfg)
    save_weights(net, out / pl.POLICY_FILE)
    if loss is not None:
        log.info("behavior cloning final loss %.6g", loss)


def cmd_rollout(cfg, out: Path) -> None:
    dataset = pl.rollout_dataset(_policy(cfg, out), cfg)
    pl.write_dataset_csv(dataset, out / pl.DATASET_FILE)
    done = sum(ep.terminated for ep in dataset.episodes)
    log.info("%d episodes, %d reached the goal, %d rows", len(dataset.episodes), done,
             dataset.latent_matrix.shape[0])


def cmd_reduce(cfg, out: Path) -> None:
    dataset = _dataset(cfg, out)
    reduced = pl.reduce_latents(dataset.latent_matrix, cfg)
    pl._dump_json({"explained_variance_ratio": reduced.explained_variance_ratio.tolist(),
                   "threshold": cfg.pca_threshold, "target_dim": reduced.target_dim}, out / pl.PCA_FILE)
    pl.write_embedding_csv(reduced.points, dataset.row_provenance, out / pl.EMBEDDING_FILE)
    log.info("target dim %d, loss %.4g -> %.4g", reduced.target_dim, reduced.initial_loss, reduced.final_loss)


def cmd_sweep_nnb(cfg, out: Path) -> None:
    dataset = _dataset(cfg, out)
    for name, doc in pl.sweep_documents(dataset.latent_matrix, dataset.row_provenance, cfg).items():
        path = out / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(doc)


def _points(space: str, cfg, out: Path, dataset):
    if space == "raw":
        return dataset.latent_matrix
    points, prov = pl.read_embedding_csv(_require(out / pl.EMBEDDING_FILE, "reduce"))
    if prov != dataset.row_provenance:
        raise ValueError("embedding.csv rows do not match dataset.csv; rerun `reduce`")
    return points


def cmd_cluster(cfg, out: Path) -> None:
    dataset = _dataset(cfg, out)
    for space in cfg.spaces:
        res = pl.cluster_points(_points(space, cfg, out, dataset), dataset.row_provenance,
                                cfg.space_section(space), cfg.seed, space)
        pl._dump_json(pl.clusters_to_json(res), out / pl.clusters_file(space))


def cmd_plot(cfg, out: Path) -> None:
    dataset = _dataset(cfg, out)
    for space in cfg.spaces:
        data = json.loads(_require(out / pl.clusters_file(space), "cluster").read_text())
        segments, assignment = pl.clusters_from_json(data)
        for name, doc in pl.plot_documents(assignment, segments, dataset, cfg, space).items():
            (out / name).write_text(doc)


def cmd_patch_eval(cfg, out: Path) -> None:
    reports = pl.patch_reports(_policy(cfg, out), cfg)
    pl._dump_json([r.to_dict() for r in reports], out / pl.PATCH_FILE)
    for r in reports:
        log.info("%s: return %g -> %g, length %d -> %d", r.name, r.baseline_return, r.patched_return,
                 r.baseline_len, r.patched_len)


COMMANDS = {
    "train-bc": (cmd_train_bc, "train the behavior-cloned policy and write policy.json"),
    "rollout": (cmd_rollout, "roll the policy out from the start grid and write dataset.csv"),
    "reduce": (cmd_reduce, "PCA target dim plus PaCMAP; writes pca.json and embedding.csv"),
    "sweep-nnb": (cmd_sweep_nnb, "one 2-D embedding SVG per candidate neighbor count"),
    "cluster": (cmd_cluster, "partition and group trajectories; writes clusters_<space>.json"),
    "plot": (cmd_plot, "back-map clusters to state space and render SVGs"),
    "patch-eval": (cmd_patch_eval, "forced-action experiments; writes patch_reports.json"),
    "run-all": (None, "every stage in order, plus manifest.json"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="latent-modes",
                                     description="Cluster policy latent trajectories and map them back to state space.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
        p.add_argument("--config", type=Path, help="JSON config; omitted fields take defaults")
        p.add_argument("--seed", type=int, help="override the top-level seed")
        p.add_argument("--out", type=Path, help="override output_dir")
    return parser


def resolve_config(args) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig().validate()
    if args.seed is not None:
        data = cfg.to_dict()
        data["seed"] = args.seed
        cfg = config_from_dict(data)
    if args.out is not None:
        cfg.output_dir = str(args.out)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(cfg.output_dir)
    try:
        if args.command == "run-all":
            pl.run_pipeline(cfg, out)
        else:
            out.mkdir(parents=True, exist_ok=True)
            with pl.stage(args.command):
                COMMANDS[args.command][0](cfg, out)
    except pl.StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
