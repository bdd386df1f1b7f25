"""End-to-end orchestration: train, roll out, reduce, cluster, back-map, plot, patch."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import shutil
import tempfile
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .colors import distinct_colors
from .config import PipelineConfig, TraclusSection
from .dimred import choose_target_dim, pacmap_embed, pca
from .mountain_car import EnvConfig, EnvState, initial_state_grid
from .plotting import AxesSpec, render_embedding, render_plot
from .policy import PolicyNetwork, load_weights, save_weights, train_bc
from .rollout import (TrajectoryDataset, build_dataset, dedup_episodes, read_dataset_csv,
                      run_episode, write_dataset_csv)
from .traclus import (NO_CLUSTER, ClusterAssignment, EntropyProfile, Kind, LineSegment, NoiseReport,
                      TraclusParams, assign_noise, epsilon_grid, group_segments, min_lns_heuristic,
                      pairwise_distances, partition, tune_epsilon)

log = logging.getLogger(__name__)

POLICY_FILE = "policy.json"
DATASET_FILE = "dataset.csv"
PCA_FILE = "pca.json"
EMBEDDING_FILE = "embedding.csv"
PATCH_FILE = "patch_reports.json"
MANIFEST_FILE = "manifest.json"
SWEEP_DIR = "sweep_nnb"


def clusters_file(space: str) -> str:
    return f"clusters_{space}.json"


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


class IntegrityError(RuntimeError):
    pass


@contextmanager
def stage(name: str):
    start = time.perf_counter()
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc
    log.info("%s finished in %.2fs", name, time.perf_counter() - start)


@contextmanager
def staged_outputs(out_dir):
    """Write into a scratch directory next to ``out_dir``; publish only on success."""
    out = Path(out_dir)
    out.parent.mkdir(parents=True, exist_ok=True)
    scratch = Path(tempfile.mkdtemp(prefix=f".{out.name}-staging-", dir=out.parent))
    try:
        yield scratch
    except BaseException:
        shutil.rmtree(scratch, ignore_errors=True)
        raise
    out.mkdir(parents=True, exist_ok=True)
    for path in sorted(scratch.rglob("*")):
        if path.is_file():
            target = out / path.relative_to(scratch)
            target.parent.mkdir(parents=True, exist_ok=True)
            shutil.move(str(path), str(target))
    shutil.rmtree(scratch, ignore_errors=True)


def _dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=1) + "\n")


# ---------------------------------------------------------------- back-mapping


@dataclass(frozen=True)
class BackmappedSegment:
    cluster_id: int | None
    kind: Kind
    episode_id: int
    start_step: int
    end_step: int
    state_points: tuple[tuple[float, float], ...]


def backmap_segments(assignment: ClusterAssignment, segments, dataset: TrajectoryDataset) -> list[BackmappedSegment]:
    """Resolve each segment's (episode, step range) to the recorded states. No geometry is recomputed."""
    out = []
    for (kind, cluster_id), seg in zip(assignment.labels, segments):
        try:
            episode = dataset.episode(seg.episode_id)
        except KeyError:
            raise IntegrityError(f"segment refers to missing episode {seg.episode_id}") from None
        steps = episode.steps[seg.start_step:seg.end_step + 1]
        if (len(steps) != seg.end_step - seg.start_step + 1
                or steps[0].step_index != seg.start_step or steps[-1].step_index != seg.end_step):
            raise IntegrityError(f"episode {seg.episode_id} has no steps {seg.start_step}..{seg.end_step}")
        points = tuple((s.state.position, s.state.velocity) for s in steps)
        out.append(BackmappedSegment(cluster_id, kind, seg.episode_id, seg.start_step, seg.end_step, points))
    return out


# ---------------------------------------------------------------- patching


@dataclass(frozen=True)
class PatchReport:
    s0: EnvState
    overrides: tuple[tuple[int, float], ...]
    baseline_return: float
    patched_return: float
    baseline_len: int
    patched_len: int
    name: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "s0": [self.s0.position, self.s0.velocity],
                "overrides": [list(o) for o in self.overrides],
                "baseline_return": self.baseline_return, "patched_return": self.patched_return,
                "baseline_len": self.baseline_len, "patched_len": self.patched_len}


def patch_eval(net: PolicyNetwork, config: EnvConfig, s0: EnvState, overrides=(), name: str = "") -> PatchReport:
    """Compare the plain policy with the same rollout under forced actions."""
    overrides = tuple((int(k), float(a)) for k, a in overrides)
    baseline = run_episode(net, config, s0)
    patched = run_episode(net, config, s0, overrides)
    return PatchReport(s0, overrides, baseline.total_reward, patched.total_reward,
                       len(baseline), len(patched), name)


# ---------------------------------------------------------------- reduction


@dataclass
class ReduceResult:
    explained_variance_ratio: np.ndarray
    target_dim: int
    points: np.ndarray
    n_unique: int
    initial_loss: float
    final_loss: float


def embed_latents(latents, cfg: PipelineConfig, output_dim: int, n_nb: int | None = None):
    """PaCMAP on the latent rows; with ``unique_rows`` identical rows share one embedded point."""
    latents = np.asarray(latents, dtype=float)
    pm = cfg.pacmap.build(cfg.seed, output_dim, n_nb)
    if cfg.pacmap.unique_rows:
        unique, inverse = np.unique(latents, axis=0, return_inverse=True)
        emb = pacmap_embed(unique, pm)
        return emb.points[inverse.reshape(-1)], emb, len(unique)
    emb = pacmap_embed(latents, pm)
    return emb.points, emb, len(latents)


def reduce_latents(latents, cfg: PipelineConfig) -> ReduceResult:
    ratios = pca(latents).explained_variance_ratio
    d = cfg.pacmap.output_dim or choose_target_dim(ratios, cfg.pca_threshold)
    points, emb, n_unique = embed_latents(latents, cfg, d)
    return ReduceResult(ratios, d, points, n_unique, emb.initial_loss, emb.final_loss)


def write_embedding_csv(points, provenance, path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["row", "episode_id", "step_index"] + [f"e_{k}" for k in range(points.shape[1])])
    for r, ((ep, k), row) in enumerate(zip(provenance, points)):
        writer.writerow([r, ep, k] + [repr(float(x)) for x in row])
    Path(path).write_text(buf.getvalue())


def read_embedding_csv(path) -> tuple[np.ndarray, list[tuple[int, int]]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:3] != ["row", "episode_id", "step_index"]:
            raise ValueError(f"{path}: unexpected embedding header")
        rows, prov = [], []
        for r, line in enumerate(reader):
            if int(line[0]) != r:
                raise ValueError(f"{path}: row index {line[0]} out of order")
            prov.append((int(line[1]), int(line[2])))
            rows.append([float(x) for x in line[3:]])
    return np.array(rows).reshape(len(rows), len(header) - 3), prov


# ---------------------------------------------------------------- clustering


@dataclass
class ClusterResult:
    space: str
    segments: list[LineSegment]
    initial: ClusterAssignment
    final: ClusterAssignment
    params: TraclusParams
    noise_n: int
    epsilon_star: float
    profile: EntropyProfile
    noise_report: NoiseReport
    skipped_episodes: list[int] = field(default_factory=list)

    @property
    def n_clusters(self) -> int:
        return self.final.n_clusters

    def summary(self) -> dict:
        return {
            "n_segments": len(self.segments),
            "n_clusters": self.n_clusters,
            "core": self.initial.count(Kind.CORE),
            "border": self.initial.count(Kind.BORDER),
            "noise": self.initial.count(Kind.NOISE),
            "unassigned_after_noise_step": int((self.final.cluster_ids == NO_CLUSTER).sum()),
            "noise_sweeps": self.noise_report.sweeps,
            "noise_converged": self.noise_report.converged,
            "skipped_episodes": self.skipped_episodes,
        }


def segment_trajectories(points, provenance, weights) -> tuple[list[LineSegment], list[int]]:
    """Partition each episode's rows; single-row episodes yield no segment and are reported."""
    points = np.asarray(points, dtype=float)
    by_episode: dict[int, list[int]] = {}
    for r, (ep, _) in enumerate(provenance):
        by_episode.setdefault(ep, []).append(r)
    segments, skipped = [], []
    for ep, rows in by_episode.items():
        if len(rows) < 2:
            skipped.append(ep)
            continue
        steps = [provenance[r][1] for r in rows]
        segments.extend(partition(points[rows], ep, steps, weights))
    return segments, skipped


def cluster_points(points, provenance, section: TraclusSection, seed: int, space: str = "") -> ClusterResult:
    weights = tuple(float(w) for w in section.distance_weights)
    segments, skipped = segment_trajectories(points, provenance, weights)
    if not segments:
        raise ValueError("no trajectory has two or more points; nothing to cluster")
    D = pairwise_distances(segments, weights)
    grid = epsilon_grid(D, section.n_candidates, section.sample_size, seed)
    eps_star, profile = tune_epsilon(segments, grid, weights, D)
    eps = eps_star if section.epsilon is None else float(section.epsilon)
    min_lns = section.min_lns or min_lns_heuristic(segments, eps, weights, D)
    params = TraclusParams(eps, min_lns, weights)
    initial = group_segments(segments, params, D)
    noise_n = section.noise_n or min_lns
    final, report = assign_noise(segments, initial, noise_n, weights, D, section.noise_max_sweeps)
    log.info("%s: %d segments, eps=%.4g, min_lns=%d, %d clusters", space, len(segments), eps, min_lns,
             final.n_clusters)
    return ClusterResult(space, segments, initial, final, params, noise_n, eps_star, profile, report, skipped)


def clusters_to_json(result: ClusterResult) -> dict:
    segs = []
    for seg, kind, initial_id, cid in zip(result.segments, result.initial.kinds,
                                          result.initial.cluster_ids, result.final.cluster_ids):
        segs.append({
            "episode_id": seg.episode_id, "start_step": seg.start_step, "end_step": seg.end_step,
            "kind": kind.value,
            "initial_cluster_id": None if initial_id == NO_CLUSTER else int(initial_id),
            "cluster_id": None if cid == NO_CLUSTER else int(cid),
            "start": [float(x) for x in seg.start], "end": [float(x) for x in seg.end],
        })
    return {
        "space": result.space,
        "params": {"epsilon": result.params.epsilon, "min_lns": result.params.min_lns,
                   "distance_weights": list(result.params.distance_weights), "noise_n": result.noise_n,
                   "epsilon_star": result.epsilon_star},
        "summary": result.summary(),
        "segments": segs,
        "entropy_profile": result.profile.as_list(),
    }


def clusters_from_json(data: dict) -> tuple[list[LineSegment], ClusterAssignment]:
    """Segments and the final (post noise-assignment) labels from a cluster export."""
    segments, kinds, ids = [], [], []
    for s in data["segments"]:
        segments.append(LineSegment(np.array(s["start"]), np.array(s["end"]),
                                    s["episode_id"], s["start_step"], s["end_step"]))
        kinds.append(Kind(s["kind"]))
        ids.append(NO_CLUSTER if s["cluster_id"] is None else s["cluster_id"])
    return segments, ClusterAssignment(tuple(kinds), np.array(ids, dtype=np.int64))


# ---------------------------------------------------------------- plotting


def _clustered_view(dataset: TrajectoryDataset) -> TrajectoryDataset:
    return TrajectoryDataset(dataset.clustered_episodes(), dataset.latent_matrix, dataset.row_provenance,
                             dataset.include_truncated)


def plot_documents(assignment, segments, dataset, cfg: PipelineConfig, space: str) -> dict[str, str]:
    backmapped = backmap_segments(assignment, segments, dataset)
    kept = dedup_episodes(_clustered_view(dataset), cfg.dedup_tau)
    colors = distinct_colors(max(1, assignment.n_clusters), seed=cfg.seed)
    axes = AxesSpec(goal_position=cfg.env.goal_position, title=f"{space} latent space clusters")
    docs = render_plot(backmapped, kept, colors, axes, cfg.plot_split_threshold)
    if len(docs) == 1:
        return {f"clusters_{space}.svg": docs[0]}
    return {f"clusters_{space}_even.svg": docs[0], f"clusters_{space}_odd.svg": docs[1]}


def sweep_documents(latents, provenance, cfg: PipelineConfig) -> dict[str, str]:
    """One 2-D embedding per candidate neighbor count, for visual selection."""
    episode_ids = [ep for ep, _ in provenance]
    n_episodes = len(dict.fromkeys(episode_ids))
    colors = distinct_colors(max(1, n_episodes), seed=cfg.seed)
    docs = {}
    for n_nb in cfg.sweep_nnb:
        points, _, _ = embed_latents(latents, cfg, 2, n_nb)
        docs[f"{SWEEP_DIR}/nnb_{n_nb:03d}.svg"] = render_embedding(points, episode_ids, colors,
                                                                   f"2-D embedding, n_NB = {n_nb}")
    return docs


# ---------------------------------------------------------------- stages used by the CLI


def obtain_policy(cfg: PipelineConfig) -> tuple[PolicyNetwork, float | None]:
    if cfg.policy_path:
        return load_weights(cfg.policy_path), None
    result = train_bc(cfg.bc.build(cfg.seed))
    return result.net, result.final_loss


def make_grid(cfg: PipelineConfig) -> list[EnvState]:
    g = cfg.grid
    return initial_state_grid(g.n_pos, g.n_vel, tuple(g.pos_range), tuple(g.vel_range))


def rollout_dataset(net, cfg: PipelineConfig) -> TrajectoryDataset:
    return build_dataset(net, cfg.env.build(), make_grid(cfg), cfg.include_truncated)


def load_dataset(path, cfg: PipelineConfig) -> TrajectoryDataset:
    return read_dataset_csv(path, cfg.include_truncated)


def patch_reports(net, cfg: PipelineConfig) -> list[PatchReport]:
    env = cfg.env.build()
    return [patch_eval(net, env, EnvState(*map(float, sc.s0)), sc.overrides, sc.name)
            for sc in cfg.patch_scenarios]


def space_points(space: str, dataset: TrajectoryDataset, reduced: ReduceResult | None):
    return dataset.latent_matrix if space == "raw" else reduced.points


def resolved_config(cfg: PipelineConfig, target_dim: int | None, results: dict[str, ClusterResult]) -> dict:
    data = cfg.to_dict(include_output_dir=False)
    data["bc"]["seed"] = cfg.bc.seed if cfg.bc.seed is not None else cfg.seed
    data["pacmap"]["seed"] = cfg.pacmap.seed if cfg.pacmap.seed is not None else cfg.seed
    if target_dim is not None:
        data["pacmap"]["output_dim"] = target_dim
    for space, res in results.items():
        key = "traclus" if space == cfg.cluster_space else "traclus_compare"
        data[key].update(epsilon=res.params.epsilon, min_lns=res.params.min_lns, noise_n=res.noise_n)
    return data


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run_pipeline(cfg: PipelineConfig, out_dir=None) -> dict:
    """Every stage in order; returns the manifest. Outputs appear only if all stages succeed."""
    out_dir = Path(out_dir or cfg.output_dir)
    with staged_outputs(out_dir) as tmp:
        with stage("train-bc"):
            net, bc_loss = obtain_policy(cfg)
            save_weights(net, tmp / POLICY_FILE)
        with stage("rollout"):
            dataset = rollout_dataset(net, cfg)
            write_dataset_csv(dataset, tmp / DATASET_FILE)
        reduced = None
        if "reduced" in cfg.spaces:
            with stage("reduce"):
                reduced = reduce_latents(dataset.latent_matrix, cfg)
                _dump_json({"explained_variance_ratio": reduced.explained_variance_ratio.tolist(),
                            "threshold": cfg.pca_threshold, "target_dim": reduced.target_dim},
                           tmp / PCA_FILE)
                write_embedding_csv(reduced.points, dataset.row_provenance, tmp / EMBEDDING_FILE)
        results: dict[str, ClusterResult] = {}
        for space in cfg.spaces:
            with stage("cluster"):
                res = cluster_points(space_points(space, dataset, reduced), dataset.row_provenance,
                                     cfg.space_section(space), cfg.seed, space)
                results[space] = res
                _dump_json(clusters_to_json(res), tmp / clusters_file(space))
        plot_files = []
        with stage("plot"):
            for space, res in results.items():
                for name, doc in plot_documents(res.final, res.segments, dataset, cfg, space).items():
                    (tmp / name).write_text(doc)
                    plot_files.append(name)
        with stage("patch-eval"):
            reports = patch_reports(net, cfg)
            _dump_json([r.to_dict() for r in reports], tmp / PATCH_FILE)

        episodes = dataset.episodes
        manifest = {
            "config": resolved_config(cfg, reduced.target_dim if reduced else None, results),
            "resolved": {
                "target_dim": reduced.target_dim if reduced else None,
                **{space: {"epsilon": r.params.epsilon, "min_lns": r.params.min_lns, "noise_n": r.noise_n}
                   for space, r in results.items()},
            },
            "counts": {
                "episodes": len(episodes),
                "terminated": sum(ep.terminated for ep in episodes),
                "truncated": sum(ep.truncated for ep in episodes),
                "rows": int(dataset.latent_matrix.shape[0]),
                "latent_dim": int(dataset.latent_matrix.shape[1]),
                "unique_rows_embedded": reduced.n_unique if reduced else None,
                "kept_episodes_for_plots": len(dedup_episodes(_clustered_view(dataset), cfg.dedup_tau)),
                **{space: r.summary() for space, r in results.items()},
            },
            "bc_final_loss": bc_loss,
            "pacmap_loss": ({"initial": reduced.initial_loss, "final": reduced.final_loss}
                            if reduced else None),
            "patch_reports": [r.to_dict() for r in reports],
            "files": {p.relative_to(tmp).as_posix(): _sha256(p)
                      for p in sorted(tmp.rglob("*")) if p.is_file()},
        }
        _dump_json(manifest, tmp / MANIFEST_FILE)
    return manifest
