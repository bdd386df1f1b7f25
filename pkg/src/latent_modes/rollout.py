"""Policy rollouts into a latent-trajectory dataset, plus CSV export and episode de-duplication."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .mountain_car import EnvConfig, EnvState, step
from .policy import PolicyNetwork, forward


@dataclass(frozen=True, eq=False)
class StepRecord:
    step_index: int
    state: EnvState
    latent: np.ndarray
    action: float
    reward: float


@dataclass(eq=False)
class Episode:
    episode_id: int
    steps: list[StepRecord]
    terminated: bool
    truncated: bool

    @property
    def total_reward(self) -> float:
        return float(sum(s.reward for s in self.steps))

    def __len__(self):
        return len(self.steps)

    def states(self) -> np.ndarray:
        return np.array([(s.state.position, s.state.velocity) for s in self.steps])


@dataclass(eq=False)
class TrajectoryDataset:
    episodes: list[Episode]
    latent_matrix: np.ndarray
    row_provenance: list[tuple[int, int]]
    include_truncated: bool = False
    _by_id: dict = field(default=None, init=False, repr=False)

    def episode(self, episode_id: int) -> Episode:
        if self._by_id is None:
            self._by_id = {ep.episode_id: ep for ep in self.episodes}
        return self._by_id[episode_id]

    def clustered_episodes(self) -> list[Episode]:
        return [ep for ep in self.episodes if self.include_truncated or not ep.truncated]


def _normalize_overrides(overrides) -> dict[int, float]:
    if overrides is None:
        return {}
    pairs = list(overrides.items()) if isinstance(overrides, dict) else [tuple(o) for o in overrides]
    out = {}
    for index, action in pairs:
        index = int(index)
        if index < 0 or index in out:
            raise ValueError(f"override step indices must be unique and >= 0, got {index}")
        out[index] = float(action)
    return out


def run_episode(net: PolicyNetwork, config: EnvConfig, s0: EnvState, overrides=(),
                episode_id: int = 0) -> Episode:
    """Roll the deterministic policy from ``s0``; ``overrides`` force actions at given steps.

    The latent is always the network's, even on overridden steps.
    """
    forced = _normalize_overrides(overrides)
    steps = []
    state = s0
    k = 0
    while True:
        action, latent = forward(net, state)
        action = forced.get(k, action)
        result = step(state, action, config, k)
        steps.append(StepRecord(k, state, latent, action, result.reward))
        state = result.next_state
        if result.terminated or result.truncated:
            return Episode(episode_id, steps, result.terminated, result.truncated)
        k += 1


def assemble_dataset(episodes: list[Episode], include_truncated: bool = False) -> TrajectoryDataset:
    rows, provenance = [], []
    for ep in episodes:
        if ep.truncated and not include_truncated:
            continue
        for s in ep.steps:
            rows.append(s.latent)
            provenance.append((ep.episode_id, s.step_index))
    width = len(episodes[0].steps[0].latent) if episodes else 0
    matrix = np.array(rows) if rows else np.empty((0, width))
    return TrajectoryDataset(episodes, matrix, provenance, include_truncated)


def build_dataset(net: PolicyNetwork, config: EnvConfig, grid: list[EnvState],
                  include_truncated: bool = False) -> TrajectoryDataset:
    """One episode per grid state, ``episode_id`` = grid index.

    Truncated episodes stay in ``episodes`` but are left out of the latent
    matrix unless ``include_truncated``.
    """
    if not grid:
        raise ValueError("grid must be non-empty")
    episodes = [run_episode(net, config, s0, episode_id=i) for i, s0 in enumerate(grid)]
    return assemble_dataset(episodes, include_truncated)


def _hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    d = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2))
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def dedup_episodes(dataset: TrajectoryDataset, tau: float = 0.05) -> list[int]:
    """Greedy plot filter: keep an episode iff it is farther than ``tau`` from every kept one.

    Distance is the discrete Hausdorff distance between state-space
    trajectories after per-dimension min-max normalization.
    """
    if tau < 0:
        raise ValueError("tau must be >= 0")
    episodes = sorted(dataset.episodes, key=lambda ep: ep.episode_id)
    if not episodes:
        return []
    trajectories = [ep.states() for ep in episodes]
    stacked = np.vstack(trajectories)
    lo, span = stacked.min(axis=0), np.ptp(stacked, axis=0)
    span[span == 0] = 1.0
    trajectories = [(t - lo) / span for t in trajectories]

    kept, kept_traj = [], []
    for ep, traj in zip(episodes, trajectories):
        if all(_hausdorff(traj, other) > tau for other in kept_traj):
            kept.append(ep.episode_id)
            kept_traj.append(traj)
    return kept


def dataset_header(latent_dim: int) -> list[str]:
    return (["episode_id", "step_index", "position", "velocity", "action", "reward"]
            + [f"latent_{k}" for k in range(latent_dim)])


def write_dataset_csv(dataset: TrajectoryDataset, path) -> None:
    """All episodes, including truncated ones; floats use round-trip repr."""
    latent_dim = dataset.latent_matrix.shape[1]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(dataset_header(latent_dim))
    for ep in dataset.episodes:
        for s in ep.steps:
            writer.writerow([ep.episode_id, s.step_index, repr(s.state.position),
                             repr(s.state.velocity), repr(float(s.action)), repr(float(s.reward))]
                            + [repr(float(x)) for x in s.latent])
    Path(path).write_text(buf.getvalue())


def read_dataset_csv(path, include_truncated: bool = False, goal_reward: float = 100.0) -> TrajectoryDataset:
    """Inverse of ``write_dataset_csv``.

    An episode counts as terminated when its last step earned the goal
    reward, otherwise as truncated.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        latent_dim = len(header) - 6
        if header != dataset_header(latent_dim):
            raise ValueError(f"{path}: unexpected dataset header")
        grouped: dict[int, list[StepRecord]] = {}
        for line, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError(f"{path}:{line}: expected {len(header)} fields, got {len(row)}")
            ep_id, k = int(row[0]), int(row[1])
            steps = grouped.setdefault(ep_id, [])
            if k != len(steps):
                raise ValueError(f"{path}:{line}: step_index {k} out of sequence for episode {ep_id}")
            steps.append(StepRecord(k, EnvState(float(row[2]), float(row[3])),
                                    np.array([float(x) for x in row[6:]]),
                                    float(row[4]), float(row[5])))
    episodes = []
    for ep_id, steps in grouped.items():
        done = steps[-1].reward == goal_reward
        episodes.append(Episode(ep_id, steps, done, not done))
    return assemble_dataset(episodes, include_truncated)
