"""Pipeline configuration: a JSON document where every field is optional."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .dimred.pacmap import DEFAULT_SCHEDULE, PacmapConfig, WeightPhase
from .mountain_car import DEFAULT_POS_RANGE, DEFAULT_VEL_RANGE, EnvConfig, RewardVariant
from .policy import BCConfig

CLUSTER_SPACES = ("reduced", "raw")


class ConfigError(ValueError):
    pass


@dataclass
class EnvSection:
    goal_position: float = 0.45
    force_scale: float = 0.0015
    gravity_scale: float = 0.0025
    max_steps: int = 999
    reward_variant: str = "modified"

    def build(self) -> EnvConfig:
        return EnvConfig(self.goal_position, self.force_scale, self.gravity_scale,
                         self.max_steps, RewardVariant(self.reward_variant))


@dataclass
class BCSection:
    hidden_sizes: list = field(default_factory=lambda: [64, 64])
    learning_rate: float = 1e-3
    epochs: int = 60
    batch_size: int = 128
    seed: int | None = None
    sample_grid: list = field(default_factory=lambda: [61, 61])
    activation: str = "tanh"

    def build(self, seed: int) -> BCConfig:
        return BCConfig(tuple(self.hidden_sizes), self.learning_rate, self.epochs, self.batch_size,
                        seed if self.seed is None else self.seed, tuple(self.sample_grid), self.activation)


@dataclass
class GridSection:
    n_pos: int = 10
    n_vel: int = 10
    pos_range: list = field(default_factory=lambda: list(DEFAULT_POS_RANGE))
    vel_range: list = field(default_factory=lambda: list(DEFAULT_VEL_RANGE))


@dataclass
class PacmapSection:
    n_nb: int = 10
    mn_ratio: float = 0.5
    fp_ratio: float = 2.0
    output_dim: int | None = None  # None: choose from the PCA threshold
    iterations: int = 450
    learning_rate: float = 1.0
    seed: int | None = None
    weight_schedule: list = field(default_factory=lambda: [dataclasses.asdict(p) for p in DEFAULT_SCHEDULE])
    candidate_pool: int = 150
    exact_max_n: int = 2000
    unique_rows: bool = True

    def build(self, seed: int, output_dim: int, n_nb: int | None = None) -> PacmapConfig:
        return PacmapConfig(
            n_nb=self.n_nb if n_nb is None else n_nb, mn_ratio=self.mn_ratio, fp_ratio=self.fp_ratio,
            output_dim=output_dim, iterations=self.iterations, learning_rate=self.learning_rate,
            seed=seed if self.seed is None else self.seed,
            weight_schedule=tuple(WeightPhase(**p) for p in self.weight_schedule),
            candidate_pool=self.candidate_pool, exact_max_n=self.exact_max_n)


@dataclass
class TraclusSection:
    epsilon: float | None = None  # None: entropy-minimizing radius
    min_lns: int | None = None  # None: rounded-up mean neighborhood size
    noise_n: int | None = None  # None: min_lns
    distance_weights: list = field(default_factory=lambda: [1.0, 1.0, 1.0])
    n_candidates: int = 64
    sample_size: int = 10_000
    noise_max_sweeps: int = 50


@dataclass
class PatchScenario:
    name: str
    s0: list
    overrides: list


def _default_scenarios():
    return [
        PatchScenario("first_action_left", [-0.35, 0.028], [[0, -1.0]]),
        PatchScenario("first_three_right", [-0.7, 0.0], [[0, 1.0], [1, 1.0], [2, 1.0]]),
    ]


@dataclass
class PipelineConfig:
    seed: int = 0
    env: EnvSection = field(default_factory=EnvSection)
    bc: BCSection = field(default_factory=BCSection)
    policy_path: str | None = None
    grid: GridSection = field(default_factory=GridSection)
    include_truncated: bool = False
    pca_threshold: float = 0.999
    pacmap: PacmapSection = field(default_factory=PacmapSection)
    cluster_space: str = "reduced"
    compare_spaces: bool = True
    traclus: TraclusSection = field(default_factory=TraclusSection)
    traclus_compare: TraclusSection = field(default_factory=TraclusSection)
    dedup_tau: float = 0.05
    plot_split_threshold: int = 21
    sweep_nnb: list = field(default_factory=lambda: [5, 10, 15, 20, 30])
    patch_scenarios: list = field(default_factory=_default_scenarios)
    output_dir: str = "out"

    def validate(self) -> "PipelineConfig":
        if self.cluster_space not in CLUSTER_SPACES:
            raise ConfigError(f"cluster_space: expected one of {CLUSTER_SPACES}, got {self.cluster_space!r}")
        if not 0 < self.pca_threshold <= 1:
            raise ConfigError("pca_threshold: must lie in (0, 1]")
        if self.dedup_tau < 0:
            raise ConfigError("dedup_tau: must be >= 0")
        if self.grid.n_pos < 1 or self.grid.n_vel < 1:
            raise ConfigError("grid: n_pos and n_vel must be >= 1")
        for name in ("traclus", "traclus_compare"):
            section = getattr(self, name)
            if section.epsilon is not None and section.epsilon <= 0:
                raise ConfigError(f"{name}.epsilon: must be > 0")
            for key in ("min_lns", "noise_n"):
                value = getattr(section, key)
                if value is not None and value < 1:
                    raise ConfigError(f"{name}.{key}: must be >= 1")
            if len(section.distance_weights) != 3:
                raise ConfigError(f"{name}.distance_weights: expected three weights")
        try:
            self.env.build()
            self.bc.build(self.seed)
            self.pacmap.build(self.seed, self.pacmap.output_dim or 1)
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from None
        return self

    def space_section(self, space: str) -> TraclusSection:
        return self.traclus if space == self.cluster_space else self.traclus_compare

    @property
    def spaces(self) -> list[str]:
        other = [s for s in CLUSTER_SPACES if s != self.cluster_space]
        return [self.cluster_space] + (other if self.compare_spaces else [])

    def to_dict(self, include_output_dir: bool = True) -> dict:
        data = dataclasses.asdict(self)
        if not include_output_dir:
            data.pop("output_dir")
        return data


def _build(cls, data: Any, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where or 'config'}: expected an object")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        raise ConfigError(f"{where or 'config'}: unknown field(s) {', '.join(unknown)}")
    kwargs = {}
    for name, value in data.items():
        sub = _NESTED.get((cls, name))
        path = f"{where}.{name}" if where else name
        if sub is list:
            if not isinstance(value, list):
                raise ConfigError(f"{path}: expected a list")
            kwargs[name] = [_build(PatchScenario, v, f"{path}[{k}]") for k, v in enumerate(value)]
        elif sub is not None:
            kwargs[name] = _build(sub, value, path)
        else:
            kwargs[name] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{where or 'config'}: {exc}") from None


_NESTED = {
    (PipelineConfig, "env"): EnvSection,
    (PipelineConfig, "bc"): BCSection,
    (PipelineConfig, "grid"): GridSection,
    (PipelineConfig, "pacmap"): PacmapSection,
    (PipelineConfig, "traclus"): TraclusSection,
    (PipelineConfig, "traclus_compare"): TraclusSection,
    (PipelineConfig, "patch_scenarios"): list,
}


def config_from_dict(data: dict) -> PipelineConfig:
    return _build(PipelineConfig, data, "").validate()


def load_config(path) -> PipelineConfig:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from None
    return config_from_dict(data)
