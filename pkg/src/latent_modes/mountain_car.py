"""Deterministic continuous Mountain Car.

Dynamics follow MountainCarContinuous-v0; only the reward differs between the
``original`` and ``modified`` variants.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

MIN_POSITION = -1.2
MAX_POSITION = 0.6
MAX_SPEED = 0.07

DEFAULT_POS_RANGE = (-1.25, 0.5)
DEFAULT_VEL_RANGE = (-0.07, 0.07)


class DomainError(ValueError):
    pass


class RewardVariant(str, Enum):
    ORIGINAL = "original"
    MODIFIED = "modified"


@dataclass(frozen=True)
class EnvState:
    position: float
    velocity: float

    def as_array(self) -> np.ndarray:
        return np.array([self.position, self.velocity], dtype=float)


@dataclass(frozen=True)
class EnvConfig:
    goal_position: float = 0.45
    force_scale: float = 0.0015
    gravity_scale: float = 0.0025
    max_steps: int = 999
    reward_variant: RewardVariant = RewardVariant.MODIFIED

    def __post_init__(self):
        if not MIN_POSITION <= self.goal_position <= MAX_POSITION:
            raise DomainError(f"goal_position {self.goal_position} outside position bounds")
        if self.max_steps < 1:
            raise DomainError("max_steps must be >= 1")
        object.__setattr__(self, "reward_variant", RewardVariant(self.reward_variant))


@dataclass(frozen=True)
class StepResult:
    next_state: EnvState
    reward: float
    terminated: bool
    truncated: bool


def reward(position_next: float, action: float, variant: RewardVariant | str,
           goal_position: float = 0.45) -> float:
    """Transition reward evaluated on the post-step position."""
    if not (math.isfinite(position_next) and math.isfinite(action)):
        raise DomainError("reward inputs must be finite")
    if position_next >= goal_position:
        return 100.0
    if RewardVariant(variant) is RewardVariant.ORIGINAL:
        return -(action * action)
    return -1.0


def step(state: EnvState, action: float, config: EnvConfig = EnvConfig(),
         step_index: int = 0) -> StepResult:
    position, velocity = state.position, state.velocity
    if not (math.isfinite(position) and math.isfinite(velocity) and math.isfinite(action)):
        raise DomainError(f"non-finite state or action: {state}, {action}")
    force = min(max(float(action), -1.0), 1.0)

    velocity = velocity + force * config.force_scale - config.gravity_scale * math.cos(3 * position)
    velocity = min(max(velocity, -MAX_SPEED), MAX_SPEED)
    position = min(max(position + velocity, MIN_POSITION), MAX_POSITION)
    if position == MIN_POSITION and velocity < 0:
        velocity = 0.0

    terminated = position >= config.goal_position
    truncated = (not terminated) and step_index + 1 >= config.max_steps
    r = reward(position, force, config.reward_variant, config.goal_position)
    return StepResult(EnvState(position, velocity), r, terminated, truncated)


def initial_state_grid(n_pos: int = 10, n_vel: int = 10,
                       pos_range: tuple[float, float] = DEFAULT_POS_RANGE,
                       vel_range: tuple[float, float] = DEFAULT_VEL_RANGE) -> list[EnvState]:
    """Cartesian grid of start states, position-major, endpoints included.

    Start positions may lie below the dynamics floor; clamping applies from
    the first step on.
    """
    if n_pos < 1 or n_vel < 1:
        raise DomainError("grid sizes must be >= 1")
    for lo, hi in (pos_range, vel_range):
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
            raise DomainError(f"invalid range ({lo}, {hi})")
    positions = np.linspace(pos_range[0], pos_range[1], n_pos)
    velocities = np.linspace(vel_range[0], vel_range[1], n_vel)
    return [EnvState(float(p), float(v)) for p in positions for v in velocities]
