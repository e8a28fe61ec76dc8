"""Deterministic object-centric arcade environments."""

from __future__ import annotations

import json
from typing import Iterable

from .base import (
    SCREEN_H,
    SCREEN_W,
    ArcadeEnv,
    ConfigError,
    EnvConfig,
    EnvError,
    InvalidActionError,
    Observation,
    ObjectState,
    StateError,
    StepResult,
)
from .breakout import BreakoutEnv
from .pong import PongEnv
from .space_invaders import SpaceInvadersEnv

GAMES = ("pong", "breakout", "space_invaders")

_ENV_CLASSES = {
    "pong": PongEnv,
    "breakout": BreakoutEnv,
    "space_invaders": SpaceInvadersEnv,
}

# Rollouts this long give the optimizer a useful trace without flooding it.
DEFAULT_ROLLOUT_STEPS = {
    "pong": 400,
    "breakout": 300,
    "space_invaders": 15,
}


def validate_config(config: EnvConfig) -> None:
    if config.game not in _ENV_CLASSES:
        known = ", ".join(GAMES)
        raise ConfigError(f"unknown game {config.game!r} (known games: {known})")
    if config.max_steps <= 0:
        raise ConfigError(f"max_steps must be positive, got {config.max_steps}")
    if not (0.0 <= config.sticky_prob < 1.0):
        raise ConfigError(f"sticky_prob must be in [0, 1), got {config.sticky_prob}")


def make_env(config: EnvConfig) -> ArcadeEnv:
    validate_config(config)
    return _ENV_CLASSES[config.game](config)


def obs_to_dict(obs: Observation) -> dict:
    return {
        "objects": {
            label: {"x": o.x, "y": o.y, "w": o.w, "h": o.h, "dx": o.dx, "dy": o.dy}
            for label, o in sorted(obs.objects.items())
        },
        "lives": obs.lives,
        "score": obs.score,
    }


def trajectory_records(config: EnvConfig, actions: Iterable[int]) -> list[dict]:
    """Run a fixed action sequence and collect one record per step."""
    env = make_env(config)
    env.reset()
    records = []
    for step, action in enumerate(actions):
        result = env.step(action)
        records.append(
            {
                "step": step,
                "obs": obs_to_dict(result.obs),
                "action": action,
                "reward": result.reward,
                "terminated": result.terminated,
            }
        )
        if result.terminated or result.truncated:
            break
    return records


def write_trajectory(path, records: list[dict]) -> None:
    with open(path, "w") as fh:
        for record in records:
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def read_trajectory(path) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


__all__ = [
    "SCREEN_H",
    "SCREEN_W",
    "ArcadeEnv",
    "ConfigError",
    "EnvConfig",
    "EnvError",
    "InvalidActionError",
    "Observation",
    "ObjectState",
    "StateError",
    "StepResult",
    "PongEnv",
    "BreakoutEnv",
    "SpaceInvadersEnv",
    "GAMES",
    "DEFAULT_ROLLOUT_STEPS",
    "validate_config",
    "make_env",
    "obs_to_dict",
    "trajectory_records",
    "write_trajectory",
    "read_trajectory",
]
