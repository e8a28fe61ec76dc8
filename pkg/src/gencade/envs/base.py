"""Shared types for the built-in arcade environments.

All three games run on a 160x210 screen with y growing downward, expose
object-centric observations (axis-aligned boxes with integer position and
per-step velocity), and fold the classic 4-frame action repeat into their
per-step dynamics, so one env step equals one agent decision.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Iterable

SCREEN_W = 160
SCREEN_H = 210


class EnvError(Exception):
    """Base class for environment usage errors."""


class ConfigError(EnvError):
    """Bad EnvConfig (unknown game, non-positive max_steps, bad sticky)."""


class InvalidActionError(EnvError):
    """Action outside the game's legal action set."""


class StateError(EnvError):
    """Illegal call sequence, e.g. step() before reset() or after the end."""


@dataclass(frozen=True)
class ObjectState:
    """One visible object: top-left position, size, and last-step velocity."""

    x: int
    y: int
    w: int
    h: int
    dx: int = 0
    dy: int = 0


@dataclass(frozen=True)
class Observation:
    objects: dict[str, ObjectState]
    lives: int
    score: int


@dataclass(frozen=True)
class StepResult:
    obs: Observation
    reward: int
    terminated: bool
    truncated: bool


@dataclass(frozen=True)
class EnvConfig:
    game: str
    seed: int = 0
    max_steps: int = 4000
    sticky_prob: float = 0.0


class ArcadeEnv:
    """Deterministic, seeded base env. Subclasses implement the dynamics."""

    ACTIONS: frozenset[int] = frozenset()

    def __init__(self, config: EnvConfig):
        self.config = config
        self.rng = random.Random(config.seed)
        self.steps = 0
        self.score = 0
        self.lives = 0
        self.terminated = False
        self.truncated = False
        self._started = False
        self._prev_action = 0

    # -- public API ------------------------------------------------------

    def reset(self) -> Observation:
        self.rng = random.Random(self.config.seed)
        self.steps = 0
        self.score = 0
        self.terminated = False
        self.truncated = False
        self._started = True
        self._prev_action = 0
        self._reset_state()
        return self._observe()

    def step(self, action: int) -> StepResult:
        if not self._started:
            raise StateError("step() called before reset()")
        if self.terminated or self.truncated:
            raise StateError("step() called after the episode ended")
        if not isinstance(action, int) or isinstance(action, bool) or action not in self.ACTIONS:
            legal = ", ".join(str(a) for a in sorted(self.ACTIONS))
            raise InvalidActionError(f"action {action!r} is not one of [{legal}]")
        if self.config.sticky_prob > 0.0 and self.rng.random() < self.config.sticky_prob:
            action = self._prev_action
        self._prev_action = action

        reward = self._advance(action)
        self.steps += 1
        if not self.terminated and self.steps >= self.config.max_steps:
            self.truncated = True
        return StepResult(
            obs=self._observe(),
            reward=reward,
            terminated=self.terminated,
            truncated=self.truncated,
        )

    # -- hooks for subclasses ---------------------------------------------

    def _reset_state(self) -> None:
        raise NotImplementedError

    def _advance(self, action: int) -> int:
        """Apply one action, mutate state, and return the step reward."""
        raise NotImplementedError

    def _objects(self) -> dict[str, ObjectState]:
        raise NotImplementedError

    def _observe(self) -> Observation:
        return Observation(objects=self._objects(), lives=self.lives, score=self.score)


def reflect_interval(pos: int, velocity: int, low: int, high: int) -> tuple[int, int]:
    """Advance pos by velocity inside [low, high], mirror-reflecting at the
    ends. Returns (new_pos, new_velocity); each fold flips the velocity sign
    and preserves its magnitude. Equivalent to stepping the four hidden
    sub-frames of the folded action repeat one pixel at a time."""
    pos = pos + velocity
    for _ in range(8):  # |velocity| < span always needs at most a few folds
        if pos < low:
            pos = 2 * low - pos
            velocity = -velocity
        elif pos > high:
            pos = 2 * high - pos
            velocity = -velocity
        else:
            return pos, velocity
    raise AssertionError("reflection failed to converge")


def clamp(value: int, low: int, high: int) -> int:
    return max(low, min(high, value))


def boxes_overlap(
    ax: int, ay: int, aw: int, ah: int, bx: int, by: int, bw: int, bh: int
) -> bool:
    return ax < bx + bw and bx < ax + aw and ay < by + bh and by < ay + ah
