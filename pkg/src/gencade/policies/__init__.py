"""Bundled policy fixtures, per-game interface contracts, and snapshots.

Each game ships a hand-seeded starting policy and a strong reference
policy in the policy language, plus a frozen mid-episode observation
snapshot used to smoke-test candidate updates before accepting them.
"""

from __future__ import annotations

import json
import os
from importlib import resources

from ..dsl import FunctionSpec, PolicyProgram, parse
from ..envs import Observation, ObjectState

# Function contracts per game: name, arity, whether the optimizer may
# rewrite it. The entry composes the trainable functions and is fixed.
GAME_INTERFACES: dict[str, list[FunctionSpec]] = {
    "pong": [
        FunctionSpec("policy", 1, False),
        FunctionSpec("predict_ball_trajectory", 1, True),
        FunctionSpec("select_action", 2, True),
    ],
    "breakout": [
        FunctionSpec("policy", 1, False),
        FunctionSpec("generate_paddle_target", 2, True),
        FunctionSpec("predict_ball_trajectory", 1, True),
        FunctionSpec("select_paddle_action", 2, True),
    ],
    "space_invaders": [
        FunctionSpec("policy", 1, False),
        FunctionSpec("combine_actions", 2, True),
        FunctionSpec("decide_movement", 1, True),
        FunctionSpec("decide_shoot", 1, True),
    ],
}


def _read_text(name: str) -> str:
    return resources.files(__package__).joinpath(name).read_text()


def load_policy_source(game: str, which: str = "initial") -> str:
    """Source text of a bundled policy; ``which`` is "initial" or "best"."""
    if which not in ("initial", "best"):
        raise ValueError(f"unknown policy variant {which!r}")
    return _read_text(f"{game}_{which}.dsl")


def load_policy(game: str, which: str = "initial") -> PolicyProgram:
    return parse(load_policy_source(game, which))


def load_snapshot(game: str) -> Observation:
    """A frozen mid-episode observation for smoke-testing policy updates."""
    raw = json.loads(_read_text(f"snapshots/{game}.json"))
    objects = {
        label: ObjectState(**fields) for label, fields in raw["objects"].items()
    }
    return Observation(objects=objects, lives=raw["lives"], score=raw["score"])


def mock_script_path(name: str) -> str:
    """Filesystem path of a bundled scripted-response directory."""
    path = resources.files(__package__).joinpath("mock_scripts", name)
    if not path.is_dir():
        raise ValueError(f"unknown mock script {name!r}")
    return os.fspath(path)
