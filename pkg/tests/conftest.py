"""Shared helpers: minimal interface-complete policies per game."""

from __future__ import annotations

import pytest

from gencade.dsl import PolicyProgram, parse

# Interface-complete programs that always hold still (action 0).
NOOP_SOURCES = {
    "pong": """\
fn policy(obs):
    predicted_ball_y = predict_ball_trajectory(obs)
    return select_action(predicted_ball_y, obs)

fn predict_ball_trajectory(obs) trainable:
    return none

fn select_action(predicted_ball_y, obs) trainable:
    return 0
""",
    "breakout": """\
fn policy(obs):
    pre_ball_x = predict_ball_trajectory(obs)
    target = generate_paddle_target(pre_ball_x, obs)
    return select_paddle_action(target, obs)

fn generate_paddle_target(pre_ball_x, obs) trainable:
    return none

fn predict_ball_trajectory(obs) trainable:
    return none

fn select_paddle_action(target_paddle_pos, obs) trainable:
    return 0
""",
    "space_invaders": """\
fn policy(obs):
    shoot = decide_shoot(obs)
    movement = decide_movement(obs)
    return combine_actions(shoot, movement)

fn combine_actions(shoot, movement) trainable:
    return 0

fn decide_movement(obs) trainable:
    return 0

fn decide_shoot(obs) trainable:
    return false
""",
}

# Same shape, but the action picker divides by zero on every step.
CRASHING_PONG = """\
fn policy(obs):
    predicted_ball_y = predict_ball_trajectory(obs)
    return select_action(predicted_ball_y, obs)

fn predict_ball_trajectory(obs) trainable:
    return none

fn select_action(predicted_ball_y, obs) trainable:
    return 1 / 0
"""


def noop_program(game: str) -> PolicyProgram:
    return parse(NOOP_SOURCES[game])


@pytest.fixture
def pong_noop() -> PolicyProgram:
    return noop_program("pong")
