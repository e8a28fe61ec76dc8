"""Traced rollouts: graph shape, chaining, replay, and crash containment."""

from __future__ import annotations

import pytest

from gencade.dsl import parse
from gencade.policies import load_policy_source
from gencade.rollout import (
    coerce_action,
    derive_step_seed,
    replay_traced_rollout,
    run_episode,
    run_traced_rollout,
)
from tests.conftest import CRASHING_PONG, noop_program


# -- action coercion ------------------------------------------------------------

@pytest.mark.parametrize(
    "value,expected",
    [(0, 0), (3, 3), (True, 1), (False, 0), (2.0, 2), (-1.0, -1)],
)
def test_coerce_action_accepts_action_like_values(value, expected):
    assert coerce_action(value) == expected


@pytest.mark.parametrize("value", [2.5, "2", None, [1]])
def test_coerce_action_rejects_non_actions(value):
    with pytest.raises(ValueError, match="not a valid action"):
        coerce_action(value)


def test_derive_step_seed_is_deterministic_and_spread():
    a = derive_step_seed(7, 0)
    b = derive_step_seed(7, 1)
    assert a == derive_step_seed(7, 0)
    assert a != b
    assert 0 <= a <= 0xFFFFFFFF
    # Different base seeds decorrelate the same step index.
    assert derive_step_seed(7, 5) != derive_step_seed(8, 5)


# -- graph shape on a minimal policy ---------------------------------------------

def test_noop_rollout_graph_shape():
    program = noop_program("pong")
    result = run_traced_rollout(program, "pong", env_seed=3, max_steps=10)
    graph = result.graph
    assert result.error is None
    assert result.steps_executed == 10
    assert len(result.actions) == 10

    params = [n for n in graph.nodes if n.kind == "parameter"]
    inputs = [n for n in graph.nodes if n.kind == "input"]
    calls = [n for n in graph.nodes if n.kind == "call"]
    # One parameter node per trainable function, once, up front.
    assert sorted(p.function for p in params) == ["predict_ball_trajectory", "select_action"]
    assert all(p.step_index is None for p in params)
    # One observation input per executed step.
    assert len(inputs) == 10
    assert [n.step_index for n in inputs] == list(range(10))
    # Both trainables run every step on this policy.
    assert len(calls) == 20
    # Each call node references its own function's parameter node.
    param_ids = {p.function: p.id for p in params}
    for c in calls:
        assert param_ids[c.function] in c.inputs


def test_rollout_chains_steps_through_output_nodes():
    program = noop_program("pong")
    graph = run_traced_rollout(program, "pong", env_seed=3, max_steps=6).graph
    inputs = [n for n in graph.nodes if n.kind == "input"]
    assert inputs[0].inputs == ()
    for prev_step, node in enumerate(inputs[1:]):
        # Each later observation lists the previous step's output node.
        assert node.inputs == (graph.outputs_per_step[prev_step],)


def test_rollout_rewards_and_seeds_recorded_per_step():
    program = noop_program("pong")
    result = run_traced_rollout(program, "pong", env_seed=3, max_steps=50, rng_base_seed=9)
    graph = result.graph
    assert graph.steps == list(range(result.steps_executed))
    assert sum(graph.rewards_per_step.values()) == result.total_reward
    for step in graph.steps:
        assert graph.step_seeds[step] == derive_step_seed(9, step)


def test_traced_and_plain_rollouts_agree_on_reward():
    program = parse(load_policy_source("pong", "best"))
    traced = run_traced_rollout(program, "pong", env_seed=11, max_steps=300)
    plain = run_episode(program, "pong", env_seed=11, max_steps=300)
    assert traced.total_reward == plain.total_reward
    assert traced.actions == plain.actions
    assert plain.graph is None


def test_replay_reproduces_graph_exactly():
    program = parse(load_policy_source("pong", "best"))
    result = run_traced_rollout(program, "pong", env_seed=21, max_steps=120)
    assert replay_traced_rollout(
        program, result.graph, "pong", env_seed=21, max_steps=120
    )


def test_replay_detects_mismatched_seed():
    program = parse(load_policy_source("pong", "best"))
    result = run_traced_rollout(program, "pong", env_seed=21, max_steps=120)
    assert not replay_traced_rollout(
        program, result.graph, "pong", env_seed=22, max_steps=120
    )


# -- crash containment --------------------------------------------------------------

def test_policy_crash_ends_rollout_with_error_not_exception():
    program = parse(CRASHING_PONG)
    result = run_traced_rollout(program, "pong", env_seed=0, max_steps=50)
    assert result.error is not None
    assert "division by zero" in result.error
    assert result.steps_executed == 0  # crashed on the very first step
    assert result.actions == []


def test_invalid_action_ends_rollout_with_error():
    src = (
        "fn policy(obs):\n    return pick(obs)\n\n"
        "fn pick(obs) trainable:\n    return 9\n"
    )
    result = run_traced_rollout(parse(src), "pong", env_seed=0, max_steps=50)
    assert result.error is not None
    assert "not one of" in result.error


def test_non_numeric_action_reported_as_error():
    src = (
        'fn policy(obs):\n    return pick(obs)\n\n'
        'fn pick(obs) trainable:\n    return "up"\n'
    )
    result = run_traced_rollout(parse(src), "pong", env_seed=0, max_steps=50)
    assert result.error is not None
    assert "not a valid action" in result.error


def test_step_budget_exhaustion_contained():
    src = (
        "fn policy(obs):\n    return spin(obs)\n\n"
        "fn spin(obs) trainable:\n    x = 0\n    while x < 100000:\n        x = x + 1\n    return 0\n"
    )
    result = run_traced_rollout(
        parse(src), "pong", env_seed=0, max_steps=10, step_budget=500
    )
    assert result.error is not None
    assert "budget" in result.error.lower()


def test_max_steps_cap_respected():
    program = noop_program("breakout")
    result = run_traced_rollout(program, "breakout", env_seed=1, max_steps=25)
    assert result.steps_executed <= 25
    assert len(result.graph.steps) == result.steps_executed
