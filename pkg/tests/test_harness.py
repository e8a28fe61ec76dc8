"""Training harness: config files, run records, rollback, crash containment."""

from __future__ import annotations

import json
import os

import pytest

from gencade.harness import (
    ConfigFileError,
    RunConfig,
    StartupError,
    load_run_config,
    make_run_config,
    parse_config_text,
    train,
)
from gencade.optimizer import OptimizerConfig
from gencade.policies import mock_script_path
from tests.conftest import CRASHING_PONG, NOOP_SOURCES


# -- config files -----------------------------------------------------------------

def test_parse_config_text_full():
    text = (
        "# run settings\n"
        "game = breakout\n"
        "iterations = 4\n"
        "rollout_steps = 200\n"
        "eval_len = 1000\n"
        "feedback_mode = rollout_only\n"
        "run_seed = 9\n"
        "eval_seeds = 5, 6, 7\n"
        "backend = mock\n"
        "memory_size = 2\n"
        "char_budget = 30000\n"
        "max_retries = 1\n"
    )
    values = parse_config_text(text)
    config = make_run_config(values)
    assert config.game == "breakout"
    assert config.iterations == 4
    assert config.rollout_steps == 200
    assert config.eval_len == 1000
    assert config.feedback_mode == "rollout_only"
    assert config.run_seed == 9
    assert config.eval_seeds == (5, 6, 7)
    assert config.optimizer.memory_size == 2
    assert config.optimizer.char_budget == 30000
    assert config.optimizer.max_retries == 1


def test_parse_config_rejects_unknown_key():
    with pytest.raises(ConfigFileError, match="line 2"):
        parse_config_text("game = pong\nspeed = 11\n")


def test_parse_config_rejects_bad_integer():
    with pytest.raises(ConfigFileError, match="iterations"):
        parse_config_text("iterations = soon\n")


def test_parse_config_rejects_missing_equals():
    with pytest.raises(ConfigFileError, match="line 1"):
        parse_config_text("just some words\n")


def test_load_run_config_overrides_win(tmp_path):
    path = tmp_path / "run.txt"
    path.write_text("game = pong\niterations = 7\n")
    config = load_run_config(str(path), {"iterations": 2, "run_dir": str(tmp_path / "r")})
    assert config.game == "pong"
    assert config.iterations == 2  # override beats file value


def test_run_config_defaults_per_game():
    assert RunConfig(game="pong").rollout_steps == 400
    assert RunConfig(game="breakout").rollout_steps == 300
    assert RunConfig(game="space_invaders").rollout_steps == 15


def test_run_config_validation():
    with pytest.raises(ConfigFileError, match="game"):
        RunConfig(game="chess")
    with pytest.raises(ConfigFileError, match="iterations"):
        RunConfig(game="pong", iterations=-1)
    with pytest.raises(ConfigFileError, match="feedback_mode"):
        RunConfig(game="pong", feedback_mode="mystery")
    with pytest.raises(ConfigFileError, match="eval_seeds"):
        RunConfig(game="pong", eval_seeds=())


def test_run_config_render_round_trips(tmp_path):
    config = RunConfig(
        game="breakout",
        iterations=2,
        run_seed=5,
        eval_seeds=(8, 9),
        run_dir=str(tmp_path / "out"),
    )
    values = parse_config_text(config.render())
    clone = make_run_config(values)
    assert clone.game == config.game
    assert clone.iterations == config.iterations
    assert clone.eval_seeds == config.eval_seeds
    # The rendered copy deliberately omits its own location.
    assert "run_dir" not in config.render()


# -- training runs ---------------------------------------------------------------

def write_policy(tmp_path, source: str) -> str:
    path = tmp_path / "policy.dsl"
    path.write_text(source)
    return str(path)


def mock_run_config(tmp_path, **kwargs) -> RunConfig:
    defaults = dict(
        game="pong",
        iterations=1,
        rollout_steps=30,
        eval_len=200,
        run_seed=7,
        eval_seeds=(26,),
        run_dir=str(tmp_path / "run"),
        optimizer=OptimizerConfig(
            backend="mock", mock_script=mock_script_path("pong_improving")
        ),
    )
    defaults.update(kwargs)
    return RunConfig(**defaults)


def test_zero_iteration_run_writes_record_and_best(tmp_path):
    config = mock_run_config(tmp_path, iterations=0)
    record = train(config)
    assert record.entries == []
    assert record.best_iteration == 0  # the starting program is the best
    assert record.best_eval == record.initial_eval
    run_dir = config.run_dir
    for name in ("config.txt", "initial_policy.dsl", "best_policy.dsl", "record.json"):
        assert os.path.exists(os.path.join(run_dir, name)), name
    with open(os.path.join(run_dir, "record.json")) as fh:
        on_disk = json.load(fh)
    assert on_disk["best"] == {"iteration": 0, "eval_reward": record.initial_eval}
    assert on_disk["game"] == "pong"
    # Zero iterations: best program is byte-identical to the start.
    with open(os.path.join(run_dir, "best_policy.dsl")) as fh:
        best = fh.read()
    with open(os.path.join(run_dir, "initial_policy.dsl")) as fh:
        initial = fh.read()
    assert best == initial


def test_accepted_iteration_improves_policy(tmp_path):
    config = mock_run_config(tmp_path, iterations=1, eval_len=2000, eval_seeds=(26, 27, 40))
    record = train(config)
    entry = record.entries[0]
    assert entry.update_accepted
    assert entry.rejection is None
    assert entry.eval_reward > record.initial_eval
    assert record.best_iteration == 1
    it_dir = os.path.join(config.run_dir, "iter_001")
    for name in ("policy.dsl", "prompt.txt", "response.txt", "trace.json"):
        assert os.path.exists(os.path.join(it_dir, name)), name


def test_garbage_response_is_rejected_and_policy_unchanged(tmp_path):
    script_dir = tmp_path / "script"
    script_dir.mkdir()
    (script_dir / "01.txt").write_text("```select_action\nthis is not code :::\n```\n")
    config = mock_run_config(
        tmp_path,
        iterations=1,
        optimizer=OptimizerConfig(backend="mock", mock_script=str(script_dir)),
    )
    record = train(config)
    entry = record.entries[0]
    assert not entry.update_accepted
    assert entry.rejection is not None and "parse" in entry.rejection
    # The iteration's saved policy equals the initial one (no change kept).
    with open(os.path.join(config.run_dir, "iter_001", "policy.dsl")) as fh:
        kept = fh.read()
    with open(os.path.join(config.run_dir, "initial_policy.dsl")) as fh:
        initial = fh.read()
    assert kept == initial
    # Rejected update reuses the cached evaluation.
    assert entry.eval_reward == record.initial_eval
    assert record.best_iteration == 0


def test_exhausted_mock_script_fails_iteration_not_run(tmp_path):
    script_dir = tmp_path / "script"
    script_dir.mkdir()
    (script_dir / "01.txt").write_text("```select_action\nreturn 0\n```\n")
    config = mock_run_config(
        tmp_path,
        iterations=2,
        optimizer=OptimizerConfig(
            backend="mock", mock_script=str(script_dir), max_retries=0
        ),
    )
    record = train(config)
    assert len(record.entries) == 2
    # Iteration 2 had no response left: recorded as a backend failure.
    assert not record.entries[1].update_accepted
    assert "backend" in record.entries[1].rejection
    assert os.path.exists(os.path.join(config.run_dir, "iter_002", "response.txt"))


def test_crashing_policy_feeds_error_into_feedback(tmp_path):
    policy = write_policy(tmp_path, CRASHING_PONG)
    config = mock_run_config(tmp_path, iterations=1, policy_path=policy)
    record = train(config)
    entry = record.entries[0]
    assert entry.rollout_error is not None
    assert "division by zero" in entry.rollout_error
    assert "The rollout ended early with an error" in entry.feedback_text
    # The run still completed and wrote its record.
    assert os.path.exists(os.path.join(config.run_dir, "record.json"))


def test_best_selection_matches_entry_scan(tmp_path):
    config = mock_run_config(
        tmp_path, iterations=3, eval_len=2000, eval_seeds=(26, 27, 40)
    )
    record = train(config)
    # Oracle: scan initial + accepted entries for the max (ties -> earliest).
    candidates = [(record.initial_eval, 0)] + [
        (e.eval_reward, e.iteration) for e in record.entries if e.update_accepted
    ]
    best_eval = max(v for v, _ in candidates)
    best_iter = min(i for v, i in candidates if v == best_eval)
    assert record.best_eval == best_eval
    assert record.best_iteration == best_iter


def test_every_iteration_policy_snapshot_is_loadable(tmp_path):
    from gencade.dsl import parse, validate_interface
    from gencade.policies import GAME_INTERFACES

    config = mock_run_config(tmp_path, iterations=3, eval_len=400)
    train(config)
    for i in (1, 2, 3):
        path = os.path.join(config.run_dir, f"iter_{i:03d}", "policy.dsl")
        with open(path) as fh:
            program = parse(fh.read())
        assert validate_interface(program, GAME_INTERFACES["pong"]) == []


def test_rollout_only_mode_feedback_has_no_band_text(tmp_path):
    config = mock_run_config(tmp_path, iterations=1, feedback_mode="rollout_only")
    record = train(config)
    text = record.entries[0].feedback_text
    assert text.startswith("Reward over the training rollout:")
    assert "points" not in text  # no staged band message


def test_staged_mode_feedback_has_band_text(tmp_path):
    config = mock_run_config(tmp_path, iterations=1)
    record = train(config)
    assert "points" in record.entries[0].feedback_text


def test_missing_policy_file_is_startup_error(tmp_path):
    config = mock_run_config(tmp_path, policy_path=str(tmp_path / "missing.dsl"))
    with pytest.raises(StartupError, match="missing.dsl"):
        train(config)


def test_invalid_policy_file_is_startup_error(tmp_path):
    path = write_policy(tmp_path, "fn policy(obs):\n    return 0\n")  # wrong interface
    config = mock_run_config(tmp_path, policy_path=path)
    with pytest.raises(StartupError, match="select_action"):
        train(config)


def test_interface_mismatch_across_games_is_startup_error(tmp_path):
    path = write_policy(tmp_path, NOOP_SOURCES["breakout"])
    config = mock_run_config(tmp_path, game="pong", policy_path=path)
    with pytest.raises(StartupError):
        train(config)


def test_record_json_is_deterministic(tmp_path):
    config_a = mock_run_config(tmp_path, iterations=2, run_dir=str(tmp_path / "a"))
    config_b = mock_run_config(tmp_path, iterations=2, run_dir=str(tmp_path / "b"))
    train(config_a)
    train(config_b)
    with open(os.path.join(config_a.run_dir, "record.json")) as fh:
        a = fh.read()
    with open(os.path.join(config_b.run_dir, "record.json")) as fh:
        b = fh.read()
    assert a == b
