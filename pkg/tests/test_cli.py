"""Command-line interface: subcommands, output shapes, and exit codes."""

from __future__ import annotations

import json
import os

import pytest

from gencade.cli import EXIT_BACKEND, EXIT_IO, EXIT_OK, EXIT_USAGE, main
from gencade.policies import load_policy_source, mock_script_path
from tests.conftest import NOOP_SOURCES


def write(tmp_path, name: str, text: str) -> str:
    path = tmp_path / name
    path.write_text(text)
    return str(path)


# -- top-level dispatch ------------------------------------------------------------

def test_no_subcommand_is_usage_error(capsys):
    assert main([]) == EXIT_USAGE
    assert "usage" in capsys.readouterr().err


def test_unknown_subcommand_exits_one():
    with pytest.raises(SystemExit) as exc:
        main(["juggle"])
    assert exc.value.code == EXIT_USAGE


def test_unknown_flag_exits_one():
    with pytest.raises(SystemExit) as exc:
        main(["eval", "--frobnicate"])
    assert exc.value.code == EXIT_USAGE


# -- eval ---------------------------------------------------------------------------

def test_eval_prints_per_episode_and_mean(tmp_path, capsys):
    path = write(tmp_path, "noop.dsl", NOOP_SOURCES["breakout"])
    code = main(
        ["eval", path, "--game", "breakout", "--episodes", "2", "--seed", "3",
         "--episode-len", "300"]
    )
    out = capsys.readouterr().out
    assert code == EXIT_OK
    assert "episode seed=3: reward +0.0" in out
    assert "episode seed=4: reward +0.0" in out
    assert "mean reward over 2 episodes: +0.000" in out


def test_eval_best_pong_policy_beats_initial(tmp_path, capsys):
    best = write(tmp_path, "best.dsl", load_policy_source("pong", "best"))
    initial = write(tmp_path, "initial.dsl", load_policy_source("pong", "initial"))
    main(["eval", best, "--game", "pong", "--episodes", "1", "--seed", "26",
          "--episode-len", "2000"])
    best_out = capsys.readouterr().out
    main(["eval", initial, "--game", "pong", "--episodes", "1", "--seed", "26",
          "--episode-len", "2000"])
    initial_out = capsys.readouterr().out

    def mean(text):
        return float(text.split("episodes:")[1].strip())

    assert mean(best_out) > mean(initial_out)


def test_eval_missing_file(capsys):
    assert main(["eval", "/no/such/file.dsl", "--game", "pong"]) == EXIT_IO
    assert "file not found" in capsys.readouterr().err


def test_eval_parse_error(tmp_path, capsys):
    path = write(tmp_path, "broken.dsl", "fn policy(obs)\n    oops\n")
    assert main(["eval", path, "--game", "pong"]) == EXIT_IO
    assert "parse error" in capsys.readouterr().err


def test_eval_interface_violation(tmp_path, capsys):
    path = write(tmp_path, "wrong.dsl", NOOP_SOURCES["breakout"])
    assert main(["eval", path, "--game", "pong"]) == EXIT_IO
    assert "interface violation" in capsys.readouterr().err


def test_eval_requires_game_flag(tmp_path):
    path = write(tmp_path, "noop.dsl", NOOP_SOURCES["pong"])
    with pytest.raises(SystemExit) as exc:
        main(["eval", path])
    assert exc.value.code == EXIT_USAGE


# -- metrics --------------------------------------------------------------------------

def test_metrics_table_rows_follow_argument_order(tmp_path, capsys):
    a = write(tmp_path, "pong_initial.dsl", load_policy_source("pong", "initial"))
    b = write(tmp_path, "pong_best.dsl", load_policy_source("pong", "best"))
    assert main(["metrics", b, a]) == EXIT_OK
    out = capsys.readouterr().out
    lines = [l for l in out.splitlines() if l.strip()]
    assert lines[0].split() == ["Stage", "LOC", "Comp.", "N.", "Ifs"]
    assert lines[1].split() == ["pong_best", "60", "24", "2"]
    assert lines[2].split() == ["pong_initial", "12", "6", "1"]


def test_metrics_unreadable_file_rows_error_and_exit_two(tmp_path, capsys):
    good = write(tmp_path, "ok.dsl", NOOP_SOURCES["pong"])
    assert main(["metrics", good, "/no/such/policy.dsl"]) == EXIT_IO
    out = capsys.readouterr().out
    assert "ok" in out
    assert "error:" in out


def test_metrics_without_files_is_usage_error(capsys):
    assert main(["metrics"]) == EXIT_USAGE
    assert "usage" in capsys.readouterr().err


# -- train ----------------------------------------------------------------------------

def run_train(tmp_path, *extra):
    run_dir = str(tmp_path / "run")
    args = [
        "train", "--game", "pong", "--iterations", "1", "--rollout-steps", "30",
        "--eval-len", "200", "--run-seed", "7", "--eval-seeds", "26",
        "--run-dir", run_dir, "--backend", "mock",
        "--mock-script", mock_script_path("pong_improving"),
    ]
    args.extend(extra)
    return args, run_dir


def test_train_mock_run_prints_iterations_and_best(tmp_path, capsys):
    args, run_dir = run_train(tmp_path)
    assert main(args) == EXIT_OK
    out = capsys.readouterr().out
    assert "initial eval reward:" in out
    assert "iter 001:" in out
    assert "accepted" in out
    assert "best: iteration" in out
    assert os.path.exists(os.path.join(run_dir, "best_policy.dsl"))


def test_train_with_config_file(tmp_path, capsys):
    config = write(
        tmp_path,
        "run.txt",
        "game = pong\niterations = 1\nrollout_steps = 30\neval_len = 200\n"
        "run_seed = 7\neval_seeds = 26\nbackend = mock\n"
        f"mock_script = {mock_script_path('pong_improving')}\n",
    )
    run_dir = str(tmp_path / "run")
    assert main(["train", "--config", config, "--run-dir", run_dir]) == EXIT_OK
    assert "best: iteration" in capsys.readouterr().out


def test_train_bad_config_file(tmp_path, capsys):
    config = write(tmp_path, "bad.txt", "game = pong\nwarp_speed = 9\n")
    assert main(["train", "--config", config]) == EXIT_IO
    assert "warp_speed" in capsys.readouterr().err


def test_train_missing_config_file(tmp_path, capsys):
    assert main(["train", "--config", str(tmp_path / "none.txt")]) == EXIT_IO


def test_train_http_without_endpoint_is_backend_error(tmp_path, capsys):
    run_dir = str(tmp_path / "run")
    code = main(
        ["train", "--game", "pong", "--iterations", "1", "--backend", "http",
         "--run-dir", run_dir]
    )
    assert code == EXIT_BACKEND
    assert "backend" in capsys.readouterr().err


def test_train_bad_mock_script_is_backend_error(tmp_path, capsys):
    run_dir = str(tmp_path / "run")
    code = main(
        ["train", "--game", "pong", "--iterations", "1", "--backend", "mock",
         "--mock-script", "/no/such/dir", "--run-dir", run_dir]
    )
    assert code == EXIT_BACKEND


def test_train_bad_eval_seeds_is_usage_error(tmp_path, capsys):
    code = main(["train", "--game", "pong", "--eval-seeds", "3,x,5"])
    assert code == EXIT_USAGE
    assert "eval-seeds" in capsys.readouterr().err


# -- trace-dump -----------------------------------------------------------------------

@pytest.fixture
def finished_run(tmp_path):
    args, run_dir = run_train(tmp_path)
    assert main(args) == EXIT_OK
    return run_dir


def test_trace_dump_to_stdout(finished_run, capsys):
    capsys.readouterr()  # drop the training output
    assert main(["trace-dump", finished_run, "1"]) == EXIT_OK
    out = capsys.readouterr().out
    nodes = json.loads(out)
    assert isinstance(nodes, list) and nodes
    assert {"id", "kind", "inputs"} <= set(nodes[0])


def test_trace_dump_to_file(finished_run, tmp_path, capsys):
    capsys.readouterr()
    out_path = str(tmp_path / "dump.json")
    assert main(["trace-dump", finished_run, "1", "--out", out_path]) == EXIT_OK
    message = capsys.readouterr().out
    assert "wrote" in message and "nodes to" in message
    with open(out_path) as fh:
        nodes = json.load(fh)
    assert isinstance(nodes, list) and nodes


def test_trace_dump_missing_iteration(finished_run, capsys):
    capsys.readouterr()
    assert main(["trace-dump", finished_run, "42"]) == EXIT_IO
    assert "no trace for iteration 42" in capsys.readouterr().err


def test_trace_dump_corrupt_file(tmp_path, capsys):
    it_dir = tmp_path / "run" / "iter_001"
    it_dir.mkdir(parents=True)
    (it_dir / "trace.json").write_text("{broken")
    assert main(["trace-dump", str(tmp_path / "run"), "1"]) == EXIT_IO
    assert "corrupt trace file" in capsys.readouterr().err
