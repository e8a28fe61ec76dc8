"""Training orchestration: the rollout → feedback → rewrite loop.

Each iteration runs a capped traced rollout of the current policy, builds
staged feedback from the current policy's full-game evaluation, walks the
trace backward from the last step's output node, asks the generative
backend for replacement function bodies, and applies them with rollback.
Every artifact (policy snapshots, prompts, raw responses, trace dumps,
the run record) is written under ``run_dir``; nothing in the outputs
depends on wall-clock time, so identical configs produce byte-identical
run directories.
"""

from __future__ import annotations

import dataclasses
import json
import os
import shutil
from dataclasses import dataclass, field
from typing import Optional

from .dsl import PolicyProgram, format_program, parse, validate_interface
from .dsl.metrics import metrics
from .envs import DEFAULT_ROLLOUT_STEPS, GAMES
from .feedback import (
    DEFAULT_EVAL_LEN,
    DEFAULT_EVAL_SEEDS,
    FEEDBACK_MODES,
    build_feedback,
    evaluate_policy,
)
from .optimizer import (
    BackendError,
    OptimizerConfig,
    OptimizerMemory,
    PromptBudgetError,
    apply_update,
    build_prompt,
    make_backend,
    propose_update,
)
from .policies import GAME_INTERFACES, load_policy_source
from .rollout import run_traced_rollout
from .tracing import backward


class ConfigFileError(Exception):
    """Raised for unreadable or malformed run-configuration files."""


class StartupError(Exception):
    """Raised when a run cannot begin (bad policy, unwritable run_dir)."""


@dataclass
class RunConfig:
    game: str = "pong"
    iterations: int = 20
    rollout_steps: Optional[int] = None  # None -> per-game default
    eval_len: int = DEFAULT_EVAL_LEN
    feedback_mode: str = "staged_full_game"
    run_seed: int = 0
    eval_seeds: tuple[int, ...] = DEFAULT_EVAL_SEEDS
    policy_path: Optional[str] = None  # None -> bundled initial policy
    run_dir: str = "runs/run"
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)

    def __post_init__(self) -> None:
        if self.game not in GAMES:
            raise ConfigFileError(f"unknown game {self.game!r}")
        if self.iterations < 0:
            raise ConfigFileError("iterations must be >= 0")
        if self.feedback_mode not in FEEDBACK_MODES:
            raise ConfigFileError(f"unknown feedback_mode {self.feedback_mode!r}")
        if not self.eval_seeds:
            raise ConfigFileError("eval_seeds must name at least one seed")
        if self.rollout_steps is None:
            self.rollout_steps = DEFAULT_ROLLOUT_STEPS[self.game]

    def render(self) -> str:
        """Key=value text of the effective configuration.

        ``run_dir`` is deliberately omitted: the rendered copy lives inside
        the run directory, so recording the path would make otherwise
        identical runs differ byte-wise.
        """
        opt = self.optimizer
        lines = [
            f"game = {self.game}",
            f"iterations = {self.iterations}",
            f"rollout_steps = {self.rollout_steps}",
            f"eval_len = {self.eval_len}",
            f"feedback_mode = {self.feedback_mode}",
            f"run_seed = {self.run_seed}",
            f"eval_seeds = {', '.join(str(s) for s in self.eval_seeds)}",
            f"policy = {self.policy_path or ''}",
            f"backend = {opt.backend}",
            f"memory_size = {opt.memory_size}",
            f"char_budget = {opt.char_budget}",
            f"max_retries = {opt.max_retries}",
            f"endpoint = {opt.endpoint}",
            f"model_name = {opt.model_name}",
            f"mock_script = {opt.mock_script or ''}",
        ]
        return "\n".join(lines) + "\n"


_INT_KEYS = {
    "iterations", "rollout_steps", "eval_len", "run_seed",
    "memory_size", "char_budget", "max_retries",
}
_STR_KEYS = {
    "game", "feedback_mode", "policy", "run_dir",
    "backend", "endpoint", "model_name", "mock_script",
}


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines (#-comments and blanks ignored)."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigFileError(f"line {lineno}: expected key = value, got {line!r}")
        key = key.strip()
        value = value.strip()
        if key == "eval_seeds":
            try:
                values[key] = tuple(int(v) for v in value.split(",") if v.strip())
            except ValueError as exc:
                raise ConfigFileError(f"line {lineno}: bad seed list {value!r}") from exc
        elif key in _INT_KEYS:
            try:
                values[key] = int(value)
            except ValueError as exc:
                raise ConfigFileError(f"line {lineno}: {key} needs an integer") from exc
        elif key in _STR_KEYS:
            values[key] = value
        else:
            raise ConfigFileError(f"line {lineno}: unknown key {key!r}")
    return values


def make_run_config(values: dict) -> RunConfig:
    """Build a RunConfig from parsed key/value pairs."""
    optimizer = OptimizerConfig(
        memory_size=values.get("memory_size", 5),
        char_budget=values.get("char_budget", 60_000),
        backend=values.get("backend", "mock"),
        endpoint=values.get("endpoint", ""),
        model_name=values.get("model_name", ""),
        max_retries=values.get("max_retries", 2),
        mock_script=values.get("mock_script") or None,
    )
    return RunConfig(
        game=values.get("game", "pong"),
        iterations=values.get("iterations", 20),
        rollout_steps=values.get("rollout_steps"),
        eval_len=values.get("eval_len", DEFAULT_EVAL_LEN),
        feedback_mode=values.get("feedback_mode", "staged_full_game"),
        run_seed=values.get("run_seed", 0),
        eval_seeds=values.get("eval_seeds", DEFAULT_EVAL_SEEDS),
        policy_path=values.get("policy") or None,
        run_dir=values.get("run_dir", "runs/run"),
        optimizer=optimizer,
    )


def load_run_config(path: Optional[str], overrides: dict) -> RunConfig:
    """Read a config file (optional) and apply CLI overrides on top."""
    values: dict = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                values = parse_config_text(fh.read())
        except OSError as exc:
            raise ConfigFileError(f"cannot read config file {path}: {exc}") from exc
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    return make_run_config(values)


@dataclass
class IterationEntry:
    iteration: int
    rollout_reward: float
    eval_reward: float
    feedback_text: str
    update_accepted: bool
    rejection: Optional[str]
    metrics: dict
    rollout_error: Optional[str] = None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class RunRecord:
    game: str
    feedback_mode: str
    initial_eval: float
    entries: list[IterationEntry] = field(default_factory=list)
    best_iteration: int = 0
    best_eval: float = 0.0
    best_program: Optional[PolicyProgram] = None

    def to_dict(self) -> dict:
        return {
            "game": self.game,
            "feedback_mode": self.feedback_mode,
            "initial_eval": self.initial_eval,
            "entries": [e.to_dict() for e in self.entries],
            "best": {"iteration": self.best_iteration, "eval_reward": self.best_eval},
        }


def _load_initial_program(config: RunConfig) -> PolicyProgram:
    if config.policy_path is None:
        source = load_policy_source(config.game, "initial")
    else:
        try:
            with open(config.policy_path, encoding="utf-8") as fh:
                source = fh.read()
        except OSError as exc:
            raise StartupError(f"cannot read policy file: {exc}") from exc
    program = parse(source)
    violations = validate_interface(program, GAME_INTERFACES[config.game])
    if violations:
        raise StartupError(
            "initial policy does not satisfy the game interface: "
            + "; ".join(violations)
        )
    return program


def _prepare_run_dir(config: RunConfig) -> None:
    try:
        os.makedirs(config.run_dir, exist_ok=True)
        probe = os.path.join(config.run_dir, ".write-probe")
        with open(probe, "w", encoding="utf-8") as fh:
            fh.write("")
        os.remove(probe)
    except OSError as exc:
        raise StartupError(f"run_dir is not writable: {exc}") from exc


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def train(config: RunConfig) -> RunRecord:
    """Run the full optimization loop; returns the populated RunRecord."""
    program = _load_initial_program(config)
    _prepare_run_dir(config)
    run_dir = config.run_dir
    _write(os.path.join(run_dir, "config.txt"), config.render())
    _write(os.path.join(run_dir, "initial_policy.dsl"), format_program(program))

    backend = make_backend(config.optimizer)
    memory = OptimizerMemory(config.optimizer.memory_size)

    current_eval = evaluate_policy(
        config.game, program, config.eval_len, config.eval_seeds
    ).mean_reward
    record = RunRecord(
        game=config.game,
        feedback_mode=config.feedback_mode,
        initial_eval=current_eval,
    )
    best_program, best_eval, best_iteration = program, current_eval, 0

    for iteration in range(1, config.iterations + 1):
        iter_dir = os.path.join(run_dir, f"iter_{iteration:03d}")
        os.makedirs(iter_dir, exist_ok=True)

        rollout_seed = config.run_seed ^ iteration
        rollout = run_traced_rollout(
            program,
            config.game,
            env_seed=rollout_seed,
            max_steps=config.rollout_steps,
        )
        graph = rollout.graph
        _write(os.path.join(iter_dir, "trace.json"), graph.to_json())

        feedback = build_feedback(
            config.game,
            config.feedback_mode,
            eval_reward=current_eval,
            rollout_reward=rollout.total_reward,
            rollout_error=rollout.error,
        )
        if graph.outputs_per_step:
            bindings = backward(graph, graph.last_output_node(), feedback.text)
        else:
            bindings = []

        accepted = False
        rejection_text: Optional[str] = None
        try:
            context = build_prompt(
                graph, bindings, feedback.text, program, memory, config.optimizer
            )
            _write(os.path.join(iter_dir, "prompt.txt"), context.render())
            update, raw_response = propose_update(context, config.optimizer, backend)
            _write(os.path.join(iter_dir, "response.txt"), raw_response)
            candidate, rejection = apply_update(program, update, config.game)
            if rejection is None:
                program = candidate
                accepted = True
                memory.add(update.summary() + " (accepted)", feedback.text)
            else:
                rejection_text = str(rejection)
                memory.add(
                    update.summary() + f" (rejected: {rejection_text})", feedback.text
                )
        except (BackendError, PromptBudgetError) as exc:
            rejection_text = f"backend: {exc}"
            _write(os.path.join(iter_dir, "response.txt"), f"(backend error: {exc})\n")
            memory.add("no usable update (backend failure)", feedback.text)

        if accepted:
            current_eval = evaluate_policy(
                config.game, program, config.eval_len, config.eval_seeds
            ).mean_reward
            if current_eval > best_eval:
                best_program, best_eval, best_iteration = program, current_eval, iteration

        _write(os.path.join(iter_dir, "policy.dsl"), format_program(program))
        record.entries.append(
            IterationEntry(
                iteration=iteration,
                rollout_reward=rollout.total_reward,
                eval_reward=current_eval,
                feedback_text=feedback.text,
                update_accepted=accepted,
                rejection=rejection_text,
                metrics=dataclasses.asdict(metrics(program)),
                rollout_error=rollout.error,
            )
        )

    record.best_iteration = best_iteration
    record.best_eval = best_eval
    record.best_program = best_program
    _write(os.path.join(run_dir, "best_policy.dsl"), format_program(best_program))
    _write(
        os.path.join(run_dir, "record.json"),
        json.dumps(record.to_dict(), indent=2, sort_keys=True) + "\n",
    )
    return record
