"""Staged natural-language feedback and full-game evaluation.

Each game divides the evaluation-reward line into three bands (high,
medium, low); every band carries a message template rendered with the
actual score.  The band definitions live in a small plain-text format so
new games can be added without touching code; the built-in rules for the
three shipped games are written in that same format and parsed by the
same parser.

Rule syntax, line-oriented::

    game pong target 21
    stage high [19, inf)
      Template text with {score} and {to_win} placeholders...
    stage medium (0, 19)
      ...
    stage low (-inf, 0]
      ...

Interval brackets follow the usual convention: ``[``/``]`` inclusive,
``(``/``)`` exclusive; ``inf``/``-inf`` are accepted.  Per game the
intervals must partition the whole number line.  ``{score}`` renders the
evaluation reward; ``{to_win}`` renders ``target - score`` for games that
declare a target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .dsl.ast import PolicyProgram
from .rollout import run_episode

DEFAULT_EVAL_LEN = 4000
DEFAULT_EVAL_SEEDS = (101, 211, 307)

FEEDBACK_MODES = ("staged_full_game", "rollout_only")


class FeedbackError(Exception):
    """Raised for malformed stage-rule configurations."""


@dataclass(frozen=True)
class StageRule:
    game: str
    level: str  # high | medium | low
    lower: float
    upper: float
    lower_inclusive: bool
    upper_inclusive: bool
    template: str

    def contains(self, value: float) -> bool:
        above = value >= self.lower if self.lower_inclusive else value > self.lower
        below = value <= self.upper if self.upper_inclusive else value < self.upper
        return above and below


@dataclass(frozen=True)
class GameRules:
    game: str
    target: Optional[float]
    stages: tuple[StageRule, ...]


DEFAULT_RULES_TEXT = """\
game pong target 21
stage high [19, inf)
  Good job! You're close to winning the game! You're scoring {score} points against the opponent, only {to_win} points short of winning.
stage medium (0, 19)
  Keep it up! You're scoring {score} points against the opponent but you are still {to_win} points from winning the game. Try improving paddle positioning to prevent opponent scoring.
stage low (-inf, 0]
  Your score is {score} points. Try to improve paddle positioning to prevent opponent scoring.

game breakout target 350
stage high [300, inf)
  Good job! You're close to winning the game! You're scoring {score} points against the opponent, try ensuring you return the ball, only {to_win} points short of winning.
stage medium (0, 300)
  Keep it up! You're scoring {score} points against the opponent but you are still {to_win} points from winning the game. Try improving paddle positioning to return the ball and avoid losing lives.
stage low (-inf, 0]
  Your score is {score} points. Try to improve paddle positioning to return the ball and avoid losing lives.

game space_invaders
stage high [1000, inf)
  Great job! You're performing well with an average score of {score}. Try to score more even more points
stage medium (500, 1000)
  Good progress! Your average score is {score}. Focus on better timing for shooting and avoiding enemy projectiles.
stage low (-inf, 500]
  Your average score is {score}. Try to improve your strategy for shooting aliens and dodging projectiles.
"""

_LEVELS = ("high", "medium", "low")


def _parse_bound(text: str) -> float:
    text = text.strip()
    if text in ("inf", "+inf"):
        return math.inf
    if text == "-inf":
        return -math.inf
    try:
        return float(text)
    except ValueError as exc:
        raise FeedbackError(f"bad interval bound: {text!r}") from exc


def parse_stage_rules(text: str) -> dict[str, GameRules]:
    """Parse the plain-text stage-rule format into per-game rules."""
    games: dict[str, GameRules] = {}
    game: Optional[str] = None
    target: Optional[float] = None
    stages: list[StageRule] = []
    pending: Optional[tuple[str, float, float, bool, bool]] = None

    def close_game() -> None:
        nonlocal game, target, stages
        if game is None:
            return
        if pending is not None:
            raise FeedbackError(f"stage without template in game {game}")
        _validate_partition(game, stages)
        games[game] = GameRules(game=game, target=target, stages=tuple(stages))
        game, target, stages = None, None, []

    for raw in text.splitlines():
        if not raw.strip() or raw.strip().startswith("#"):
            continue
        indented = raw[:1].isspace()
        line = raw.strip()
        if indented:
            if pending is None:
                raise FeedbackError(f"template line outside a stage: {line!r}")
            level, lower, upper, li, ui = pending
            stages.append(
                StageRule(
                    game=game or "",
                    level=level,
                    lower=lower,
                    upper=upper,
                    lower_inclusive=li,
                    upper_inclusive=ui,
                    template=line,
                )
            )
            pending = None
            continue
        if pending is not None:
            raise FeedbackError(f"stage without template in game {game}")
        parts = line.split()
        if parts[0] == "game":
            close_game()
            if len(parts) not in (2, 4):
                raise FeedbackError(f"bad game line: {line!r}")
            game = parts[1]
            target = None
            if len(parts) == 4:
                if parts[2] != "target":
                    raise FeedbackError(f"bad game line: {line!r}")
                target = float(parts[3])
        elif parts[0] == "stage":
            if game is None:
                raise FeedbackError("stage line before any game line")
            if len(parts) < 3:
                raise FeedbackError(f"bad stage line: {line!r}")
            level = parts[1]
            if level not in _LEVELS:
                raise FeedbackError(f"unknown stage level {level!r}")
            interval = "".join(parts[2:])
            if interval[0] not in "[(" or interval[-1] not in "])":
                raise FeedbackError(f"bad interval: {interval!r}")
            lower_text, _, upper_text = interval[1:-1].partition(",")
            pending = (
                level,
                _parse_bound(lower_text),
                _parse_bound(upper_text),
                interval[0] == "[",
                interval[-1] == "]",
            )
        else:
            raise FeedbackError(f"unrecognized rule line: {line!r}")
    close_game()
    return games


def _validate_partition(game: str, stages: list[StageRule]) -> None:
    if not stages:
        raise FeedbackError(f"game {game} declares no stages")
    ordered = sorted(stages, key=lambda s: s.lower)
    if not math.isinf(ordered[0].lower) or ordered[0].lower_inclusive:
        raise FeedbackError(f"game {game}: stages must start at (-inf")
    if not math.isinf(ordered[-1].upper) or ordered[-1].upper_inclusive:
        raise FeedbackError(f"game {game}: stages must end at inf)")
    for prev, cur in zip(ordered, ordered[1:]):
        if prev.upper != cur.lower or prev.upper_inclusive == cur.lower_inclusive:
            raise FeedbackError(
                f"game {game}: stages {prev.level} and {cur.level} do not "
                f"tile the reward line ({prev.upper} vs {cur.lower})"
            )


DEFAULT_RULES: dict[str, GameRules] = parse_stage_rules(DEFAULT_RULES_TEXT)


def format_score(value: float) -> str:
    """Render a score: integral values without a decimal point."""
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return f"{value:g}"


def staged_feedback(
    game: str, eval_reward: float, rules: Optional[dict[str, GameRules]] = None
) -> str:
    """Render the feedback band containing ``eval_reward`` for ``game``."""
    table = DEFAULT_RULES if rules is None else rules
    if game not in table:
        raise FeedbackError(f"no stage rules for game {game!r}")
    game_rules = table[game]
    matches = [s for s in game_rules.stages if s.contains(eval_reward)]
    if len(matches) != 1:
        raise FeedbackError(
            f"stage rules for {game} match {len(matches)} bands at {eval_reward}"
        )
    rule = matches[0]
    to_win = ""
    if game_rules.target is not None:
        to_win = format_score(game_rules.target - eval_reward)
    return rule.template.format(score=format_score(eval_reward), to_win=to_win)


@dataclass
class EvalResult:
    """Mean full-game evaluation over a set of seeds."""

    game: str
    mean_reward: float
    per_seed: list[float] = field(default_factory=list)
    seeds: list[int] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)  # one entry per failed seed


def evaluate_policy(
    game: str,
    program: PolicyProgram,
    episode_len: int = DEFAULT_EVAL_LEN,
    seeds: tuple[int, ...] = DEFAULT_EVAL_SEEDS,
) -> EvalResult:
    """Mean cumulative reward over full episodes, one per seed.

    A policy crash aborts that seed's episode; the reward accumulated
    before the failure still counts and the error text is recorded.
    """
    per_seed: list[float] = []
    errors: list[str] = []
    for seed in seeds:
        if episode_len <= 0:
            per_seed.append(0.0)
            continue
        result = run_episode(program, game, env_seed=seed, max_steps=episode_len)
        per_seed.append(result.total_reward)
        if result.error:
            errors.append(f"seed {seed}: {result.error}")
    mean = sum(per_seed) / len(per_seed) if per_seed else 0.0
    return EvalResult(
        game=game, mean_reward=mean, per_seed=per_seed, seeds=list(seeds), errors=errors
    )


@dataclass(frozen=True)
class FeedbackReport:
    """Feedback text plus the numbers it was derived from."""

    text: str
    eval_reward: float
    rollout_reward: float
    mode: str  # staged_full_game | rollout_only


def build_feedback(
    game: str,
    mode: str,
    eval_reward: float,
    rollout_reward: float,
    rollout_error: Optional[str] = None,
    rules: Optional[dict[str, GameRules]] = None,
) -> FeedbackReport:
    """Compose the feedback text handed to the optimizer.

    ``staged_full_game`` renders the evaluation-band message plus the
    training-rollout reward; ``rollout_only`` uses the rollout reward
    alone, independent of the evaluation score.
    """
    if mode not in FEEDBACK_MODES:
        raise FeedbackError(f"unknown feedback mode {mode!r}")
    lines: list[str] = []
    if mode == "staged_full_game":
        lines.append(staged_feedback(game, eval_reward, rules))
    lines.append(
        f"Reward over the training rollout: {format_score(rollout_reward)}."
    )
    if rollout_error:
        lines.append(f"The rollout ended early with an error: {rollout_error}")
    return FeedbackReport(
        text="\n".join(lines),
        eval_reward=eval_reward,
        rollout_reward=rollout_reward,
        mode=mode,
    )
