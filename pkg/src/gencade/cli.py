"""Command-line entry points: train, eval, metrics, trace-dump.

Exit codes: 0 success, 1 usage error, 2 IO or configuration error,
3 backend failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_BACKEND = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad arguments; usage errors are 1 here."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="gencade",
        description="Train and inspect generatively rewritten game policies.",
    )
    sub = parser.add_subparsers(dest="command", metavar="command")

    p_train = sub.add_parser(
        "train",
        help="run the rollout -> feedback -> rewrite loop",
        description="Run the optimization loop and persist artifacts to the run directory.",
    )
    p_train.add_argument("--config", help="key=value config file; flags override it")
    p_train.add_argument("--game", choices=["pong", "breakout", "space_invaders"])
    p_train.add_argument("--iterations", type=int)
    p_train.add_argument("--rollout-steps", type=int, dest="rollout_steps")
    p_train.add_argument("--eval-len", type=int, dest="eval_len")
    p_train.add_argument(
        "--feedback-mode",
        choices=["staged_full_game", "rollout_only"],
        dest="feedback_mode",
    )
    p_train.add_argument("--run-seed", type=int, dest="run_seed")
    p_train.add_argument(
        "--eval-seeds",
        dest="eval_seeds",
        help="comma-separated episode seeds for full-game evaluation",
    )
    p_train.add_argument("--policy", help="initial policy file (default: bundled)")
    p_train.add_argument("--run-dir", dest="run_dir")
    p_train.add_argument("--backend", choices=["mock", "http"])
    p_train.add_argument("--endpoint")
    p_train.add_argument("--model-name", dest="model_name")
    p_train.add_argument(
        "--mock-script",
        dest="mock_script",
        help="directory of scripted *.txt responses (mock backend)",
    )
    p_train.add_argument("--memory-size", type=int, dest="memory_size")
    p_train.add_argument("--char-budget", type=int, dest="char_budget")
    p_train.add_argument("--max-retries", type=int, dest="max_retries")

    p_eval = sub.add_parser(
        "eval",
        help="evaluate a policy file over full games",
        description="Run full-game episodes of one policy and print per-episode and mean rewards.",
    )
    p_eval.add_argument("policy", help="policy source file")
    p_eval.add_argument(
        "--game", required=True, choices=["pong", "breakout", "space_invaders"]
    )
    p_eval.add_argument("--episodes", type=int, default=3)
    p_eval.add_argument("--seed", type=int, default=101, help="first episode seed")
    p_eval.add_argument("--episode-len", type=int, dest="episode_len", default=None)

    p_metrics = sub.add_parser(
        "metrics",
        help="print a code-complexity table for policy files",
        description="Print Stage/LOC/Comp./N. Ifs rows, one per policy file, in argument order.",
    )
    p_metrics.add_argument("policies", nargs="*", help="policy source files")

    p_dump = sub.add_parser(
        "trace-dump",
        help="dump one iteration's execution trace as JSON",
        description="Validate and emit the execution-trace JSON of one training iteration.",
    )
    p_dump.add_argument("run_dir", help="training run directory")
    p_dump.add_argument("iteration", type=int)
    p_dump.add_argument("--out", help="output file (default: stdout)")

    return parser


def _cmd_train(args: argparse.Namespace) -> int:
    from .harness import ConfigFileError, StartupError, load_run_config, train
    from .optimizer import BackendError

    overrides = {
        key: getattr(args, key)
        for key in (
            "game", "iterations", "rollout_steps", "eval_len", "feedback_mode",
            "run_seed", "policy", "run_dir", "backend", "endpoint",
            "model_name", "mock_script", "memory_size", "char_budget",
            "max_retries",
        )
    }
    if args.eval_seeds is not None:
        try:
            overrides["eval_seeds"] = tuple(
                int(s) for s in args.eval_seeds.split(",") if s.strip()
            )
        except ValueError:
            print(f"gencade train: bad --eval-seeds {args.eval_seeds!r}", file=sys.stderr)
            return EXIT_USAGE
    try:
        config = load_run_config(args.config, overrides)
    except ConfigFileError as exc:
        print(f"gencade train: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        record = train(config)
    except (StartupError, OSError) as exc:
        print(f"gencade train: {exc}", file=sys.stderr)
        return EXIT_IO
    except BackendError as exc:
        print(f"gencade train: backend failure: {exc}", file=sys.stderr)
        return EXIT_BACKEND

    print(f"game: {record.game}  feedback: {record.feedback_mode}")
    print(f"initial eval reward: {record.initial_eval:+.3f}")
    for entry in record.entries:
        status = "accepted" if entry.update_accepted else f"rejected ({entry.rejection})"
        print(
            f"iter {entry.iteration:03d}: rollout {entry.rollout_reward:+.1f}  "
            f"eval {entry.eval_reward:+.3f}  {status}"
        )
    print(
        f"best: iteration {record.best_iteration}, eval reward "
        f"{record.best_eval:+.3f} -> {os.path.join(config.run_dir, 'best_policy.dsl')}"
    )
    return EXIT_OK


def _cmd_eval(args: argparse.Namespace) -> int:
    from .dsl import DslError, parse, validate_interface
    from .feedback import DEFAULT_EVAL_LEN, evaluate_policy
    from .policies import GAME_INTERFACES

    try:
        with open(args.policy, encoding="utf-8") as fh:
            source = fh.read()
    except OSError as exc:
        print(f"gencade eval: file not found or unreadable: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        program = parse(source)
    except DslError as exc:
        print(f"gencade eval: parse error: {exc}", file=sys.stderr)
        return EXIT_IO
    violations = validate_interface(program, GAME_INTERFACES[args.game])
    if violations:
        for v in violations:
            print(f"gencade eval: interface violation: {v}", file=sys.stderr)
        return EXIT_IO
    if args.episodes < 1:
        print("gencade eval: --episodes must be >= 1", file=sys.stderr)
        return EXIT_USAGE

    seeds = tuple(args.seed + i for i in range(args.episodes))
    episode_len = args.episode_len if args.episode_len is not None else DEFAULT_EVAL_LEN
    result = evaluate_policy(args.game, program, episode_len, seeds)
    for seed, reward in zip(result.seeds, result.per_seed):
        print(f"episode seed={seed}: reward {reward:+.1f}")
    for err in result.errors:
        print(f"note: {err}")
    print(f"mean reward over {args.episodes} episodes: {result.mean_reward:+.3f}")
    return EXIT_OK


def _cmd_metrics(args: argparse.Namespace) -> int:
    from .dsl import DslError, parse
    from .dsl.metrics import metrics

    if not args.policies:
        print("usage: gencade metrics POLICY [POLICY ...]", file=sys.stderr)
        return EXIT_USAGE

    rows: list[tuple[str, str, str, str]] = []
    failed = False
    for path in args.policies:
        stage = os.path.splitext(os.path.basename(path))[0]
        try:
            with open(path, encoding="utf-8") as fh:
                program = parse(fh.read())
        except (OSError, DslError) as exc:
            rows.append((stage, f"error: {exc}", "", ""))
            failed = True
            continue
        m = metrics(program)
        rows.append((stage, str(m.loc), str(m.cyclomatic), str(m.max_if_nesting)))

    widths = [
        max(len(header), max((len(r[i]) for r in rows), default=0))
        for i, header in enumerate(("Stage", "LOC", "Comp.", "N. Ifs"))
    ]
    header = (
        f"{'Stage':<{widths[0]}}  {'LOC':>{widths[1]}}  "
        f"{'Comp.':>{widths[2]}}  {'N. Ifs':>{widths[3]}}"
    )
    print(header)
    for stage, loc, comp, nifs in rows:
        if loc.startswith("error:"):
            print(f"{stage:<{widths[0]}}  {loc}")
        else:
            print(
                f"{stage:<{widths[0]}}  {loc:>{widths[1]}}  "
                f"{comp:>{widths[2]}}  {nifs:>{widths[3]}}"
            )
    return EXIT_IO if failed else EXIT_OK


def _cmd_trace_dump(args: argparse.Namespace) -> int:
    from .tracing import TraceError, TraceGraph

    path = os.path.join(args.run_dir, f"iter_{args.iteration:03d}", "trace.json")
    try:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        print(
            f"gencade trace-dump: no trace for iteration {args.iteration}: {exc}",
            file=sys.stderr,
        )
        return EXIT_IO
    try:
        graph = TraceGraph.from_json(raw)
    except (TraceError, ValueError) as exc:
        print(f"gencade trace-dump: corrupt trace file: {exc}", file=sys.stderr)
        return EXIT_IO
    dump = graph.to_json()
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(dump)
        except OSError as exc:
            print(f"gencade trace-dump: cannot write output: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"wrote {len(graph.nodes)} nodes to {args.out}")
    else:
        print(dump)
    return EXIT_OK


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    if args.command == "train":
        return _cmd_train(args)
    if args.command == "eval":
        return _cmd_eval(args)
    if args.command == "metrics":
        return _cmd_metrics(args)
    return _cmd_trace_dump(args)


if __name__ == "__main__":
    sys.exit(main())
