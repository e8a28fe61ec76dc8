"""Run the bundled three-step scripted training demo for Pong.

The scripted backend replays three canned rewrite responses; the last one
is the bundled reference policy, so the run ends with the strongest known
program selected as best. The run is fully deterministic: re-running into
another directory produces byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import json
import os

from gencade.harness import RunConfig, train
from gencade.optimizer import OptimizerConfig
from gencade.policies import mock_script_path


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--run-dir", default="runs/pong_mock")
    args = parser.parse_args()

    config = RunConfig(
        game="pong",
        iterations=3,
        eval_len=4000,
        run_seed=7,
        eval_seeds=(26, 27, 40),
        run_dir=args.run_dir,
        optimizer=OptimizerConfig(
            backend="mock", mock_script=mock_script_path("pong_improving")
        ),
    )
    record = train(config)

    print(f"initial eval reward: {record.initial_eval:+.3f}")
    for entry in record.entries:
        print(
            f"iter {entry.iteration}: eval {entry.eval_reward:+.3f}  "
            f"accepted={entry.update_accepted}  "
            f"loc={entry.metrics['loc']} cyclomatic={entry.metrics['cyclomatic']}"
        )
    print(f"best: iteration {record.best_iteration} at {record.best_eval:+.3f}")
    print(f"artifacts in {os.path.abspath(args.run_dir)}")
    with open(os.path.join(args.run_dir, "record.json"), encoding="utf-8") as fh:
        json.load(fh)  # sanity: the persisted record is valid JSON
    print("record.json parses")


if __name__ == "__main__":
    main()
