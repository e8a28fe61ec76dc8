"""Evaluate the bundled initial and reference policies side by side.

Prints full-game mean rewards over a fixed seed set for every game, plus
the improvement gap — the headline comparison the training loop is meant
to reproduce.
"""

from __future__ import annotations

import argparse

from gencade.envs import GAMES
from gencade.feedback import evaluate_policy
from gencade.policies import load_policy


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--seeds", default="11,23,37,41,53", help="comma-separated episode seeds"
    )
    parser.add_argument("--episode-len", type=int, default=4000)
    args = parser.parse_args()
    seeds = tuple(int(s) for s in args.seeds.split(",") if s.strip())

    print(f"{'game':<16} {'initial':>10} {'best':>10} {'gap':>10}")
    for game in GAMES:
        means = {}
        for which in ("initial", "best"):
            result = evaluate_policy(
                game, load_policy(game, which), args.episode_len, seeds
            )
            means[which] = result.mean_reward
        gap = means["best"] - means["initial"]
        print(
            f"{game:<16} {means['initial']:>+10.1f} {means['best']:>+10.1f} {gap:>+10.1f}"
        )


if __name__ == "__main__":
    main()
