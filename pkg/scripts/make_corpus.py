#!/usr/bin/env python3
"""Generate a synthetic training corpus: scripted trigger-follower trials."""

import argparse
import time

from comanip.harness.corpus import synthesize_corpus


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--trials", type=int, default=200)
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--noise", type=float, default=0.01,
                        help="velocity measurement noise std (m/s, rad/s)")
    args = parser.parse_args()

    start = time.perf_counter()
    paths = synthesize_corpus(args.out, n_trials=args.trials, seed=args.seed,
                              noise_std=args.noise)
    print(f"wrote {len(paths)} trials to {args.out} "
          f"in {time.perf_counter() - start:.0f}s")


if __name__ == "__main__":
    main()
