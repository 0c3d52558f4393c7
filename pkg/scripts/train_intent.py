#!/usr/bin/env python3
"""Train the desk-scale intent model on a corpus and report rollout quality."""

import argparse
import json
import time

from comanip.intent import (
    TrainingSchedule,
    load_corpus_dir,
    rollout_rmse,
    save_model,
    train,
)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data", required=True, help="corpus directory")
    parser.add_argument("--model", required=True, help="output model file")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--layers", type=int, default=2)
    parser.add_argument("--hidden", type=int, default=32)
    parser.add_argument("--phase0-iters", type=int, default=1800)
    parser.add_argument("--phase-iters", type=int, default=3)
    parser.add_argument("--horizon", type=int, default=50)
    args = parser.parse_args()

    corpus = load_corpus_dir(args.data)
    schedule = TrainingSchedule(
        phase0_threshold=0.01, phase0_max_iters=args.phase0_iters,
        phase_iters=args.phase_iters, horizon=args.horizon,
        learning_rate=2e-3, curriculum_lr=2e-4, seed=args.seed)
    start = time.perf_counter()
    model, _ = train(corpus, schedule, layers=args.layers, hidden=args.hidden,
                     log_every=10)
    print(f"trained in {time.perf_counter() - start:.0f}s")

    _, val = corpus.split(args.seed)
    result = rollout_rmse(model, corpus, val, horizon=args.horizon,
                          n_windows=200, seed=1)
    print(json.dumps(result, indent=2))
    save_model(model, args.model)
    print(f"saved {args.model}")


if __name__ == "__main__":
    main()
