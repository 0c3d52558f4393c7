#!/usr/bin/env python3
"""Run the standard translation and rotation trials and print their scores.

With --model the prediction controller runs alongside the trigger controller
for a side-by-side table; without it only the trigger controller runs.
"""

import argparse
import math

from comanip.harness import BenchConfig, run_trial
from comanip.leader import Direction, TaskKind, TaskSpec
from comanip.metrics import plateau_speed

TASKS = {
    "translation": TaskSpec(kind=TaskKind.LATERAL_TRANSLATION,
                            direction=Direction.LEFT, magnitude=2.0, duration=8.0),
    "rotation": TaskSpec(kind=TaskKind.PLANAR_ROTATION,
                         direction=Direction.RIGHT, magnitude=math.pi / 2,
                         duration=8.0),
}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--model", help="trained intent model (adds nnpc runs)")
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    controllers = ["evic"] + (["nnpc"] if args.model else [])
    print(f"{'controller':8s} {'task':12s} {'done':5s} {'t_c (s)':>8s} "
          f"{'plateau':>8s} {'MJE':>8s} {'MTM':>10s}")
    for ctrl in controllers:
        cfg = BenchConfig(controller=ctrl, seed=args.seed,
                          model_path=args.model)
        for name, task in TASKS.items():
            log, rep = run_trial(cfg, task)
            channel = 2 if name == "rotation" else 1
            plateau = plateau_speed(log.twists[:, channel], log.dt)
            tc = f"{rep.completion_time:.2f}" if rep.completion_time else "n/a"
            print(f"{ctrl:8s} {name:12s} {str(log.completed):5s} {tc:>8s} "
                  f"{plateau:8.3f} {rep.mj_error:8.2f} {rep.mtm:10.2f}")


if __name__ == "__main__":
    main()
