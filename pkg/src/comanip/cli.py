"""Command-line entry points for the bench.

Subcommands: sim (scripted trials), train / eval (intent model), report
(score logged trials into the comparison table), serve (live session for a
teleop client). A config file path can also come from COMANIP_CONFIG.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

CONFIG_ENV = "COMANIP_CONFIG"


def _load_config(path: str | None):
    from .harness import BenchConfig

    path = path or os.environ.get(CONFIG_ENV)
    if path:
        return BenchConfig.load(path)
    return BenchConfig()


def _cmd_sim(args: argparse.Namespace) -> int:
    from .harness import load_task_script, run_batch

    config = _load_config(args.config)
    config = dataclasses.replace(
        config, controller=args.controller, seed=args.seed,
        model_path=args.model or config.model_path)
    config.validate()
    tasks = load_task_script(args.task)
    reports, failures = run_batch(config, tasks, args.repetitions, args.out)
    done = sum(1 for r in reports if r.completed)
    print(f"{len(reports)} trials ({done} completed, {len(failures)} failed) "
          f"-> {args.out}")
    for r in reports:
        print(f"  {r.task_kind}: completion {r.completion_time}, "
              f"mje {r.mj_error:.2f}, mtm {r.mtm:.2f}")
    return 1 if failures else 0


def _cmd_train(args: argparse.Namespace) -> int:
    from .intent import TrainingSchedule, load_corpus_dir, save_model, train

    corpus = load_corpus_dir(args.data)
    schedule = TrainingSchedule(
        phase0_max_iters=args.phase0_iters, phase_iters=args.epochs,
        phase0_threshold=args.threshold, horizon=args.horizon,
        learning_rate=args.lr, seed=args.seed)
    model, history = train(corpus, schedule, layers=args.layers,
                           hidden=args.hidden,
                           log_every=25 if args.verbose else 0)
    save_model(model, args.model)
    phase0 = [h for h in history if h[0] == 0]
    print(f"trained on {len(corpus.trials)} trials "
          f"({len(phase0)} warmup iterations, final cost {history[-1][2]:.4f}) "
          f"-> {args.model}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    from .intent import load_corpus_dir, load_model, rollout_rmse

    model = load_model(args.model)
    corpus = load_corpus_dir(args.data)
    _, val = corpus.split(args.seed)
    result = rollout_rmse(model, corpus, val, horizon=args.horizon,
                          n_windows=args.windows, seed=args.seed)
    result["beats_persistence"] = result["model_rmse"] < result["persistence_rmse"]
    print(json.dumps(result, indent=2))
    return 0 if result["beats_persistence"] else 1


def _cmd_report(args: argparse.Namespace) -> int:
    from .metrics import TrialLog, score_trial, write_summary_csv

    logs = sorted(Path(args.logs).glob("*.jsonl"))
    if not logs:
        print(f"no .jsonl logs under {args.logs}", file=sys.stderr)
        return 1
    reports = [score_trial(TrialLog.read_jsonl(p)) for p in logs]
    write_summary_csv(reports, args.csv)
    print(f"scored {len(reports)} logs -> {args.csv}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    from .harness.server import serve_forever

    config = _load_config(args.config)
    config = dataclasses.replace(
        config, controller=args.controller, port=args.port, live=True,
        lockstep=args.lockstep, model_path=args.model or config.model_path)
    serve_forever(config)
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="comanip",
        description="planar co-manipulation test bench")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("sim", help="run scripted trials")
    sim.add_argument("--controller", required=True,
                     choices=("bmvic", "evic", "nnpc"))
    sim.add_argument("--task", required=True, help="task script (JSON array)")
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--repetitions", type=int, default=1)
    sim.add_argument("--model", help="trained model file (nnpc)")
    sim.add_argument("--config", help=f"bench config JSON (or ${CONFIG_ENV})")
    sim.set_defaults(func=_cmd_sim)

    tr = sub.add_parser("train", help="train the intent predictor")
    tr.add_argument("--data", required=True, help="corpus directory")
    tr.add_argument("--epochs", type=int, default=3,
                    help="gradient steps per curriculum phase")
    tr.add_argument("--seed", type=int, required=True)
    tr.add_argument("--model", required=True, help="output model file")
    tr.add_argument("--layers", type=int, default=2)
    tr.add_argument("--hidden", type=int, default=32)
    tr.add_argument("--horizon", type=int, default=50)
    tr.add_argument("--phase0-iters", type=int, default=600)
    tr.add_argument("--threshold", type=float, default=0.05)
    tr.add_argument("--lr", type=float, default=1e-3)
    tr.add_argument("--verbose", action="store_true")
    tr.set_defaults(func=_cmd_train)

    ev = sub.add_parser("eval", help="score a model against a corpus")
    ev.add_argument("--model", required=True)
    ev.add_argument("--data", required=True)
    ev.add_argument("--horizon", type=int, default=50)
    ev.add_argument("--windows", type=int, default=200)
    ev.add_argument("--seed", type=int, default=0)
    ev.set_defaults(func=_cmd_eval)

    rep = sub.add_parser("report", help="score logged trials into a table")
    rep.add_argument("--logs", required=True, help="directory of .jsonl logs")
    rep.add_argument("--csv", required=True, help="output summary CSV")
    rep.set_defaults(func=_cmd_report)

    srv = sub.add_parser("serve", help="live session for a teleop client")
    srv.add_argument("--port", type=int, default=8765)
    srv.add_argument("--controller", default="evic",
                     choices=("bmvic", "evic", "nnpc"))
    srv.add_argument("--model", help="trained model file (nnpc)")
    srv.add_argument("--lockstep", action="store_true",
                     help="advance only on client messages (deterministic)")
    srv.add_argument("--config", help=f"bench config JSON (or ${CONFIG_ENV})")
    srv.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
