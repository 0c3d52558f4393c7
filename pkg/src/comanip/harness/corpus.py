"""Synthetic training corpora: scripted trigger-follower trials, mixed tasks.

The intent model trains on motion the bench itself produces. Tasks are
jittered around the standard translation / rotation / anterior moves so the
corpus covers a spread of magnitudes and directions, then each trial log is
resampled onto the 200 Hz pose clock and exported as motion CSV channels.
"""

from __future__ import annotations

import dataclasses
from pathlib import Path

import numpy as np

from ..dynamics import HandleWrench
from ..leader import Direction, TaskKind, TaskSpec
from ..metrics import TrialLog
from ..signals import FilterSpec, POSE_RATE_HZ, motion_channels, sample_multirate
from .config import BenchConfig
from .trial import run_trial


def _random_task(rng: np.random.Generator) -> TaskSpec:
    kind = [TaskKind.LATERAL_TRANSLATION, TaskKind.PLANAR_ROTATION,
            TaskKind.ANTERIOR_TRANSLATION][int(rng.integers(3))]
    direction = Direction.LEFT if rng.random() < 0.5 else Direction.RIGHT
    if kind is TaskKind.LATERAL_TRANSLATION:
        magnitude = float(rng.uniform(1.2, 2.4))
        duration = 8.0
    elif kind is TaskKind.PLANAR_ROTATION:
        magnitude = float(rng.uniform(1.0, 1.9))
        duration = 7.0
    else:
        magnitude = float(rng.uniform(0.8, 1.6))
        duration = float(rng.uniform(3.0, 5.0))
    return TaskSpec(kind=kind, direction=direction, magnitude=magnitude,
                    duration=duration)


def _jittered_config(base: BenchConfig, rng: np.random.Generator) -> BenchConfig:
    """Vary the dyad's pace trial to trial.

    Slower ramps and off-nominal cruise speeds must be in the training
    distribution: at run time a predicting follower bootstraps from whatever
    creep the leader manages alone, which looks nothing like the crisp
    nominal ramps.
    """
    lateral_speed = float(rng.uniform(0.30, 0.38))
    rotation_speed = float(rng.uniform(0.34, 0.44))
    evic = dataclasses.replace(
        base.evic,
        lateral_speed=lateral_speed,
        rotation_speed=rotation_speed,
        lateral_accel=float(rng.uniform(0.22, 0.5)),
        rotation_accel=float(rng.uniform(0.28, 0.6)),
    )
    gains = dataclasses.replace(
        base.gains,
        cruise_speed=lateral_speed,
        rotation_speed=rotation_speed,
    )
    return dataclasses.replace(base, evic=evic, gains=gains)


def log_to_motion(log: TrialLog) -> tuple[np.ndarray, np.ndarray]:
    """(times, 6-channel motion) on the pose clock, the corpus pipeline."""
    wrenches = [HandleWrench(left=tuple(w[:3]), right=tuple(w[3:]))
                for w in log.wrenches]
    readings = sample_multirate(log.times, log.poses, wrenches)
    channels = motion_channels(readings,
                               FilterSpec(cutoff=20.0, sample_rate=POSE_RATE_HZ))
    times = np.array([r.t for r in readings])
    return times, channels


def synthesize_corpus(out_dir: str | Path, n_trials: int = 200, seed: int = 0,
                      config: BenchConfig | None = None,
                      noise_std: float = 0.01) -> list[Path]:
    """Generate n_trials trigger-follower trials and export motion CSVs.

    noise_std adds seeded Gaussian measurement noise (m/s, rad/s) to the
    in-plane channels, the residual a real velocity pipeline carries after
    filtering. Without it every trajectory is exactly repeatable and a
    predictor can memorize trials instead of learning the motion.
    """
    from ..intent.data import write_motion_csv

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    config = config or BenchConfig(controller="evic")
    rng = np.random.default_rng(seed)
    paths: list[Path] = []
    for i in range(n_trials):
        task = _random_task(rng)
        cfg = dataclasses.replace(_jittered_config(config, rng), seed=seed + i)
        log, _ = run_trial(cfg, task)
        times, channels = log_to_motion(log)
        if noise_std > 0:
            for col in (0, 1, 5):  # in-plane channels only
                channels[:, col] += rng.normal(0.0, noise_std, len(channels))
        path = out / f"trial_{i:04d}.csv"
        write_motion_csv(path, times, channels)
        paths.append(path)
    return paths
