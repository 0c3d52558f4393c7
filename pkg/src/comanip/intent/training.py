"""Curriculum training for the motion predictor.

Phase 0 trains on real windows until the batch cost drops below a threshold.
Each later phase k feeds the network windows whose trailing k samples are its
own (frozen) predictions, combined with original windows, so the feedback
loop the rollout runs at inference time is already seen during training.
That progressive exposure is what keeps 50-step rollouts from drifting.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from ..dynamics import ValidationError
from .data import Corpus, sample_segments
from .network import (
    RecurrentModel,
    backward,
    forward_with_cache,
    init_model,
    iterated_predict_batch,
    mse,
)


@dataclass(frozen=True)
class TrainingSchedule:
    """Knobs for the progressive curriculum; defaults are the CI desk scale.

    The warmup rate decays (cosine) to the curriculum rate across phase 0;
    the later phases run gently so stabilizing the rollout cannot unlearn
    the one-step predictor they build on.
    """

    batch_size: int = 32
    window: int = 150
    horizon: int = 50
    phase0_threshold: float = 0.05   # summed batch cost target for phase 0
    phase0_max_iters: int = 600
    phase_iters: int = 3             # gradient steps per curriculum phase
    learning_rate: float = 1e-3
    curriculum_lr: float = 2e-4
    grad_clip: float = 5.0           # global gradient norm ceiling
    seed: int = 0


class TrainingDiverged(RuntimeError):
    """Cost became non-finite; carries the loss history for diagnosis."""

    def __init__(self, message: str, history: list[tuple[int, int, float]]):
        super().__init__(message)
        self.history = history


class Adam:
    """Adaptive-moment gradient descent over a named parameter dict."""

    def __init__(self, params: dict[str, np.ndarray], lr: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        b1c = 1.0 - self.beta1**self.t
        b2c = 1.0 - self.beta2**self.t
        for k, g in grads.items():
            self.m[k] = self.beta1 * self.m[k] + (1 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1 - self.beta2) * g * g
            params[k] -= self.lr * (self.m[k] / b1c) / (np.sqrt(self.v[k] / b2c) + self.eps)


def clip_gradients(grads: dict[str, np.ndarray], max_norm: float) -> float:
    total = math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if total > max_norm > 0:
        scale = max_norm / total
        for g in grads.values():
            g *= scale
    return total


def _train_step(model: RecurrentModel, opt: Adam, windows: np.ndarray,
                targets: np.ndarray, schedule: TrainingSchedule,
                history: list) -> float:
    pred, cache = forward_with_cache(model, windows)
    loss = mse(pred, targets)
    if not math.isfinite(loss):
        raise TrainingDiverged(f"non-finite training cost {loss}", history)
    grads = backward(model, cache, 2.0 * (pred - targets))
    clip_gradients(grads, schedule.grad_clip)
    opt.step(model.params, grads)
    return loss


def train(corpus: Corpus, schedule: TrainingSchedule | None = None,
          layers: int = 2, hidden: int = 32,
          log_every: int = 0) -> tuple[RecurrentModel, list[tuple[int, int, float]]]:
    """Run the full curriculum; returns the model and (phase, iter, loss) history.

    Phase index 0 is the real-data warmup; phases 1..horizon append that many
    predicted steps. The corpus is standardized with its own global stats and
    split 75/25 at trial level; only the training trials are sampled here.
    """
    schedule = schedule or TrainingSchedule()
    trials = corpus.standardized()
    train_idx, _ = corpus.split(schedule.seed)
    model = init_model(layers=layers, hidden=hidden, seed=schedule.seed,
                       mean=corpus.mean, std=corpus.std, window=schedule.window)
    rng = np.random.default_rng(schedule.seed + 1)
    opt = Adam(model.params, lr=schedule.learning_rate)
    history: list[tuple[int, int, float]] = []
    t0 = time.monotonic()

    w = schedule.window
    for it in range(schedule.phase0_max_iters):
        # cosine decay from the warmup rate down to the curriculum rate
        frac = it / max(schedule.phase0_max_iters - 1, 1)
        opt.lr = (schedule.curriculum_lr
                  + (schedule.learning_rate - schedule.curriculum_lr)
                  * 0.5 * (1 + math.cos(math.pi * frac)))
        segs = sample_segments(trials, train_idx, schedule.batch_size, w + 1, rng)
        loss = _train_step(model, opt, segs[:, :w], segs[:, w], schedule, history)
        history.append((0, it, loss))
        if log_every and it % log_every == 0:
            print(f"phase 0 iter {it}: cost {loss:.4f}")
        if loss < schedule.phase0_threshold:
            break

    opt.lr = schedule.curriculum_lr
    for k in range(1, schedule.horizon + 1):
        for it in range(schedule.phase_iters):
            segs = sample_segments(trials, train_idx, schedule.batch_size,
                                   w + k + 1, rng)
            base = segs[:, :w]
            preds = iterated_predict_batch(model, base, k)
            fed = np.concatenate([segs[:, k:w], preds], axis=1)
            windows = np.concatenate([base, fed], axis=0)
            targets = np.concatenate([segs[:, w], segs[:, w + k]], axis=0)
            loss = _train_step(model, opt, windows, targets, schedule, history)
            history.append((k, it, loss))
        if log_every and k % log_every == 0:
            print(f"phase {k}/{schedule.horizon}: cost {loss:.4f} "
                  f"({time.monotonic() - t0:.0f}s)")
    return model, history


def persistence_rollout(window: np.ndarray, horizon: int) -> np.ndarray:
    """Repeat-last-value baseline, the floor any useful predictor must beat."""
    window = np.asarray(window, dtype=float)
    return np.repeat(window[-1:], horizon, axis=0)


def rollout_rmse(model: RecurrentModel, corpus: Corpus, indices: list[int],
                 horizon: int = 50, n_windows: int = 200,
                 seed: int = 0) -> dict[str, float]:
    """Rollout RMSE over sampled windows vs the persistence baseline.

    All quantities are in standardized units over all six channels. Also
    reports the largest absolute value any rollout reached (boundedness).
    """
    trials = corpus.standardized()
    rng = np.random.default_rng(seed)
    segs = sample_segments(trials, indices, n_windows,
                           model.window + horizon, rng)
    base = segs[:, :model.window]
    actual = segs[:, model.window:]
    rollout = iterated_predict_batch(model, base, horizon)
    pers = np.repeat(base[:, -1:], horizon, axis=1)
    return {
        "model_rmse": float(np.sqrt(np.mean((rollout - actual) ** 2))),
        "persistence_rmse": float(np.sqrt(np.mean((pers - actual) ** 2))),
        "max_abs_rollout": float(np.max(np.abs(rollout))),
        "n_windows": float(n_windows),
        "horizon": float(horizon),
    }
