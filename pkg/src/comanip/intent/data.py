"""Motion corpora for the intent estimator.

A corpus is a set of per-trial motion arrays, six channels per sample
(vx, vy, vz, wx, wy, wz) on the 200 Hz pose clock. Channels are scaled to
zero mean and unit standard deviation over the entire set before the
train/validation split; constant channels (the out-of-plane ones on a planar
bench) get their scale clamped to one so they pass through unchanged.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..dynamics import ValidationError

N_CHANNELS = 6
WINDOW_LENGTH = 150
CSV_HEADER = ["t", "vx", "vy", "vz", "wx", "wy", "wz"]


def channel_stats(data: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-channel mean and population standard deviation.

    Zero-variance channels are clamped to std 1 (with a warning) so constant
    channels standardize to zero instead of blowing up.
    """
    data = np.asarray(data, dtype=float)
    mean = data.mean(axis=0)
    std = data.std(axis=0)  # population, ddof=0
    zero = std == 0.0
    if np.any(zero):
        warnings.warn(
            f"channels {np.nonzero(zero)[0].tolist()} have zero variance; "
            "clamping their scale to 1", stacklevel=2)
        std = np.where(zero, 1.0, std)
    return mean, std


def standardize(data: np.ndarray, mean: np.ndarray, std: np.ndarray) -> np.ndarray:
    std = np.asarray(std, dtype=float)
    if np.any(std <= 0):
        raise ValidationError("standardize requires positive scales")
    return (np.asarray(data, dtype=float) - mean) / std


def destandardize(data: np.ndarray, mean: np.ndarray, std: np.ndarray) -> np.ndarray:
    return np.asarray(data, dtype=float) * std + mean


class PredictionWindow:
    """Ring buffer of the most recent motion samples; warm only when full."""

    def __init__(self, length: int = WINDOW_LENGTH, channels: int = N_CHANNELS) -> None:
        self.length = length
        self._buf = np.zeros((length, channels))
        self._count = 0
        self._head = 0

    @property
    def warm(self) -> bool:
        return self._count >= self.length

    def push(self, sample: np.ndarray) -> None:
        sample = np.asarray(sample, dtype=float)
        if sample.shape != (self._buf.shape[1],):
            raise ValidationError(
                f"expected {self._buf.shape[1]}-channel sample, got {sample.shape}")
        self._buf[self._head] = sample
        self._head = (self._head + 1) % self.length
        self._count += 1

    def array(self) -> np.ndarray:
        """Chronologically ordered window (oldest first)."""
        if not self.warm:
            raise ValidationError("prediction window is cold")
        return np.roll(self._buf, -self._head, axis=0).copy()

    def reset(self) -> None:
        self._count = 0
        self._head = 0
        self._buf[:] = 0.0


@dataclass
class Corpus:
    """Trial motion arrays with shared standardization and a 75/25 split."""

    trials: list[np.ndarray]
    mean: np.ndarray = field(default=None)  # type: ignore[assignment]
    std: np.ndarray = field(default=None)   # type: ignore[assignment]

    def __post_init__(self) -> None:
        if not self.trials:
            raise ValidationError("corpus needs at least one trial")
        for tr in self.trials:
            if tr.ndim != 2 or tr.shape[1] != N_CHANNELS:
                raise ValidationError("each trial must be (T, 6)")
        if self.mean is None or self.std is None:
            stacked = np.concatenate(self.trials, axis=0)
            self.mean, self.std = channel_stats(stacked)

    @property
    def n_samples(self) -> int:
        return sum(len(tr) for tr in self.trials)

    def standardized(self) -> list[np.ndarray]:
        return [standardize(tr, self.mean, self.std) for tr in self.trials]

    def split(self, seed: int, train_fraction: float = 0.75
              ) -> tuple[list[int], list[int]]:
        """Disjoint, exhaustive trial-level split (standardization is global)."""
        rng = np.random.default_rng(seed)
        order = rng.permutation(len(self.trials))
        n_train = max(1, int(round(train_fraction * len(self.trials))))
        if n_train >= len(self.trials):
            n_train = len(self.trials) - 1
        train = sorted(int(i) for i in order[:n_train])
        val = sorted(int(i) for i in order[n_train:])
        return train, val


def sample_segments(trials: list[np.ndarray], indices: list[int], count: int,
                    segment_length: int, rng: np.random.Generator) -> np.ndarray:
    """Draw random contiguous segments from the chosen trials, shape (count, L, 6)."""
    usable = [i for i in indices if len(trials[i]) >= segment_length]
    if not usable:
        raise ValidationError(
            f"no trial long enough for segments of {segment_length} samples")
    out = np.empty((count, segment_length, N_CHANNELS))
    for k in range(count):
        i = usable[rng.integers(len(usable))]
        start = rng.integers(len(trials[i]) - segment_length + 1)
        out[k] = trials[i][start:start + segment_length]
    return out


# ---------------------------------------------------------------------------
# Ingestion
# ---------------------------------------------------------------------------

def read_motion_csv(path: str | Path) -> np.ndarray:
    """Plain CSV with header t,vx,vy,vz,wx,wy,wz; returns the (T, 6) channels."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip() for h in header] != CSV_HEADER:
            raise ValidationError(f"{path}: expected header {','.join(CSV_HEADER)}")
        rows = [[float(v) for v in row[1:7]] for row in reader if row]
    if not rows:
        raise ValidationError(f"{path}: no samples")
    return np.asarray(rows)


def write_motion_csv(path: str | Path, times: np.ndarray, channels: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for t, row in zip(times, channels):
            writer.writerow([repr(float(t))] + [repr(float(v)) for v in row])


def _motion_from_trial_log(path: Path) -> np.ndarray:
    """Extract 200 Hz motion channels from a harness JSON-lines trial log."""
    from ..metrics import TrialLog
    from ..signals import FilterSpec, POSE_RATE_HZ, SensorReading, motion_channels
    from ..dynamics import HandleWrench

    log = TrialLog.read_jsonl(path)
    wrenches = [HandleWrench(left=tuple(w[:3]), right=tuple(w[3:]))
                for w in log.wrenches]
    from ..signals import sample_multirate
    readings = sample_multirate(log.times, log.poses, wrenches)
    return motion_channels(readings, FilterSpec(cutoff=20.0, sample_rate=POSE_RATE_HZ))


def load_corpus_dir(path: str | Path) -> Corpus:
    """Build a corpus from a directory of .csv motion files and/or .jsonl logs."""
    path = Path(path)
    trials: list[np.ndarray] = []
    for f in sorted(path.glob("*.csv")):
        trials.append(read_motion_csv(f))
    for f in sorted(path.glob("*.jsonl")):
        trials.append(_motion_from_trial_log(f))
    if not trials:
        raise ValidationError(f"{path}: no .csv or .jsonl trials found")
    return Corpus(trials=trials)
