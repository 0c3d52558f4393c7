"""Sensor-style signal processing for the co-manipulation bench.

Ground-truth simulation becomes sensor streams here: the handle wrench is
sampled at 100 Hz, pose at 200 Hz, everything is low-pass filtered near 20 Hz
(human muscle response band), pose is differentiated numerically, and the
measured loads are split into the part that accelerates the board and the
part the partners exert against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import (
    HandleWrench,
    TableGeometry,
    TableState,
    ValidationError,
    board_torques,
    external_torque,
)

GRAVITY = 9.81          # m/s^2
FORCE_RATE_HZ = 100.0   # handle force sensor rate
POSE_RATE_HZ = 200.0    # motion-capture rate

#: Ratio of mean interaction to mean external force magnitude observed in
#: blindfolded human dyads; kept for comparison reports, never asserted.
HHI_INTERACTION_TO_EXTERNAL_RATIO = 20.0


@dataclass(frozen=True)
class FilterSpec:
    """Second-order low-pass characteristic: cutoff and sampling rate in Hz."""

    cutoff: float = 20.0
    sample_rate: float = 500.0
    order: int = 2

    def __post_init__(self) -> None:
        if self.order != 2:
            raise ValidationError("only second-order filters are supported")
        if not (0 < self.cutoff < self.sample_rate / 2):
            raise ValidationError(
                f"cutoff {self.cutoff} Hz must lie below Nyquist "
                f"({self.sample_rate / 2} Hz)"
            )


class Biquad:
    """Causal second-order Butterworth low-pass (bilinear transform).

    State is seeded with the first processed sample so a constant input
    passes through with no start-up transient. One instance per stream.
    """

    def __init__(self, spec: FilterSpec) -> None:
        k = math.tan(math.pi * spec.cutoff / spec.sample_rate)
        norm = 1.0 / (1.0 + math.sqrt(2.0) * k + k * k)
        self.b0 = k * k * norm
        self.b1 = 2.0 * self.b0
        self.b2 = self.b0
        self.a1 = 2.0 * (k * k - 1.0) * norm
        self.a2 = (1.0 - math.sqrt(2.0) * k + k * k) * norm
        self._primed = False
        self._x1 = self._x2 = self._y1 = self._y2 = 0.0

    def reset(self, value: float = 0.0) -> None:
        self._x1 = self._x2 = self._y1 = self._y2 = value
        self._primed = True

    def process(self, x: float) -> float:
        if not self._primed:
            self.reset(x)
        y = (self.b0 * x + self.b1 * self._x1 + self.b2 * self._x2
             - self.a1 * self._y1 - self.a2 * self._y2)
        self._x2, self._x1 = self._x1, x
        self._y2, self._y1 = self._y1, y
        return y


def lowpass(series: np.ndarray, spec: FilterSpec) -> np.ndarray:
    """Filter a uniformly sampled sequence; unity DC gain, causal."""
    series = np.asarray(series, dtype=float)
    if series.ndim != 1 or series.size < 1:
        raise ValidationError("lowpass expects a non-empty 1-D sequence")
    filt = Biquad(spec)
    out = np.empty_like(series)
    for i, x in enumerate(series):
        out[i] = filt.process(float(x))
    return out


def differentiate(series: np.ndarray, spec: FilterSpec) -> np.ndarray:
    """Numerical derivative of uniformly sampled data, then low-passed.

    Apply twice for acceleration. Exact on ramps once the filter settles.
    """
    series = np.asarray(series, dtype=float)
    if series.size < 2:
        raise ValidationError("differentiate needs at least 2 samples")
    dt = 1.0 / spec.sample_rate
    raw = np.gradient(series, dt)
    return lowpass(raw, spec)


def interaction_force(total_force: np.ndarray, geom: TableGeometry,
                      accel: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a measured force into external (m*a) and interaction parts.

    Works per axis on scalars or arrays; the identity Fe + Fi == Ft holds
    exactly by construction.
    """
    ft = np.asarray(total_force, dtype=float)
    a = np.asarray(accel, dtype=float)
    if not (np.all(np.isfinite(ft)) and np.all(np.isfinite(a))):
        raise ValidationError("interaction_force requires finite inputs")
    fe = geom.mass * a
    fi = ft - fe
    return fe, fi


def interaction_torque(wrench: HandleWrench, geom: TableGeometry,
                       state: TableState) -> tuple[tuple[float, float, float],
                                                   tuple[float, float, float]]:
    """Split the sensed handle torque into external and interaction parts."""
    tt = board_torques(wrench, geom)
    te = external_torque(state, geom)
    ti = tuple(a - b for a, b in zip(tt, te))
    return te, ti


@dataclass(frozen=True)
class SensorReading:
    """One fused sample: wrench held from the 100 Hz stream on the 200 Hz pose clock."""

    t: float
    wrench: HandleWrench
    pose: tuple[float, float, float]


def sample_multirate(times: np.ndarray, poses: np.ndarray,
                     wrenches: list[HandleWrench]) -> list[SensorReading]:
    """Resample a dense simulation log onto the sensor clocks.

    Pose is sampled (zero-order hold on the latest state) at 200 Hz, force at
    100 Hz, and the force stream is then held onto the pose clock, mirroring
    an offline fusion of asynchronous sensors.
    """
    times = np.asarray(times, dtype=float)
    if times.size == 0:
        return []
    t_end = times[-1]
    pose_dt = 1.0 / POSE_RATE_HZ
    force_dt = 1.0 / FORCE_RATE_HZ
    readings = []
    n_pose = int(math.floor(t_end / pose_dt + 1e-9)) + 1
    for j in range(n_pose):
        tj = j * pose_dt
        i = int(np.searchsorted(times, tj + 1e-12, side="right")) - 1
        i = max(i, 0)
        tf = math.floor(tj / force_dt + 1e-9) * force_dt
        k = int(np.searchsorted(times, tf + 1e-12, side="right")) - 1
        k = max(k, 0)
        readings.append(SensorReading(t=tj, wrench=wrenches[k],
                                      pose=tuple(poses[i])))
    return readings


def motion_channels(readings: list[SensorReading],
                    spec: FilterSpec | None = None) -> np.ndarray:
    """Six-channel table-frame motion stream (vx, vy, vz, wx, wy, wz).

    Velocities come from filtered numerical differentiation of the sampled
    pose, rotated into the table frame; the out-of-plane channels are zero
    but kept so downstream consumers always see six channels.
    """
    if spec is None:
        spec = FilterSpec(cutoff=20.0, sample_rate=POSE_RATE_HZ)
    n = len(readings)
    if n < 2:
        raise ValidationError("motion_channels needs at least 2 readings")
    xs = np.array([r.pose[0] for r in readings])
    ys = np.array([r.pose[1] for r in readings])
    ths = np.array([r.pose[2] for r in readings])
    vx_w = differentiate(xs, spec)
    vy_w = differentiate(ys, spec)
    wz = differentiate(ths, spec)
    c = np.cos(ths)
    s = np.sin(ths)
    vx_t = c * vx_w + s * vy_w
    vy_t = -s * vx_w + c * vy_w
    zeros = np.zeros(n)
    return np.column_stack([vx_t, vy_t, zeros, zeros, zeros, wz])


def interaction_ratio(fi: np.ndarray, fe: np.ndarray) -> float:
    """Mean |interaction| over mean |external| force for one trial.

    Compare against HHI_INTERACTION_TO_EXTERNAL_RATIO; values blow up as the
    board stops accelerating, so report, never assert.
    """
    fe_mag = float(np.mean(np.abs(fe)))
    if fe_mag == 0.0:
        return math.inf
    return float(np.mean(np.abs(fi))) / fe_mag
