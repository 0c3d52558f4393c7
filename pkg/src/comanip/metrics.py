"""Trial scoring: completion time, trajectory deviation, torque smoothness,
and the statistics used to compare controllers, plus the published
human-dyad baselines kept as fixtures for comparison reports.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import stdtr

from .dynamics import ValidationError
from .leader import TaskKind, TaskSpec, minimum_jerk

COMPLETION_BUFFER = 0.5  # s added for the motion missed outside the 5-95% band

# ---------------------------------------------------------------------------
# Published human-human baselines (blindfolded follower unless noted).
# Values are verbatim fixtures for reports; they are never regression targets.
# ---------------------------------------------------------------------------

#: metric -> (rotation mean, translation mean, rotation std, translation std)
BLIND_HHI_STATS: dict[str, tuple[float, float, float, float]] = {
    "mj_error": (392.71, 149.91, 391.7, 87.65),
    "completion_time": (7.08, 7.18, 2.9, 1.62),
    "avg_lateral_velocity": (0.17, 0.18, 0.06, 0.04),
    "avg_angular_velocity": (0.26, 0.004, 0.09, 0.003),
    "torque_change_z": (488454.4, 387937.6, 560601.9, 281393.2),
}

#: (metric, task) -> (blind HHI, EVIC, NNPC, sighted HHI)
CONTROLLER_BASELINES: dict[tuple[str, str], tuple[float, float, float, float]] = {
    ("completion_time", "rotation"): (7.08, 8.25, 8.26, 6.58),
    ("completion_time", "translation"): (7.18, 7.91, 7.75, 4.93),
    ("mj_error", "rotation"): (392.71, 96.44, 87.38, 344.70),
    ("mj_error", "translation"): (149.91, 50.24, 48.51, 98.92),
    ("mtm", "rotation"): (488454.38, 65602.60, 12770.75, 341253.43),
    ("mtm", "translation"): (387937.56, 48191.90, 15220.89, 151758.83),
}

BASELINE_COLUMNS = ("blind_hhi", "evic", "nnpc", "sighted_hhi")

#: Sawilowsky's effect-size ladder: lower |d| bound -> label.
EFFECT_SIZE_LADDER = (
    (2.0, "Huge"),
    (1.2, "Very Large"),
    (0.8, "Large"),
    (0.5, "Medium"),
    (0.2, "Small"),
    (0.0, "Very Small"),
)


def write_baseline_csv(path: str | Path) -> None:
    """Dump the published comparison table verbatim (reference artifact)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "task", *BASELINE_COLUMNS])
        for (metric, task), values in CONTROLLER_BASELINES.items():
            writer.writerow([metric, task, *[repr(v) for v in values]])


# ---------------------------------------------------------------------------
# Core metrics
# ---------------------------------------------------------------------------

def completion_time(times: np.ndarray, series: np.ndarray,
                    start: float, end: float,
                    resolution: float = 1e-6) -> float | None:
    """Task duration: first move past 5% to last settle into 95%, plus 0.5 s.

    Returns None when the displacement is below resolution or the trajectory
    never reaches the 95% band (undefined, reported as such).
    """
    times = np.asarray(times, dtype=float)
    series = np.asarray(series, dtype=float)
    disp = end - start
    if abs(disp) < resolution:
        return None
    progress = (series - start) / disp
    past5 = np.nonzero(progress > 0.05)[0]
    if past5.size == 0:
        return None
    t_start = times[past5[0]]
    in_band = progress >= 0.95
    if not in_band.any():
        return None
    entries = np.nonzero(in_band & ~np.concatenate(([True], in_band[:-1])))[0]
    if entries.size == 0:
        # already inside the band at the first sample
        t_end = times[0]
    else:
        t_end = times[entries[-1]]
    return float(t_end - t_start) + COMPLETION_BUFFER


def mje(actual: np.ndarray, ideal: np.ndarray, absolute: bool = True) -> float:
    """Deviation from an ideal trajectory, summed over samples.

    Residuals are absolute by default so deviations on either side cannot
    cancel; pass absolute=False for the literal signed sum.
    """
    actual = np.asarray(actual, dtype=float)
    ideal = np.asarray(ideal, dtype=float)
    if actual.shape != ideal.shape:
        raise ValidationError("actual and ideal must share one clock")
    res = ideal - actual
    return float(np.sum(np.abs(res)) if absolute else np.sum(res))


def mje_against_min_jerk(times: np.ndarray, actual: np.ndarray,
                         absolute: bool = True) -> float:
    """MJE against the quintic fitted to the trial's own endpoints/duration."""
    times = np.asarray(times, dtype=float)
    actual = np.asarray(actual, dtype=float)
    if times.size != actual.size or times.size < 2:
        raise ValidationError("need matching non-trivial time/position series")
    ideal = np.array([minimum_jerk(actual[0], actual[-1], t, times[0], times[-1])
                      for t in times])
    return mje(actual, ideal, absolute=absolute)


def _torque_rate(tau: np.ndarray, dt: float) -> np.ndarray:
    if tau.size < 2:
        raise ValidationError("torque rate needs at least 2 samples")
    if dt <= 0:
        raise ValidationError("dt must be positive")
    return np.gradient(np.asarray(tau, dtype=float), dt)


def mtm(tau: np.ndarray, dt: float) -> float:
    """Minimum-torque measure: summed squared torque rate over step pairs.

    Each consecutive pair contributes rate_t^2 + rate_{t+1}^2, so a constant
    unit rate over N samples scores 2(N-1).
    """
    rate = _torque_rate(np.asarray(tau, dtype=float), dt)
    return float(np.sum(rate[:-1] ** 2 + rate[1:] ** 2))


def torque_change(tau1: np.ndarray, tau2: np.ndarray, dt: float) -> float:
    """Integral of the two squared torque rates over the trial (trapezoidal)."""
    tau1 = np.asarray(tau1, dtype=float)
    tau2 = np.asarray(tau2, dtype=float)
    if tau1.shape != tau2.shape:
        raise ValidationError("torque series must be aligned")
    r1 = _torque_rate(tau1, dt)
    r2 = _torque_rate(tau2, dt)
    return float(np.trapezoid(r1**2 + r2**2, dx=dt))


def plateau_speed(series: np.ndarray, dt: float, window: float = 1.0) -> float:
    """Highest sustained speed: max of the rolling |v| mean over the window."""
    v = np.abs(np.asarray(series, dtype=float))
    n = max(int(round(window / dt)), 1)
    if v.size < n:
        return float(np.mean(v))
    kernel = np.ones(n) / n
    return float(np.max(np.convolve(v, kernel, mode="valid")))


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------

def pearson(x: np.ndarray, y: np.ndarray) -> float:
    """Product-moment correlation coefficient.

    Raises on length mismatch or zero variance (undefined).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size or x.size < 2:
        raise ValidationError("pearson needs two equal-length series (n >= 2)")
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(np.sum(xc**2)) * float(np.sum(yc**2)))
    if denom == 0.0:
        raise ValidationError("pearson undefined for zero-variance input")
    return float(np.sum(xc * yc) / denom)


def cohens_d(a: np.ndarray, b: np.ndarray) -> tuple[float, str]:
    """Effect size between two samples with its Sawilowsky category.

    d = (mean_a - mean_b) / pooled std (Bessel-corrected). Identical means
    give d = 0 even when the pooled spread vanishes; a vanished spread with
    distinct means is undefined and returns (nan, "Undefined").
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValidationError("cohens_d needs at least 2 samples per group")
    diff = float(a.mean() - b.mean())
    na, nb = a.size, b.size
    pooled = math.sqrt(((na - 1) * a.var(ddof=1) + (nb - 1) * b.var(ddof=1))
                       / (na + nb - 2))
    if pooled == 0.0:
        if diff == 0.0:
            return 0.0, effect_size_category(0.0)
        return math.nan, "Undefined"
    d = diff / pooled
    return d, effect_size_category(d)


def effect_size_category(d: float) -> str:
    mag = abs(d)
    for bound, label in EFFECT_SIZE_LADDER:
        if mag >= bound:
            return label
    return "Very Small"


def ttest_unpaired(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sided Welch t-test p-value.

    Identical means return p = 1.0; degenerate (zero) variances with distinct
    means return nan (undefined, reported as such).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValidationError("ttest needs at least 2 samples per group")
    diff = float(a.mean() - b.mean())
    if diff == 0.0:
        return 1.0
    va = a.var(ddof=1) / a.size
    vb = b.var(ddof=1) / b.size
    denom = va + vb
    if denom == 0.0:
        return math.nan
    t = diff / math.sqrt(denom)
    df = denom**2 / (va**2 / (a.size - 1) + vb**2 / (b.size - 1))
    return float(2.0 * stdtr(df, -abs(t)))


# ---------------------------------------------------------------------------
# Trial logs and reports
# ---------------------------------------------------------------------------

LOG_VERSION = 1


@dataclass
class TrialLog:
    """Uniform time series for one trial plus its provenance."""

    task: TaskSpec
    controller: str
    seed: int
    dt: float
    times: np.ndarray = field(default_factory=lambda: np.empty(0))
    poses: np.ndarray = field(default_factory=lambda: np.empty((0, 3)))
    twists: np.ndarray = field(default_factory=lambda: np.empty((0, 3)))
    accels: np.ndarray = field(default_factory=lambda: np.empty((0, 3)))
    wrenches: np.ndarray = field(default_factory=lambda: np.empty((0, 6)))
    torques: np.ndarray = field(default_factory=lambda: np.empty((0, 3)))
    commands: np.ndarray = field(default_factory=lambda: np.empty((0, 3)))
    modes: list[str] = field(default_factory=list)
    saturated: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=bool))
    completed: bool = True

    def __len__(self) -> int:
        return int(self.times.size)

    def validate(self) -> None:
        if len(self) == 0:
            raise ValidationError("empty trial log")
        dts = np.diff(self.times)
        if not np.all(dts > 0):
            raise ValidationError("log times must strictly increase")
        if not np.allclose(dts, self.dt, rtol=0, atol=1e-9):
            raise ValidationError("log must be uniformly sampled at dt")

    # -- JSON-lines round trip ------------------------------------------------

    def write_jsonl(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            header = {
                "type": "header",
                "version": LOG_VERSION,
                "controller": self.controller,
                "seed": self.seed,
                "dt": self.dt,
                "completed": self.completed,
                "task": self.task.to_dict(),
            }
            fh.write(json.dumps(header) + "\n")
            for i in range(len(self)):
                rec = {
                    "type": "step",
                    "seq": i,
                    "t": float(self.times[i]),
                    "pose": [float(v) for v in self.poses[i]],
                    "twist": [float(v) for v in self.twists[i]],
                    "accel": [float(v) for v in self.accels[i]],
                    "wrench": [float(v) for v in self.wrenches[i]],
                    "tau": [float(v) for v in self.torques[i]],
                    "cmd": [float(v) for v in self.commands[i]],
                    "mode": self.modes[i],
                    "sat": bool(self.saturated[i]),
                }
                fh.write(json.dumps(rec) + "\n")

    @staticmethod
    def read_jsonl(path: str | Path) -> "TrialLog":
        header = None
        rows: list[dict] = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                if rec["type"] == "header":
                    header = rec
                elif rec["type"] == "step":
                    rows.append(rec)
        if header is None:
            raise ValidationError(f"{path}: missing header record")
        seqs = [r["seq"] for r in rows]
        if seqs != list(range(len(rows))):
            raise ValidationError(f"{path}: step sequence has gaps or duplicates")
        log = TrialLog(
            task=TaskSpec.from_dict(header["task"]),
            controller=header["controller"],
            seed=int(header["seed"]),
            dt=float(header["dt"]),
            completed=bool(header.get("completed", True)),
            times=np.array([r["t"] for r in rows]),
            poses=np.array([r["pose"] for r in rows]),
            twists=np.array([r["twist"] for r in rows]),
            accels=np.array([r["accel"] for r in rows]),
            wrenches=np.array([r["wrench"] for r in rows]),
            torques=np.array([r["tau"] for r in rows]),
            commands=np.array([r["cmd"] for r in rows]),
            modes=[r["mode"] for r in rows],
            saturated=np.array([r["sat"] for r in rows], dtype=bool),
        )
        return log


@dataclass
class MetricsReport:
    """Scores for one trial, serializable for reports and batch summaries."""

    controller: str
    task_kind: str
    completed: bool
    completion_time: float | None
    mj_error: float
    mtm: float
    torque_change: float
    peak_velocity: float
    avg_velocity: float
    peak_angular_velocity: float
    avg_angular_velocity: float
    plateau_lateral: float
    plateau_angular: float
    mean_interaction_force: float
    saturation_steps: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    def write_json(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")


def _displacement_channel(log: TrialLog) -> tuple[np.ndarray, np.ndarray]:
    """(position series, velocity series) along the task's main axis."""
    if log.task.kind is TaskKind.PLANAR_ROTATION:
        return log.poses[:, 2], log.twists[:, 2]
    if log.task.kind is TaskKind.LATERAL_TRANSLATION:
        return log.poses[:, 1], log.twists[:, 1]
    return log.poses[:, 0], log.twists[:, 0]


def _handle_z_torques(log: TrialLog, length: float, width: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-handle contributions to the sensed z-torque (the two 'actuators')."""
    w = log.wrenches
    left = -w[:, 0] * width / 2 - w[:, 1] * length / 2
    right = w[:, 3] * width / 2 - w[:, 4] * length / 2
    return left, right


def score_trial(log: TrialLog, mass: float = 10.3, length: float = 1.22,
                width: float = 0.59) -> MetricsReport:
    """Compute the full metric set for one trial log."""
    log.validate()
    pos, vel = _displacement_channel(log)
    target = pos[0] + log.task.sign * log.task.magnitude
    tc = completion_time(log.times, pos, float(pos[0]), float(target))
    mj = mje_against_min_jerk(log.times, pos)
    tau_z = log.torques[:, 2]
    tz_left, tz_right = _handle_z_torques(log, length, width)
    accel_x = log.accels[:, 0]
    fx_total = log.wrenches[:, 0] + log.wrenches[:, 3]
    fi_x = fx_total - mass * accel_x
    return MetricsReport(
        controller=log.controller,
        task_kind=log.task.kind.value,
        completed=log.completed and tc is not None,
        completion_time=tc,
        mj_error=mj,
        mtm=mtm(tau_z, log.dt),
        torque_change=torque_change(tz_left, tz_right, log.dt),
        peak_velocity=float(np.max(np.abs(log.twists[:, 1]))),
        avg_velocity=float(np.mean(np.abs(log.twists[:, 1]))),
        peak_angular_velocity=float(np.max(np.abs(log.twists[:, 2]))),
        avg_angular_velocity=float(np.mean(np.abs(log.twists[:, 2]))),
        plateau_lateral=plateau_speed(log.twists[:, 1], log.dt),
        plateau_angular=plateau_speed(log.twists[:, 2], log.dt),
        mean_interaction_force=float(np.mean(np.abs(fi_x))),
        saturation_steps=int(np.sum(log.saturated)),
    )


def summary_table(reports: list[MetricsReport]) -> list[dict]:
    """Comparison rows shaped like the published table.

    Measured controller means fill the EVIC/NNPC columns where runs exist;
    the human-dyad columns always carry the fixtures.
    """
    task_names = {
        TaskKind.PLANAR_ROTATION.value: "rotation",
        TaskKind.LATERAL_TRANSLATION.value: "translation",
    }
    rows = []
    for (metric, task), baseline in CONTROLLER_BASELINES.items():
        row = {"metric": metric, "task": task,
               "blind_hhi": baseline[0], "evic": baseline[1],
               "nnpc": baseline[2], "sighted_hhi": baseline[3],
               "evic_measured": None, "nnpc_measured": None}
        for col in ("evic", "nnpc"):
            vals = []
            for r in reports:
                if r.controller != col or task_names.get(r.task_kind) != task:
                    continue
                value = {"completion_time": r.completion_time,
                         "mj_error": r.mj_error, "mtm": r.mtm}[metric]
                if value is not None:
                    vals.append(value)
            if vals:
                row[f"{col}_measured"] = float(np.mean(vals))
        rows.append(row)
    return rows


def write_summary_csv(reports: list[MetricsReport], path: str | Path) -> None:
    rows = summary_table(reports)
    fields = ["metric", "task", "blind_hhi", "evic", "nnpc", "sighted_hhi",
              "evic_measured", "nnpc_measured"]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if row[k] is None else repr(row[k])
                                 if isinstance(row[k], float) else row[k])
                             for k in fields})
