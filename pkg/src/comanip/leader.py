"""Synthetic leader: task references, torque triggers, handle force synthesis.

The leader stands in for the human end of the dyad. It tracks a task
reference (minimum jerk for point-to-point moves, a steady 0.35 m/s cruise
for long translations), and it shapes its handle forces so the torques the
follower senses reproduce the signatures real leaders produce: translation
announces itself with a fast z-torque ramp, rotation holds z-torque flat and
splits on x-torque around three quarters of a second in.

Sign conventions. Left translation is +y and is announced by negative
z-torque with positive x-torque; right translation mirrors both. Left
rotation is clockwise (negative wz, negative x-torque); right rotation is
counterclockwise. These match the follower's trigger decision table.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from enum import Enum

from .dynamics import HandleWrench, TableGeometry, TableState, ValidationError
from .signals import GRAVITY


class TaskKind(str, Enum):
    LATERAL_TRANSLATION = "lateral_translation"
    PLANAR_ROTATION = "planar_rotation"
    ANTERIOR_TRANSLATION = "anterior_translation"


class Direction(str, Enum):
    LEFT = "left"    # +y translation, clockwise rotation, +x anterior
    RIGHT = "right"  # -y translation, counterclockwise rotation, -x anterior


@dataclass(frozen=True)
class TaskSpec:
    """One scripted point-to-point or cruise move for the dyad."""

    kind: TaskKind
    direction: Direction
    magnitude: float          # m for translations, rad for rotations
    duration: float           # s, nominal; cruise tasks derive their own
    start_pose: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        if self.magnitude <= 0:
            raise ValidationError("task magnitude must be positive")
        if self.duration <= 0:
            raise ValidationError("task duration must be positive")

    @property
    def sign(self) -> float:
        if self.kind is TaskKind.PLANAR_ROTATION:
            return -1.0 if self.direction is Direction.LEFT else 1.0
        return 1.0 if self.direction is Direction.LEFT else -1.0

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "direction": self.direction.value,
            "magnitude": self.magnitude,
            "duration": self.duration,
            "start_pose": list(self.start_pose),
        }

    @staticmethod
    def from_dict(d: dict) -> "TaskSpec":
        return TaskSpec(
            kind=TaskKind(d["kind"]),
            direction=Direction(d["direction"]),
            magnitude=float(d["magnitude"]),
            duration=float(d["duration"]),
            start_pose=tuple(d.get("start_pose", (0.0, 0.0, 0.0))),
        )


def minimum_jerk(x0: float, xf: float, t: float, t0: float, tf: float) -> float:
    """Quintic point-to-point position at time t.

    x(t) = x0 + (xf - x0)(10 th^3 - 15 th^4 + 6 th^5) with th normalized to
    [0, 1]; t outside [t0, tf] holds the nearest endpoint.
    """
    if tf <= t0:
        raise ValidationError("minimum_jerk requires tf > t0")
    th = (t - t0) / (tf - t0)
    th = min(max(th, 0.0), 1.0)
    s = th * th * th * (10.0 - 15.0 * th + 6.0 * th * th)
    return x0 + (xf - x0) * s


def minimum_jerk_velocity(x0: float, xf: float, t: float, t0: float, tf: float) -> float:
    """Analytic time derivative of the quintic profile (zero outside the move)."""
    if tf <= t0:
        raise ValidationError("minimum_jerk requires tf > t0")
    th = (t - t0) / (tf - t0)
    if th < 0.0 or th > 1.0:
        return 0.0
    ds = 30.0 * th * th - 60.0 * th**3 + 30.0 * th**4
    return (xf - x0) * ds / (tf - t0)


def _smoothstep(u: float) -> float:
    u = min(max(u, 0.0), 1.0)
    return u * u * (3.0 - 2.0 * u)


def _smoothstep_integral(u: float) -> float:
    u = min(max(u, 0.0), 1.0)
    return u**3 - 0.5 * u**4


@dataclass(frozen=True)
class CruiseReference:
    """Ramp to a steady speed, hold, ramp out; total travel = distance."""

    distance: float
    speed: float
    ramp_time: float

    def __post_init__(self) -> None:
        if self.distance < self.speed * self.ramp_time:
            raise ValidationError("distance too short for a cruise segment")

    @property
    def duration(self) -> float:
        ramp_dist = self.speed * self.ramp_time  # both ramps together
        return 2 * self.ramp_time + (self.distance - ramp_dist) / self.speed

    def velocity(self, t: float) -> float:
        total = self.duration
        if t <= 0 or t >= total:
            return 0.0
        if t < self.ramp_time:
            return self.speed * _smoothstep(t / self.ramp_time)
        if t > total - self.ramp_time:
            return self.speed * _smoothstep((total - t) / self.ramp_time)
        return self.speed

    def position(self, t: float) -> float:
        total = self.duration
        if t <= 0:
            return 0.0
        if t >= total:
            return self.distance
        ramp_dist = self.speed * self.ramp_time / 2
        if t < self.ramp_time:
            return self.speed * self.ramp_time * _smoothstep_integral(t / self.ramp_time)
        if t > total - self.ramp_time:
            back = self.speed * self.ramp_time * _smoothstep_integral((total - t) / self.ramp_time)
            return self.distance - back
        return ramp_dist + self.speed * (t - self.ramp_time)


@dataclass(frozen=True)
class TriggerProfile:
    """Shape parameters for the announced torque signatures.

    Amplitudes sit above the follower's thresholds (3.0 / 1.5 N*m) so the
    triggers are reachable; rotation keeps z-torque flat for at least a
    second and lets x-torque divide near 0.75 s, translation ramps both
    within the rise time.
    """

    tau_z_amp: float = 4.0          # N*m, translation z-torque amplitude
    tau_x_amp: float = 2.0          # N*m, x-torque amplitude
    rise_time: float = 0.4          # s, translation ramp
    divergence_time: float = 0.75   # s, rotation x-torque split point
    rotation_hold: float = 1.0      # s, rotation z-torque flat period
    rotation_tau_z_amp: float = 2.2  # N*m, sub-threshold swing seed
    rotation_seed_rise: float = 0.8  # s, seed ramp after the hold
    rotation_rise: float = 0.5      # s, rotation x-torque ramp after the split

    def __post_init__(self) -> None:
        if self.tau_z_amp <= 0 or self.tau_x_amp <= 0:
            raise ValidationError("trigger amplitudes must be positive")


def trigger_torques(profile: TriggerProfile, task: TaskSpec,
                    t: float) -> tuple[float, float]:
    """Reference (tau_z, tau_x) the leader wants the follower to sense at t."""
    if t <= 0:
        return (0.0, 0.0)
    if task.kind is TaskKind.PLANAR_ROTATION:
        # counterclockwise (right): tau_x positive; clockwise (left): negative
        sx = 1.0 if task.direction is Direction.RIGHT else -1.0
        tau_x = sx * profile.tau_x_amp * _smoothstep(
            (t - profile.divergence_time) / profile.rotation_rise)
        tau_z = sx * profile.rotation_tau_z_amp * _smoothstep(
            (t - profile.rotation_hold) / profile.rotation_seed_rise)
        return (tau_z, tau_x)
    if task.kind is TaskKind.LATERAL_TRANSLATION:
        # left: tau_z toward -amp while tau_x diverges oppositely signed
        sz = -1.0 if task.direction is Direction.LEFT else 1.0
        u = _smoothstep(t / profile.rise_time)
        return (sz * profile.tau_z_amp * u, -sz * profile.tau_x_amp * u)
    return (0.0, 0.0)  # anterior moves carry no lateral/rotation intent


@dataclass(frozen=True)
class LeaderGains:
    """PD tracking gains and the constant biases the leader carries."""

    kp: float = 60.0            # N/m
    kd: float = 25.0            # N*s/m
    pos_error_clamp: float = 0.10  # m, cap on the tracked position error
    cruise_speed: float = 0.35  # m/s, steady translation speed
    rotation_speed: float = 0.4  # rad/s
    ramp_time: float = 1.6      # s, cruise ramp for translations
    rotation_ramp: float = 1.1  # s
    ref_delay: float = 0.45     # s, reference waits for the trigger to develop
    rotation_ref_delay: float = 1.3
    weight_share: float = 0.5   # leader fraction of the board weight
    anterior_bias: float = 2.0  # N, standing interaction force
    stop_lead: float = 0.12     # s, braking anticipation beyond v^2/2a
    stop_margin: float = 0.02   # m or rad, added to the braking reach
    taper_width: float = 0.03   # m or rad, smooth trigger fade
    twist_damping: float = 18.0  # N*m*s/rad against board spin when not rotating


@dataclass(frozen=True)
class _Reference:
    """Resolved reference for one task: displacement channel over time.

    The profile starts after a short delay so the dyad has time to develop
    and recognize the trigger before the leader expects any motion.
    """

    cruise: CruiseReference | None
    task: TaskSpec
    delay: float = 0.0

    @property
    def duration(self) -> float:
        base = self.cruise.duration if self.cruise else self.task.duration
        return base + self.delay

    def progress(self, t: float) -> float:
        """Unsigned travel along the displacement channel."""
        t = t - self.delay
        if self.cruise:
            return self.cruise.position(t)
        return minimum_jerk(0.0, self.task.magnitude, t, 0.0, self.task.duration)

    def speed(self, t: float) -> float:
        t = t - self.delay
        if self.cruise:
            return self.cruise.velocity(t)
        if t < 0:
            return 0.0
        return minimum_jerk_velocity(0.0, self.task.magnitude, t, 0.0,
                                     self.task.duration)

    def displacement(self, t: float) -> float:
        return self.task.sign * self.progress(t)

    def rate(self, t: float) -> float:
        return self.task.sign * self.speed(t)


@functools.lru_cache(maxsize=64)
def task_reference(task: TaskSpec, gains: LeaderGains) -> _Reference:
    """Cruise reference when the move is long enough, minimum jerk otherwise."""
    if task.kind is TaskKind.ANTERIOR_TRANSLATION:
        return _Reference(cruise=None, task=task, delay=gains.ref_delay)
    rotation = task.kind is TaskKind.PLANAR_ROTATION
    speed = gains.rotation_speed if rotation else gains.cruise_speed
    ramp = gains.rotation_ramp if rotation else gains.ramp_time
    delay = gains.rotation_ref_delay if rotation else gains.ref_delay
    if task.magnitude >= speed * ramp * 1.25:
        return _Reference(cruise=CruiseReference(task.magnitude, speed, ramp),
                          task=task, delay=delay)
    return _Reference(cruise=None, task=task, delay=delay)


def _braking_reach(speed: float, decel: float, gains: LeaderGains) -> float:
    """Distance the follower still covers once the leader stops signaling."""
    return speed * speed / (2.0 * decel) + abs(speed) * gains.stop_lead + gains.stop_margin


def _trigger_envelope(remaining: float, speed: float, decel: float,
                      gains: LeaderGains) -> float:
    """Gate on the announced torques: 1 while driving, fading to 0 to stop.

    Keyed on the board's remaining travel against the follower's braking
    reach at the current speed, so the stop lands near the goal regardless
    of how far the board leads or lags the reference. An undershoot beyond
    the fade width simply re-opens the envelope and re-triggers a shorter
    pulse; successive pulses shrink the residual below the fade width, where
    the leader trims the rest through the grasp. Memoryless by design.
    """
    reach = _braking_reach(speed, decel, gains)
    return _smoothstep((remaining - reach) / gains.taper_width)


def leader_step(state: TableState, task: TaskSpec, profile: TriggerProfile,
                gains: LeaderGains, t: float,
                geom: TableGeometry | None = None) -> tuple[HandleWrench, bool]:
    """Handle forces for one control step. Returns (wrench, saturation_flag).

    Planar PD tracks the task reference, the announced torques are realized
    exactly by force differentials across the two handles (inverting the
    torque map), and the vertical channels carry the leader's share of the
    board weight.
    """
    geom = geom or TableGeometry()
    x0, y0, th0 = task.start_pose
    ref = task_reference(task, gains)
    tau_z_ref, tau_x_ref = trigger_torques(profile, task, t)

    def clip_err(e: float) -> float:
        return min(max(e, -gains.pos_error_clamp), gains.pos_error_clamp)

    # The leader holds its own end of the board, not the abstract center:
    # lateral tracking acts on the handle-end line, so any unintended board
    # rotation sweeps the end off the line and the correction force, acting
    # through the half-length moment arm, reacts the standing trigger couple.
    l2_arm = geom.length / 2.0
    y_end = state.y + math.sin(state.theta) * l2_arm
    vy_end = state.vy + state.wz * math.cos(state.theta) * l2_arm

    if task.kind is TaskKind.LATERAL_TRANSLATION:
        y_ref = y0 + ref.displacement(t)
        vy_ref = ref.rate(t)
        fy = gains.kp * clip_err(y_ref - y_end) + gains.kd * (vy_ref - vy_end)
        fx = gains.kp * clip_err(x0 - state.x) - gains.kd * state.vx + gains.anterior_bias
        remaining = max(task.sign * (y0 + task.sign * task.magnitude - state.y), 0.0)
        env = _trigger_envelope(remaining, state.vy, 0.5, gains)
    elif task.kind is TaskKind.PLANAR_ROTATION:
        # The leader kick-starts the swing (the z-torque seed is a real
        # planar torque), then rides along while the follower carries the
        # rotation; the seed fades with spin so a fast follower never gets
        # pushed past the target rate.
        fy = 0.0
        fx = gains.anterior_bias
        seed_fade = 1.0 - _smoothstep(abs(state.wz) / (0.5 * gains.rotation_speed))
        tau_z_ref *= seed_fade
        remaining = max(task.sign * (th0 + task.sign * task.magnitude - state.theta), 0.0)
        env = _trigger_envelope(remaining, state.wz, 0.6, gains)
    else:  # anterior translation
        x_ref = x0 + ref.displacement(t)
        vx_ref = ref.rate(t)
        fx = (gains.kp * clip_err(x_ref - state.x)
              + gains.kd * (vx_ref - state.vx) + gains.anterior_bias)
        fy = gains.kp * clip_err(y0 - y_end) - gains.kd * vy_end
        env = 1.0

    tau_z_ref *= env
    tau_x_ref *= env

    # For non-rotation moves the leader also wrings out any board spin: the
    # damping term rides on the announced torque and vanishes once the board
    # travels straight, so the sensed torque still settles onto the
    # reference. Without it a follower that does not anchor its heading lets
    # the standing trigger couple slowly wind the board around.
    if task.kind is not TaskKind.PLANAR_ROTATION:
        tau_z_ref -= gains.twist_damping * state.wz

    # Invert the torque map: choose handle differentials so the sensed
    # torques equal the references exactly, PD contribution included.
    l2 = geom.length / 2.0
    w2 = geom.width / 2.0
    diff_x = (tau_z_ref + fy * l2) / w2          # f_right_x - f_left_x
    diff_z = (tau_x_ref - fy * geom.depth) / w2  # f_left_z - f_right_z
    fz_share = gains.weight_share * geom.mass * GRAVITY

    wrench = HandleWrench(
        left=(fx / 2 - diff_x / 2, fy / 2, fz_share / 2 + diff_z / 2),
        right=(fx / 2 + diff_x / 2, fy / 2, fz_share / 2 - diff_z / 2),
    )
    return wrench.clamped(geom.force_saturation)
