"""Follower control laws: force-rate admittance, torque triggers, prediction.

Three ways to turn what the follower senses into a commanded base twist:

* BMVIC: a variable-impedance admittance per Cartesian axis plus a torque
  twin for planar rotation. Velocity grows where force and its rate agree.
* EVIC: the same admittance on the anterior axis only, with a five-way
  torque-threshold trigger choosing lateral translation or planar rotation
  at fixed target speeds.
* NNPC: a predicted table twist carried to the robot frame through the
  transport theorem and clamped per axis.

All controllers are single-caller state machines stepped at a fixed rate,
and every emitted command is clamped to the per-axis velocity limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .dynamics import ValidationError
from .signals import Biquad, FilterSpec


class Mode(str, Enum):
    LEFT_TRANSLATION = "left_translation"
    RIGHT_TRANSLATION = "right_translation"
    LEFT_ROTATION = "left_rotation"
    RIGHT_ROTATION = "right_rotation"
    STOP = "stop"
    ANTERIOR = "anterior"
    BMVIC = "bmvic"
    NNPC = "nnpc"


@dataclass(frozen=True)
class VicParams:
    """Virtual admittance parameters (translation triple, rotation triple)."""

    mass: float = 1.2       # virtual mass
    damping: float = 0.6    # c
    weight: float = 0.2     # alpha, force-rate weighting
    inertia: float = 0.12   # virtual inertia
    rot_damping: float = 0.6
    rot_weight: float = 0.2  # beta, torque-rate weighting

    def __post_init__(self) -> None:
        if self.mass <= 0 or self.inertia <= 0:
            raise ValidationError("virtual mass and inertia must be positive")
        if self.damping <= 0 or self.rot_damping <= 0:
            raise ValidationError("virtual damping must be positive")
        if self.weight < 0 or self.rot_weight < 0:
            raise ValidationError("rate weights must be non-negative")


@dataclass(frozen=True)
class EvicParams:
    """Thresholds, target speeds and ramp limits for the trigger controller."""

    tau_z_threshold: float = 3.0   # N*m
    tau_x_threshold: float = 1.5   # N*m
    lateral_speed: float = 0.35    # m/s target once triggered
    rotation_speed: float = 0.4    # rad/s target once triggered
    lateral_accel: float = 0.5     # m/s^2 ramp limit
    rotation_accel: float = 0.6    # rad/s^2 ramp limit
    debounce: float = 0.1          # s a new classification must persist

    def __post_init__(self) -> None:
        for name in ("tau_z_threshold", "tau_x_threshold", "lateral_speed",
                     "rotation_speed", "lateral_accel", "rotation_accel"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive")


@dataclass(frozen=True)
class VelocityLimits:
    """Per-axis command bounds, set just above the trigger target speeds."""

    vx: float = 0.5    # m/s anterior
    vy: float = 0.45   # m/s lateral
    wz: float = 0.5    # rad/s


@dataclass(frozen=True)
class ControlCommand:
    """Desired planar twist of the follower base, in the robot frame."""

    vx: float = 0.0
    vy: float = 0.0
    wz: float = 0.0
    mode: Mode = Mode.STOP


STOP_COMMAND = ControlCommand()


def clamp(value: float, bound: float) -> float:
    return max(-bound, min(bound, value))


def clamp_command(vx: float, vy: float, wz: float, mode: Mode,
                  limits: VelocityLimits) -> ControlCommand:
    return ControlCommand(vx=clamp(vx, limits.vx), vy=clamp(vy, limits.vy),
                          wz=clamp(wz, limits.wz), mode=mode)


def bmvic_step(force: float, force_rate: float, velocity: float,
               params: VicParams, dt: float, rotational: bool = False) -> float:
    """One admittance update: solve the virtual model for acceleration.

    F = m*a + c*v - alpha*Fdot*v, so a = (F - c*v + alpha*Fdot*v) / m, then
    explicit Euler on v. The rotational twin swaps in (I, b, beta).
    """
    if not (dt > 0):
        raise ValidationError(f"dt must be positive, got {dt}")
    if rotational:
        m, c, a = params.inertia, params.rot_damping, params.rot_weight
    else:
        m, c, a = params.mass, params.damping, params.weight
    accel = (force - c * velocity + a * force_rate * velocity) / m
    return velocity + accel * dt


def evic_classify(tau_z: float, tau_x: float, params: EvicParams) -> Mode:
    """Five-way torque-threshold decision.

    z-torque carries direction of travel, x-torque separates translation from
    rotation; thresholds are centered around zero. Anything outside the four
    listed sign patterns commands no lateral or rotational motion.
    """
    tz_th = params.tau_z_threshold
    tx_th = params.tau_x_threshold
    if tau_z <= -tz_th and tau_x >= tx_th:
        return Mode.LEFT_TRANSLATION
    if abs(tau_z) <= tz_th and tau_x >= tx_th:
        return Mode.RIGHT_ROTATION
    if abs(tau_z) <= tz_th and tau_x <= -tx_th:
        return Mode.LEFT_ROTATION
    if tau_z >= tz_th and tau_x <= -tx_th:
        return Mode.RIGHT_TRANSLATION
    return Mode.STOP


def ramp_toward(current: float, target: float, rate: float, dt: float) -> float:
    """Move current toward target, never faster than rate per second."""
    step = rate * dt
    if current < target:
        return min(current + step, target)
    return max(current - step, target)


def transport_velocity(v_rel: tuple[float, float], wz: float,
                       p: tuple[float, float]) -> tuple[float, float]:
    """Carry a twist from the table frame to a point offset by p.

    v_r = v_rel + w x p for planar motion; the two frames do not rotate
    relative to each other, so no additional rotation is applied.
    """
    return (v_rel[0] - wz * p[1], v_rel[1] + wz * p[0])


def nnpc_step(prediction: tuple[float, float, float] | None,
              p: tuple[float, float], limits: VelocityLimits) -> ControlCommand:
    """Map a predicted table twist (vx, vy, wz) to a clamped base command.

    A missing prediction (cold history window) fails safe to Stop.
    """
    if prediction is None:
        return STOP_COMMAND
    vx, vy, wz = prediction
    if not all(math.isfinite(v) for v in (vx, vy, wz)):
        return STOP_COMMAND
    vrx, vry = transport_velocity((vx, vy), wz, p)
    return clamp_command(vrx, vry, wz, Mode.NNPC, limits)


class _RateEstimator:
    """20 Hz low-pass then first difference; the measured-rate convention."""

    def __init__(self, sample_rate: float, cutoff: float = 20.0) -> None:
        self._filter = Biquad(FilterSpec(cutoff=cutoff, sample_rate=sample_rate))
        self._prev: float | None = None

    def update(self, raw: float, dt: float) -> tuple[float, float]:
        filtered = self._filter.process(raw)
        rate = 0.0 if self._prev is None else (filtered - self._prev) / dt
        self._prev = filtered
        return filtered, rate


class BmvicController:
    """Per-axis admittance on (Fx, Fy) plus the torque model on tau_z."""

    def __init__(self, params: VicParams | None = None,
                 limits: VelocityLimits | None = None,
                 sample_rate: float = 500.0) -> None:
        self.params = params or VicParams()
        self.limits = limits or VelocityLimits()
        self.vx = self.vy = self.wz = 0.0
        self._fx = _RateEstimator(sample_rate)
        self._fy = _RateEstimator(sample_rate)
        self._tz = _RateEstimator(sample_rate)

    def update(self, fx: float, fy: float, tau_z: float, dt: float) -> ControlCommand:
        if not all(math.isfinite(v) for v in (fx, fy, tau_z)):
            self.vx = self.vy = self.wz = 0.0
            return STOP_COMMAND
        fx_f, fx_r = self._fx.update(fx, dt)
        fy_f, fy_r = self._fy.update(fy, dt)
        tz_f, tz_r = self._tz.update(tau_z, dt)
        # internal states are clamped too, so a saturated command cannot wind up
        self.vx = clamp(bmvic_step(fx_f, fx_r, self.vx, self.params, dt), self.limits.vx)
        self.vy = clamp(bmvic_step(fy_f, fy_r, self.vy, self.params, dt), self.limits.vy)
        self.wz = clamp(bmvic_step(tz_f, tz_r, self.wz, self.params, dt, rotational=True),
                        self.limits.wz)
        return clamp_command(self.vx, self.vy, self.wz, Mode.BMVIC, self.limits)


class EvicController:
    """Anterior admittance plus debounced torque triggers for (vy, wz).

    The raw classification must persist for the debounce interval before the
    active mode switches, so threshold chatter cannot flap the base.
    """

    def __init__(self, params: EvicParams | None = None,
                 vic: VicParams | None = None,
                 limits: VelocityLimits | None = None,
                 sample_rate: float = 500.0) -> None:
        self.params = params or EvicParams()
        self.vic = vic or VicParams()
        self.limits = limits or VelocityLimits()
        self.mode = Mode.STOP
        self.vx = self.vy = self.wz = 0.0
        self._t = 0.0
        self._pending: Mode | None = None
        self._pending_since = 0.0
        self._fx = _RateEstimator(sample_rate)
        self._tz_filter = Biquad(FilterSpec(cutoff=20.0, sample_rate=sample_rate))
        self._tx_filter = Biquad(FilterSpec(cutoff=20.0, sample_rate=sample_rate))

    def _debounced(self, raw: Mode) -> Mode:
        if raw == self.mode:
            self._pending = None
            return self.mode
        if raw != self._pending:
            self._pending = raw
            self._pending_since = self._t
        if self._t - self._pending_since >= self.params.debounce:
            self.mode = raw
            self._pending = None
        return self.mode

    def _targets(self) -> tuple[float, float]:
        p = self.params
        if self.mode is Mode.LEFT_TRANSLATION:
            return (p.lateral_speed, 0.0)
        if self.mode is Mode.RIGHT_TRANSLATION:
            return (-p.lateral_speed, 0.0)
        if self.mode is Mode.RIGHT_ROTATION:
            return (0.0, p.rotation_speed)
        if self.mode is Mode.LEFT_ROTATION:
            return (0.0, -p.rotation_speed)
        return (0.0, 0.0)

    def update(self, fx: float, tau_z: float, tau_x: float, dt: float) -> ControlCommand:
        if not all(math.isfinite(v) for v in (fx, tau_z, tau_x)):
            self.vx = self.vy = self.wz = 0.0
            return STOP_COMMAND
        self._t += dt
        tz = self._tz_filter.process(tau_z)
        tx = self._tx_filter.process(tau_x)
        self._debounced(evic_classify(tz, tx, self.params))

        fx_f, fx_r = self._fx.update(fx, dt)
        vx_raw = bmvic_step(fx_f, fx_r, self.vx, self.vic, dt)
        self.vx = clamp(ramp_toward(self.vx, vx_raw, self.params.lateral_accel, dt),
                        self.limits.vx)

        vy_target, wz_target = self._targets()
        self.vy = ramp_toward(self.vy, vy_target, self.params.lateral_accel, dt)
        self.wz = ramp_toward(self.wz, wz_target, self.params.rotation_accel, dt)
        return clamp_command(self.vx, self.vy, self.wz, self.mode, self.limits)


class NnpcController:
    """Wraps an intent predictor into the command loop.

    The predictor owns the motion history window; this class only schedules
    rollouts (they are costly) and converts the chosen predicted twist into a
    base command. Between rollouts the last command is held.
    """

    def __init__(self, predictor, p_offset: tuple[float, float],
                 limits: VelocityLimits | None = None,
                 update_period: float = 0.05) -> None:
        self.predictor = predictor
        self.p_offset = p_offset
        self.limits = limits or VelocityLimits()
        self.update_period = update_period
        self._last = STOP_COMMAND
        self._next_update = 0.0
        self._t = 0.0

    def observe(self, motion_sample) -> None:
        """Push one table-frame motion sample (on the sensor clock)."""
        self.predictor.push(motion_sample)

    def update(self, dt: float) -> ControlCommand:
        self._t += dt
        if not self.predictor.warm:
            self._last = STOP_COMMAND
            return self._last
        if self._t >= self._next_update:
            self._next_update = self._t + self.update_period
            twist = self.predictor.predict_twist()
            self._last = nnpc_step(twist, self.p_offset, self.limits)
        return self._last
