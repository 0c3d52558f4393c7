import json
import math

import numpy as np
import pytest

from comanip.dynamics import TableGeometry, TableState, ValidationError, board_torques
from comanip.leader import (
    CruiseReference,
    Direction,
    LeaderGains,
    TaskKind,
    TaskSpec,
    TriggerProfile,
    leader_step,
    minimum_jerk,
    minimum_jerk_velocity,
    task_reference,
    trigger_torques,
)

GEOM = TableGeometry()
PROFILE = TriggerProfile()


def lateral_task(magnitude=2.0, direction=Direction.LEFT):
    return TaskSpec(kind=TaskKind.LATERAL_TRANSLATION, direction=direction,
                    magnitude=magnitude, duration=8.0)


def rotation_task(magnitude=math.pi / 2, direction=Direction.RIGHT):
    return TaskSpec(kind=TaskKind.PLANAR_ROTATION, direction=direction,
                    magnitude=magnitude, duration=6.0)


class TestMinimumJerk:
    def test_boundaries_exact(self):
        assert minimum_jerk(1.0, 3.0, 0.0, 0.0, 5.0) == 1.0
        assert minimum_jerk(1.0, 3.0, 5.0, 0.0, 5.0) == 3.0

    def test_midpoint_exact(self):
        assert minimum_jerk(1.0, 3.0, 2.5, 0.0, 5.0) == 2.0

    def test_rejects_bad_interval(self):
        with pytest.raises(ValidationError):
            minimum_jerk(0, 1, 0, 2.0, 2.0)

    def test_endpoint_velocity_and_acceleration_vanish(self):
        x0, xf, T = 0.0, 2.0, 5.0
        h = 1e-4
        peak_v = 1.875 * (xf - x0) / T

        def vel(t):
            return (minimum_jerk(x0, xf, t + h, 0, T)
                    - minimum_jerk(x0, xf, t - h, 0, T)) / (2 * h)

        def acc(t):
            return (minimum_jerk(x0, xf, t + h, 0, T) - 2 * minimum_jerk(x0, xf, t, 0, T)
                    + minimum_jerk(x0, xf, t - h, 0, T)) / h**2

        # finite differences straddle the clamped boundary, so probe just inside
        for t in (h, T - h):
            assert abs(vel(t)) < 1e-6 * peak_v + 1e-6
            assert abs(acc(t)) < 1e-3  # second difference noise floor at h=1e-4
        assert abs(vel(T / 2)) == pytest.approx(peak_v, rel=1e-6)

    def test_velocity_profile_is_bell_shaped(self):
        T = 4.0
        ts = np.linspace(0.01, T - 0.01, 399)
        vs = [minimum_jerk_velocity(0, 1, t, 0, T) for t in ts]
        peak_idx = int(np.argmax(vs))
        assert ts[peak_idx] == pytest.approx(T / 2, abs=0.02)
        # single interior maximum: strictly increasing then strictly decreasing
        assert all(vs[i] < vs[i + 1] for i in range(peak_idx))
        assert all(vs[i] > vs[i + 1] for i in range(peak_idx, len(vs) - 1))

    def test_analytic_velocity_matches_differences(self):
        for t in (0.7, 1.9, 3.3):
            h = 1e-6
            fd = (minimum_jerk(0, 2, t + h, 0, 5) - minimum_jerk(0, 2, t - h, 0, 5)) / (2 * h)
            assert minimum_jerk_velocity(0, 2, t, 0, 5) == pytest.approx(fd, rel=1e-6)


class TestCruiseReference:
    def test_endpoints_and_duration(self):
        ref = CruiseReference(distance=2.0, speed=0.35, ramp_time=1.2)
        assert ref.position(0.0) == 0.0
        assert ref.position(ref.duration) == pytest.approx(2.0)
        assert ref.velocity(ref.duration / 2) == pytest.approx(0.35)
        # ramps cover v*tr of distance, cruise the rest
        assert ref.duration == pytest.approx(2 * 1.2 + (2.0 - 0.35 * 1.2) / 0.35)

    def test_too_short_rejected(self):
        with pytest.raises(ValidationError):
            CruiseReference(distance=0.1, speed=0.35, ramp_time=1.2)

    def test_position_is_velocity_integral(self):
        ref = CruiseReference(distance=2.0, speed=0.35, ramp_time=1.2)
        ts = np.linspace(0, ref.duration, 2000)
        vs = np.array([ref.velocity(t) for t in ts])
        pos_num = np.concatenate([[0], np.cumsum((vs[1:] + vs[:-1]) / 2 * np.diff(ts))])
        pos = np.array([ref.position(t) for t in ts])
        assert np.max(np.abs(pos - pos_num)) < 1e-4


class TestTriggerTorques:
    def test_trials_start_quiet(self):
        assert trigger_torques(PROFILE, lateral_task(), 0.0) == (0.0, 0.0)
        assert trigger_torques(PROFILE, rotation_task(), 0.0) == (0.0, 0.0)

    def test_left_translation_at_rise_time(self):
        tz, tx = trigger_torques(PROFILE, lateral_task(), PROFILE.rise_time)
        assert tz == pytest.approx(-4.0)
        assert tx == pytest.approx(2.0)

    def test_right_translation_mirrors(self):
        tz, tx = trigger_torques(PROFILE, lateral_task(direction=Direction.RIGHT),
                                 PROFILE.rise_time)
        assert (tz, tx) == pytest.approx((4.0, -2.0))

    def test_rotation_holds_z_torque_flat(self):
        # flat for at least a second before diverging
        for t in (0.2, 0.5, 0.9, 1.0):
            tz, _ = trigger_torques(PROFILE, rotation_task(), t)
            assert abs(tz) <= 0.2

    def test_rotation_x_torque_divides_after_split(self):
        _, tx_early = trigger_torques(PROFILE, rotation_task(), 0.5)
        assert tx_early == 0.0
        _, tx_late = trigger_torques(PROFILE, rotation_task(), 2.0)
        assert tx_late == pytest.approx(2.0)
        _, tx_cw = trigger_torques(PROFILE, rotation_task(direction=Direction.LEFT), 2.0)
        assert tx_cw == pytest.approx(-2.0)

    def test_rotation_late_z_drift_stays_under_threshold(self):
        for t in np.linspace(0, 10, 101):
            tz, _ = trigger_torques(PROFILE, rotation_task(), float(t))
            assert abs(tz) < 3.0

    def test_amplitudes_exceed_thresholds(self):
        assert PROFILE.tau_z_amp > 3.0
        assert PROFILE.tau_x_amp > 1.5


class TestLeaderStep:
    def test_on_reference_zero_knobs_zero_wrench(self):
        gains = LeaderGains(weight_share=0.0, anterior_bias=0.0)
        task = lateral_task()
        w, sat = leader_step(TableState(), task, PROFILE, gains, 0.0, GEOM)
        assert not sat
        assert w.left == (0.0, 0.0, 0.0)
        assert w.right == (0.0, 0.0, 0.0)

    def test_pure_z_torque_demand_splits_anterior_pair(self):
        # a -0.59 N*m sensed z-torque demand with no other forces becomes
        # a (+1, -1) anterior pair across the handles
        gains = LeaderGains(weight_share=0.0, anterior_bias=0.0)
        profile = TriggerProfile(tau_z_amp=0.59, tau_x_amp=2.0)
        task = lateral_task()
        ref = task_reference(task, gains)
        t = 1.5  # fully risen trigger, cruising
        state = TableState(y=ref.displacement(t), vy=ref.rate(t))
        w, _ = leader_step(state, task, profile, gains, t, GEOM)
        assert w.left[0] == pytest.approx(1.0, abs=1e-9)
        assert w.right[0] == pytest.approx(-1.0, abs=1e-9)

    def test_sensed_torques_track_references_exactly(self):
        gains = LeaderGains()
        task = lateral_task()
        for t, state in [
            (0.2, TableState()),
            (0.6, TableState(y=0.03, vy=0.1)),
            (2.0, TableState(y=0.5, vy=0.35, x=0.01)),
        ]:
            w, _ = leader_step(state, task, PROFILE, gains, t, GEOM)
            tz_ref, tx_ref = trigger_torques(PROFILE, task, t)
            sensed = board_torques(w, GEOM)
            # far from the goal the envelope is fully open
            assert sensed[2] == pytest.approx(tz_ref, abs=1e-9)
            assert sensed[0] == pytest.approx(tx_ref, abs=1e-9)

    def test_weight_share_appears_in_vertical_channels(self):
        gains = LeaderGains(weight_share=0.5, anterior_bias=0.0)
        w, _ = leader_step(TableState(), lateral_task(), PROFILE, gains, 0.0, GEOM)
        total_fz = w.left[2] + w.right[2]
        assert total_fz == pytest.approx(0.5 * 10.3 * 9.81)

    def test_saturation_clamps_and_flags(self):
        gains = LeaderGains(kp=10000.0)
        state = TableState(y=-5.0)  # huge error
        w, sat = leader_step(state, lateral_task(), PROFILE, gains, 2.0, GEOM)
        assert sat
        for v in (*w.left, *w.right):
            assert abs(v) <= GEOM.force_saturation

    def test_envelope_cuts_triggers_near_goal(self):
        gains = LeaderGains()
        task = lateral_task()
        # board essentially at the target, at rest, reference finished
        state = TableState(y=task.magnitude - 0.01)
        w, _ = leader_step(state, task, PROFILE, gains, 60.0, GEOM)
        sensed = board_torques(w, GEOM)
        assert abs(sensed[2]) < 0.5
        assert abs(sensed[0]) < 0.5


class TestTaskSpec:
    def test_json_round_trip(self):
        task = rotation_task()
        again = TaskSpec.from_dict(json.loads(json.dumps(task.to_dict())))
        assert again == task

    def test_validation(self):
        with pytest.raises(ValidationError):
            TaskSpec(kind=TaskKind.LATERAL_TRANSLATION, direction=Direction.LEFT,
                     magnitude=-1.0, duration=5.0)

    def test_direction_signs(self):
        assert lateral_task(direction=Direction.LEFT).sign == 1.0
        assert lateral_task(direction=Direction.RIGHT).sign == -1.0
        assert rotation_task(direction=Direction.RIGHT).sign == 1.0  # ccw
        assert rotation_task(direction=Direction.LEFT).sign == -1.0  # cw
