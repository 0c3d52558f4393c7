"""Acceptance suite: every exit criterion at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS/FAIL line
per criterion. The intent-training criterion builds a 200-trial corpus and
runs the full 50-phase curriculum, so this module takes several minutes;
everything else is seconds.
"""

import dataclasses
import math
import time
import warnings
from contextlib import contextmanager

import numpy as np
import pytest

from comanip.controllers import EvicParams, Mode, VicParams, bmvic_step, evic_classify
from comanip.dynamics import BoardSim, HandleWrench, TableGeometry, TableState
from comanip.harness import BenchConfig, run_trial
from comanip.harness.corpus import synthesize_corpus
from comanip.intent import TrainingSchedule, load_corpus_dir, rollout_rmse, train
from comanip.intent.network import backward, forward_with_cache, mse
from comanip.intent.network import init_model as init_intent_model
from comanip.leader import Direction, TaskKind, TaskSpec, minimum_jerk
from comanip.metrics import (
    CONTROLLER_BASELINES,
    cohens_d,
    completion_time,
    mje,
    mtm,
    pearson,
    plateau_speed,
    torque_change,
    write_baseline_csv,
)

GEOM = TableGeometry()

TRANSLATION = TaskSpec(kind=TaskKind.LATERAL_TRANSLATION, direction=Direction.LEFT,
                       magnitude=2.0, duration=8.0)
ROTATION = TaskSpec(kind=TaskKind.PLANAR_ROTATION, direction=Direction.RIGHT,
                    magnitude=math.pi / 2, duration=8.0)


@contextmanager
def criterion(name: str):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"\nACCEPTANCE {name}: FAIL")
        raise
    print(f"\nACCEPTANCE {name}: PASS ({time.perf_counter() - start:.1f}s)")


# ---------------------------------------------------------------------------
# Shared expensive artifacts
# ---------------------------------------------------------------------------

@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        synthesize_corpus(out, n_trials=200, seed=2024)
    return out


@pytest.fixture(scope="session")
def trained_intent(corpus_dir):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        corpus = load_corpus_dir(corpus_dir)
    schedule = TrainingSchedule(phase0_threshold=0.01, phase0_max_iters=1800,
                                phase_iters=3, horizon=50,
                                learning_rate=2e-3, curriculum_lr=2e-4, seed=0)
    start = time.perf_counter()
    model, history = train(corpus, schedule, layers=2, hidden=32)
    elapsed = time.perf_counter() - start
    _, val = corpus.split(schedule.seed)
    result = rollout_rmse(model, corpus, val, horizon=50, n_windows=200, seed=1)
    return {"model": model, "corpus": corpus, "eval": result,
            "train_seconds": elapsed, "history": history}


@pytest.fixture(scope="session")
def evic_trials():
    cfg = BenchConfig(controller="evic", seed=1)
    out = {}
    for name, task in (("translation", TRANSLATION), ("rotation", ROTATION)):
        out[name] = run_trial(cfg, task)
    return out


# ---------------------------------------------------------------------------
# Criteria
# ---------------------------------------------------------------------------

class TestEvicDecisionTable:
    def test_exhaustive_grid_matches_truth_table(self):
        from test_controllers import TRUTH_TABLE

        with criterion("EVIC decision table (25/25 grid cells)"):
            start = time.perf_counter()
            params = EvicParams()
            checked = 0
            for (mz, mx), expected in TRUTH_TABLE.items():
                got = evic_classify(mz * params.tau_z_threshold,
                                    mx * params.tau_x_threshold, params)
                assert got is expected, (mz, mx, got, expected)
                checked += 1
            assert checked == 25
            assert time.perf_counter() - start < 1.0


class TestBmvicSteadyState:
    def test_constant_force_converges_to_force_over_damping(self):
        with criterion("BMVIC steady state (1.0 m/s within 1% by 10 s)"):
            start = time.perf_counter()
            params = VicParams()
            dt = 0.002
            v = 0.0
            for _ in range(int(10.0 / dt)):
                v = bmvic_step(0.6, 0.0, v, params, dt)
            assert abs(v - 1.0) <= 0.01
            assert time.perf_counter() - start < 1.0


class TestDynamicsConservation:
    def test_momentum_drift_and_constant_force(self):
        with criterion("dynamics conservation (1e6 steps, a = F/m to 1e-6)"):
            start = time.perf_counter()
            sim = BoardSim(GEOM, TableState(vx=0.37, vy=-0.21, wz=0.4))
            p0 = (GEOM.mass * sim.vx, GEOM.mass * sim.vy, GEOM.izz * sim.wz)
            for _ in range(1_000_000):
                sim.advance(0.0, 0.0, 0.0, 0.002)
            p1 = (GEOM.mass * sim.vx, GEOM.mass * sim.vy, GEOM.izz * sim.wz)
            for a, b in zip(p0, p1):
                assert abs(b - a) <= 1e-9 * abs(a)

            sim = BoardSim(GEOM)
            n = 5000
            for _ in range(n):
                sim.advance(1.0, 0.0, 0.0, 0.002)
            accel = sim.vx / (n * 0.002)
            # the stated 0.09709 m/s^2 is F/m printed to five figures
            assert round(1.0 / GEOM.mass, 5) == 0.09709
            assert abs(accel - 1.0 / GEOM.mass) <= 1e-6
            assert time.perf_counter() - start < 5.0


class TestMinimumJerk:
    def test_endpoints_midpoint_and_flat_ends(self):
        with criterion("minimum jerk boundary conditions"):
            from comanip.leader import minimum_jerk_velocity

            x0, xf, T = 0.25, 2.25, 5.0
            assert minimum_jerk(x0, xf, 0.0, 0.0, T) == x0
            assert minimum_jerk(x0, xf, T, 0.0, T) == xf
            assert minimum_jerk(x0, xf, T / 2, 0.0, T) == (x0 + xf) / 2

            h = 1e-6
            peak_v = 1.875 * (xf - x0) / T
            peak_a = 5.77 * (xf - x0) / T**2

            def vel_fd(t):
                return (minimum_jerk(x0, xf, t + h, 0, T)
                        - minimum_jerk(x0, xf, t - h, 0, T)) / (2 * h)

            def acc_fd(t):
                # differencing the velocity profile avoids the catastrophic
                # cancellation a raw second difference of position would hit
                # at this tolerance
                return (minimum_jerk_velocity(x0, xf, t + h, 0, T)
                        - minimum_jerk_velocity(x0, xf, t - h, 0, T)) / (2 * h)

            for t in (0.0, T):
                assert abs(vel_fd(t)) < 1e-6 * peak_v
                assert abs(acc_fd(t)) < 1e-6 * peak_a


class TestCompletionTimeOracle:
    @pytest.mark.parametrize("T", [3.0, 5.0, 8.0])
    def test_pure_minimum_jerk_duration(self, T):
        with criterion(f"completion-time oracle (T = {T:g} s)"):
            def quintic_crossing(level):
                lo, hi = 0.0, 1.0
                for _ in range(80):
                    mid = (lo + hi) / 2
                    if 10 * mid**3 - 15 * mid**4 + 6 * mid**5 < level:
                        lo = mid
                    else:
                        hi = mid
                return (lo + hi) / 2

            dt = 0.002
            times = np.arange(0.0, T + dt, dt)
            traj = np.array([minimum_jerk(0.0, 1.0, t, 0.0, T) for t in times])
            got = completion_time(times, traj, 0.0, 1.0)
            oracle = (quintic_crossing(0.95) - quintic_crossing(0.05)) * T + 0.5
            assert got == pytest.approx(oracle, abs=0.02)
            assert got == pytest.approx(0.62 * T + 0.5, abs=0.02)


class TestMetricsOracles:
    def test_hand_values_and_fixture_csv(self, tmp_path):
        with criterion("metrics oracles and fixture table"):
            ideal = np.zeros(100)
            assert mje(ideal + 0.1, ideal) == pytest.approx(10.0, abs=1e-9)
            assert mje(ideal - 0.1, ideal) == pytest.approx(10.0, abs=1e-9)

            tau_ramp = np.arange(101, dtype=float)
            assert mtm(tau_ramp, 1.0) == pytest.approx(200.0, abs=1e-9)
            assert mtm(np.full(50, 3.3), 0.01) == pytest.approx(0.0, abs=1e-9)

            dt = 0.01
            t1 = np.arange(0, 1 + dt, dt)
            assert torque_change(t1, t1, dt) == pytest.approx(2.0, abs=1e-9)
            t2 = np.arange(0, 0.5 + dt, dt)
            assert torque_change(np.full_like(t2, 5.0), 2 * t2, dt) == \
                pytest.approx(2.0, abs=1e-9)

            assert pearson([1, 2, 3], [1, 3, 2]) == pytest.approx(0.5, abs=1e-9)
            assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0, abs=1e-9)

            h = math.sqrt(2) / 2
            d, cat = cohens_d([1 - h, 1 + h], [-h, h])
            assert d == pytest.approx(1.0, abs=1e-9)
            assert cat == "Large"

            import csv
            path = tmp_path / "baselines.csv"
            write_baseline_csv(path)
            with open(path) as fh:
                rows = {(r["metric"], r["task"]): r for r in csv.DictReader(fh)}
            for (metric, task), expect in CONTROLLER_BASELINES.items():
                row = rows[(metric, task)]
                got = (float(row["blind_hhi"]), float(row["evic"]),
                       float(row["nnpc"]), float(row["sighted_hhi"]))
                assert got == expect
            assert float(rows[("mtm", "rotation")]["nnpc"]) == 12770.75


class TestIntentGradients:
    def test_bptt_vs_central_differences_100_params(self):
        with criterion("intent gradient check (100 params, rel err < 1e-4)"):
            start = time.perf_counter()
            rng = np.random.default_rng(0)
            # hidden size 3 keeps the network miniature while giving the
            # sampler more than 100 distinct parameters to draw from
            model = init_intent_model(layers=1, hidden=3, seed=3, window=6)
            for key in model.params:
                model.params[key] = model.params[key] + rng.normal(
                    0, 0.3, model.params[key].shape)
            X = rng.normal(0, 1, (4, 6, 6))
            T = rng.normal(0, 1, (4, 6))
            Y, cache = forward_with_cache(model, X)
            grads = backward(model, cache, 2.0 * (Y - T))

            def loss():
                y, _ = forward_with_cache(model, X)
                return mse(y, T)

            eps = 1e-6
            all_coords = [(k, i) for k in model.params
                          for i in range(model.params[k].size)]
            picks = rng.choice(len(all_coords), size=100, replace=False)
            for pick in picks:
                key, i = all_coords[pick]
                flat = model.params[key].ravel()
                old = flat[i]
                flat[i] = old + eps
                lp = loss()
                flat[i] = old - eps
                lm = loss()
                flat[i] = old
                numeric = (lp - lm) / (2 * eps)
                analytic = grads[key].ravel()[i]
                rel = abs(numeric - analytic) / max(1e-8, abs(numeric) + abs(analytic))
                assert rel < 1e-4, (key, i, numeric, analytic)
            assert time.perf_counter() - start < 10.0


class TestIntentTrainingDeskScale:
    def test_holdout_beats_persistence_and_rollouts_bounded(self, trained_intent):
        with criterion("intent desk-scale training (50-step rollout vs persistence)"):
            result = trained_intent["eval"]
            print(f"\n  model RMSE {result['model_rmse']:.4f} vs "
                  f"persistence {result['persistence_rmse']:.4f}; "
                  f"max |rollout| {result['max_abs_rollout']:.2f}; "
                  f"trained in {trained_intent['train_seconds']:.0f}s")
            assert result["model_rmse"] < result["persistence_rmse"]
            assert result["max_abs_rollout"] < 5.0
            assert trained_intent["train_seconds"] < 15 * 60


class TestEndToEndEvic:
    def test_translation(self, evic_trials):
        with criterion("EVIC end-to-end translation (plateau, trigger order, error)"):
            log, report = evic_trials["translation"]
            assert log.completed and log.times[-1] < 30.0
            plateau = plateau_speed(log.twists[:, 1], log.dt)
            assert abs(plateau - 0.35) <= 0.02

            tz = log.torques[:, 2]
            vy = np.abs(log.twists[:, 1])
            crossed = np.nonzero(tz <= -3.0)[0]
            assert crossed.size > 0, "z-torque never crossed the trigger threshold"
            fast = np.nonzero(vy > 0.05)[0]
            assert fast.size > 0
            assert log.times[crossed[0]] < log.times[fast[0]]
            assert vy[crossed[0]] <= 0.05

            final_err = abs(log.poses[-1, 1] - 2.0)
            assert final_err < 0.05

    def test_rotation(self, evic_trials):
        with criterion("EVIC end-to-end rotation (plateau 0.4 rad/s)"):
            log, report = evic_trials["rotation"]
            assert log.completed and log.times[-1] < 30.0
            plateau = plateau_speed(log.twists[:, 2], log.dt)
            assert abs(plateau - 0.4) <= 0.03


class TestEndToEndNnpc:
    @pytest.mark.parametrize("name", ["translation", "rotation"])
    def test_completes_within_evic_budget(self, name, trained_intent, evic_trials):
        with criterion(f"NNPC end-to-end {name} (1.5x EVIC, vmax respected)"):
            task = TRANSLATION if name == "translation" else ROTATION
            cfg = BenchConfig(controller="nnpc", seed=1)
            log, report = run_trial(cfg, task, model=trained_intent["model"])
            _, evic_report = evic_trials[name]
            assert log.completed, f"nnpc {name} did not settle"
            assert report.completion_time is not None
            assert report.completion_time <= 1.5 * evic_report.completion_time, (
                report.completion_time, evic_report.completion_time)
            limits = cfg.limits
            assert np.all(np.abs(log.commands[:, 0]) <= limits.vx + 1e-12)
            assert np.all(np.abs(log.commands[:, 1]) <= limits.vy + 1e-12)
            assert np.all(np.abs(log.commands[:, 2]) <= limits.wz + 1e-12)
            print(f"\n  completion {report.completion_time:.2f}s vs EVIC "
                  f"{evic_report.completion_time:.2f}s")


class TestDeterminism:
    def test_identical_config_and_seed_bytes(self, tmp_path):
        with criterion("determinism (byte-identical logs)"):
            cfg = BenchConfig(controller="evic", seed=77)
            task = dataclasses.replace(TRANSLATION, magnitude=1.0)
            a = tmp_path / "a.jsonl"
            b = tmp_path / "b.jsonl"
            run_trial(cfg, task)[0].write_jsonl(a)
            run_trial(cfg, task)[0].write_jsonl(b)
            assert a.read_bytes() == b.read_bytes()

    def test_nnpc_trial_deterministic(self, trained_intent, tmp_path):
        with criterion("determinism (NNPC trial)"):
            cfg = BenchConfig(controller="nnpc", seed=5, timeout=8.0)
            task = dataclasses.replace(TRANSLATION, magnitude=0.8)
            a = tmp_path / "a.jsonl"
            b = tmp_path / "b.jsonl"
            run_trial(cfg, task, model=trained_intent["model"])[0].write_jsonl(a)
            run_trial(cfg, task, model=trained_intent["model"])[0].write_jsonl(b)
            assert a.read_bytes() == b.read_bytes()
