"""The fixed-step co-manipulation loop and batch experiment runner.

Each trial steps board dynamics, leader force synthesis, sensor sampling and
the selected follower controller at 500 Hz until the task settles (board
inside the 95% band for a hold period) or a timeout flags it incomplete.
Everything in the loop is deterministic: the same config and seed produce a
byte-identical log.
"""

from __future__ import annotations

import dataclasses
import json
import math
from pathlib import Path

import numpy as np

from ..controllers import (
    BmvicController,
    ControlCommand,
    EvicController,
    NnpcController,
)
from ..dynamics import (
    BoardSim,
    HandleWrench,
    TableState,
    ValidationError,
    board_torques,
    critically_damped_grasp,
)
from ..leader import TaskKind, TaskSpec, leader_step
from ..metrics import MetricsReport, TrialLog, score_trial, write_summary_csv
from ..signals import Biquad, FilterSpec, POSE_RATE_HZ
from .config import BenchConfig

FORCE_HOLD_STEPS = 5  # 100 Hz force sensor on the 500 Hz loop


class FollowerBase:
    """Velocity-source holonomic base with per-axis slew limits.

    Commands arrive in the robot frame; they are rotated by the base heading,
    slew-limited, and integrated. The base origin is the grasp anchor.
    """

    __slots__ = ("x", "y", "theta", "vx", "vy", "wz")

    def __init__(self, x: float = 0.0, y: float = 0.0, theta: float = 0.0) -> None:
        self.x, self.y, self.theta = x, y, theta
        self.vx = self.vy = self.wz = 0.0

    @staticmethod
    def _slew(current: float, target: float, rate: float, dt: float) -> float:
        step = rate * dt
        return min(max(target, current - step), current + step)

    def apply(self, cmd: ControlCommand, dt: float, accel: float, alpha: float) -> None:
        c, s = math.cos(self.theta), math.sin(self.theta)
        wvx = c * cmd.vx - s * cmd.vy
        wvy = s * cmd.vx + c * cmd.vy
        self.vx = self._slew(self.vx, wvx, accel, dt)
        self.vy = self._slew(self.vy, wvy, accel, dt)
        self.wz = self._slew(self.wz, cmd.wz, alpha, dt)
        self.x += self.vx * dt
        self.y += self.vy * dt
        self.theta += self.wz * dt


class _OnlineMotion:
    """Causal velocity estimator on the pose clock: first difference + 20 Hz filter."""

    def __init__(self) -> None:
        spec = FilterSpec(cutoff=20.0, sample_rate=POSE_RATE_HZ)
        self._filters = [Biquad(spec) for _ in range(3)]
        self._prev: tuple[float, float, float] | None = None
        self._dt = 1.0 / POSE_RATE_HZ

    def tick(self, pose: tuple[float, float, float]) -> np.ndarray:
        if self._prev is None:
            raw = (0.0, 0.0, 0.0)
        else:
            raw = tuple((a - b) / self._dt for a, b in zip(pose, self._prev))
        self._prev = pose
        vx_w = self._filters[0].process(raw[0])
        vy_w = self._filters[1].process(raw[1])
        wz = self._filters[2].process(raw[2])
        c, s = math.cos(pose[2]), math.sin(pose[2])
        return np.array([c * vx_w + s * vy_w, -s * vx_w + c * vy_w,
                         0.0, 0.0, 0.0, wz])


def _displacement(state, kind: TaskKind) -> float:
    if kind is TaskKind.PLANAR_ROTATION:
        return state.theta
    if kind is TaskKind.LATERAL_TRANSLATION:
        return state.y
    return state.x


def _load_model(config: BenchConfig, model):
    if model is not None:
        return model
    if config.model_path is None:
        raise ValidationError("nnpc requires a trained model")
    from ..intent import load_model
    return load_model(config.model_path)


class DyadSim:
    """Board, follower and sensing pipeline stepped with an external wrench.

    The scripted runner and the live server share this stepper: one call per
    500 Hz tick with whatever the leader (synthetic or human) applies. Task
    settle detection runs when a task is attached.
    """

    def __init__(self, config: BenchConfig, task: TaskSpec | None = None,
                 model=None) -> None:
        config.validate()
        self.config = config
        self.geom = config.geometry
        self.task = None
        self.board = BoardSim(self.geom)
        self.grasp = critically_damped_grasp(self.geom, config.grasp_stiffness,
                                             config.grasp_rot_stiffness)
        self.base = FollowerBase()
        self._nnpc_model = model
        self._reset_follower()
        self.completed = False
        self.k = 0
        self._in_band = 0
        self._held = HandleWrench()
        self._records: list[tuple] = []
        if task is not None:
            self.select_task(task)

    # -- setup ---------------------------------------------------------------

    def _reset_follower(self) -> None:
        config = self.config
        rate = 1.0 / config.dt
        self.evic = self.bmvic = self.nnpc = None
        if config.controller == "evic":
            self.evic = EvicController(config.evic, config.vic, config.limits,
                                       sample_rate=rate)
        elif config.controller == "bmvic":
            self.bmvic = BmvicController(config.vic, config.limits,
                                         sample_rate=rate)
        else:
            from ..intent import IntentPredictor
            model = _load_model(config, self._nnpc_model)
            self._nnpc_model = model
            predictor = IntentPredictor(model, horizon=config.nnpc_horizon,
                                        command_step=config.nnpc_command_step)
            self.nnpc = NnpcController(predictor,
                                       p_offset=(-self.geom.length / 2, 0.0),
                                       limits=config.limits,
                                       update_period=config.nnpc_update_period)
        self._motion = _OnlineMotion()
        self._next_pose_tick = 0.0

    def select_task(self, task: TaskSpec) -> None:
        """Attach a task and move the dyad to its start pose, at rest."""
        self.task = task
        x0, y0, th0 = task.start_pose
        self.board = BoardSim(self.geom, TableState(x=x0, y=y0, theta=th0))
        l2 = self.geom.length / 2.0
        self.base = FollowerBase(x=x0 - l2 * math.cos(th0),
                                 y=y0 - l2 * math.sin(th0), theta=th0)
        self._reset_follower()
        self.completed = False
        self.k = 0
        self._in_band = 0
        self._held = HandleWrench()
        self._records = []
        self._target = _displacement(self.board, task.kind) + task.sign * task.magnitude
        self._band = self.config.settle_band * task.magnitude
        self._settle_needed = int(round(self.config.settle_hold / self.config.dt))

    def reset(self) -> None:
        if self.task is not None:
            self.select_task(self.task)

    # -- stepping ------------------------------------------------------------

    @property
    def t(self) -> float:
        return self.k * self.config.dt

    def step(self, wrench: HandleWrench, saturated: bool = False) -> TableState:
        """Advance one 500 Hz tick under the given leader wrench."""
        config = self.config
        dt = config.dt
        t = self.k * dt
        state = self.board.state

        if self.k % FORCE_HOLD_STEPS == 0:
            self._held = wrench
        tau = board_torques(self._held, self.geom)
        fx_s = self._held.left[0] + self._held.right[0]
        fy_s = self._held.left[1] + self._held.right[1]

        if self.evic is not None:
            cmd = self.evic.update(fx_s, tau[2], tau[0], dt)
        elif self.bmvic is not None:
            cmd = self.bmvic.update(fx_s, fy_s, tau[2], dt)
        else:
            while t >= self._next_pose_tick - 1e-12:
                self.nnpc.observe(self._motion.tick((state.x, state.y, state.theta)))
                self._next_pose_tick += 1.0 / POSE_RATE_HZ
            cmd = self.nnpc.update(dt)
        self.last_command = cmd

        self.base.apply(cmd, dt, config.base_accel, config.base_alpha)
        g = self.grasp
        g.base_x, g.base_y, g.base_theta = self.base.x, self.base.y, self.base.theta
        g.base_vx, g.base_vy, g.base_wz = self.base.vx, self.base.vy, self.base.wz

        self._records.append((
            t, (state.x, state.y, state.theta), (state.vx, state.vy, state.wz),
            (state.ax, state.ay, state.alpha), (*wrench.left, *wrench.right),
            tau, (cmd.vx, cmd.vy, cmd.wz), cmd.mode.value, saturated,
        ))

        self.board.step(wrench, g, dt)
        self.k += 1

        if self.task is not None and not self.completed:
            if abs(_displacement(self.board, self.task.kind) - self._target) <= self._band:
                self._in_band += 1
                if self._in_band >= self._settle_needed:
                    self.completed = True
            else:
                self._in_band = 0
        return self.board.state

    @property
    def sensed_torque(self) -> tuple[float, float, float]:
        return board_torques(self._held, self.geom)

    @property
    def mode(self) -> str:
        return getattr(self, "last_command", ControlCommand()).mode.value

    def to_log(self) -> TrialLog:
        if self.task is None:
            raise ValidationError("no task attached; nothing to log")
        times, poses, twists, accels, wrenches, taus, cmds, modes, sats = \
            (list(z) for z in zip(*self._records)) if self._records else ([],) * 9
        return TrialLog(
            task=self.task, controller=self.config.controller,
            seed=self.config.seed, dt=self.config.dt,
            times=np.array(times), poses=np.array(poses),
            twists=np.array(twists), accels=np.array(accels),
            wrenches=np.array(wrenches), torques=np.array(taus),
            commands=np.array(cmds), modes=list(modes),
            saturated=np.array(sats, dtype=bool), completed=self.completed,
        )


def run_trial(config: BenchConfig, task: TaskSpec, model=None,
              leader_override: np.ndarray | None = None
              ) -> tuple[TrialLog, MetricsReport]:
    """Run one scripted trial; returns the step log and its metric report.

    leader_override replaces the closed-loop leader with a recorded wrench
    series (one row of six forces per step), which is how logs are replayed.
    """
    sim = DyadSim(config, task, model)
    n_max = int(round(config.timeout / config.dt))
    for k in range(n_max):
        if leader_override is not None:
            if k >= len(leader_override):
                break
            row = leader_override[k]
            wrench = HandleWrench(left=(row[0], row[1], row[2]),
                                  right=(row[3], row[4], row[5]))
            sat = False
        else:
            wrench, sat = leader_step(sim.board.state, task, config.profile,
                                      config.gains, sim.t, config.geometry)
        sim.step(wrench, sat)
        if sim.completed:
            break
    log = sim.to_log()
    geom = config.geometry
    report = score_trial(log, mass=geom.mass, length=geom.length, width=geom.width)
    report.completed = log.completed and report.completion_time is not None
    return log, report


def replay_trial(log: TrialLog, config: BenchConfig, model=None
                 ) -> tuple[TrialLog, MetricsReport]:
    """Re-run a logged trial open loop on its recorded leader wrenches."""
    cfg = dataclasses.replace(config, controller=log.controller, seed=log.seed,
                              dt=log.dt)
    return run_trial(cfg, log.task, model=model, leader_override=log.wrenches)


def load_task_script(path: str | Path) -> list[TaskSpec]:
    """JSON array of task records."""
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise ValidationError(f"{path}: task script must be a JSON array")
    return [TaskSpec.from_dict(d) for d in data]


def run_batch(config: BenchConfig, tasks: list[TaskSpec], repetitions: int,
              out_dir: str | Path, model=None
              ) -> tuple[list[MetricsReport], list[dict]]:
    """Run tasks x repetitions, write per-trial artifacts and a summary CSV.

    Individual trial failures are recorded and the batch continues; an empty
    task list produces an empty summary and a warning, not an error.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    reports: list[MetricsReport] = []
    failures: list[dict] = []
    if not tasks:
        import warnings
        warnings.warn("empty task script: writing an empty summary")
    if config.controller == "nnpc":
        model = _load_model(config, model)
    for rep in range(repetitions):
        for i, task in enumerate(tasks):
            cfg = dataclasses.replace(config, seed=config.seed + 1000 * rep + i)
            name = f"{config.controller}_{task.kind.value}_{task.direction.value}_r{rep}"
            try:
                log, report = run_trial(cfg, task, model=model)
            except Exception as exc:  # keep the batch alive, record the loss
                failures.append({"task": task.to_dict(), "rep": rep, "error": str(exc)})
                continue
            log.write_jsonl(out / f"{name}.jsonl")
            report.write_json(out / f"{name}.json")
            reports.append(report)
    write_summary_csv(reports, out / "summary.csv")
    if failures:
        with open(out / "failures.json", "w") as fh:
            json.dump(failures, fh, indent=2)
    return reports, failures
