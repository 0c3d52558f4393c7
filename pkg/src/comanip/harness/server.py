"""Live session endpoint: a human (or scripted) client acts as the leader.

One WebSocket client at a time streams handle forces in and receives state
snapshots, a config echo, and a trial result when the selected task settles.
JSON message schema lives in docs/protocol.md.

Two clocks are supported. Real-time mode paces the simulation against the
wall clock (10 steps per 20 ms tick, state broadcast at 50 Hz) and decays
stale client forces to zero after 200 ms, pausing entirely after 2 s of
silence. Lockstep mode advances a fixed number of steps per received force
message and answers each with one state snapshot, which makes a session
replayable bit for bit.
"""

from __future__ import annotations

import asyncio
import json
import math
import threading

import websockets

from ..dynamics import HandleWrench
from ..leader import TaskSpec
from ..metrics import score_trial
from .config import BenchConfig
from .trial import DyadSim

FORCE_HOLD_TIMEOUT = 0.2   # s, stale client forces decay to zero
PAUSE_TIMEOUT = 2.0        # s, silence pauses the simulation
BROADCAST_PERIOD = 0.02    # s, 50 Hz state stream


class SessionServer:
    """Owns one simulation and at most one connected client."""

    def __init__(self, config: BenchConfig, model=None) -> None:
        self.config = config
        self.sim = DyadSim(config, task=None, model=model)
        self._client = None
        self._seq_out = 0
        self._seq_in = -1
        self._wrench = HandleWrench()
        self._last_force_time: float | None = None
        self._result_sent = False
        self._server = None
        self.port: int | None = None

    # -- outgoing ------------------------------------------------------------

    def _next_seq(self) -> int:
        self._seq_out += 1
        return self._seq_out

    def _state_message(self) -> dict:
        state = self.sim.board.state
        tau = self.sim.sensed_torque
        cmd = getattr(self.sim, "last_command", None)
        return {
            "type": "state",
            "seq": self._next_seq(),
            "t": state.t,
            "pose": [state.x, state.y, state.theta],
            "twist": [state.vx, state.vy, state.wz],
            "tau": list(tau),
            "mode": self.sim.mode,
            "cmd": [cmd.vx, cmd.vy, cmd.wz] if cmd else [0.0, 0.0, 0.0],
            "complete": self.sim.completed,
        }

    def _config_message(self) -> dict:
        geom = self.config.geometry
        return {
            "type": "config",
            "seq": self._next_seq(),
            "controller": self.config.controller,
            "dt": self.config.dt,
            "lockstep": self.config.lockstep,
            "steps_per_message": self.config.steps_per_message,
            "board": {"length": geom.length, "width": geom.width,
                      "mass": geom.mass},
            "thresholds": {"tau_z": self.config.evic.tau_z_threshold,
                           "tau_x": self.config.evic.tau_x_threshold},
            "task": self.sim.task.to_dict() if self.sim.task else None,
        }

    async def _send(self, ws, message: dict) -> None:
        await ws.send(json.dumps(message))

    async def _maybe_send_result(self, ws) -> None:
        if self.sim.completed and not self._result_sent and self.sim.task:
            self._result_sent = True
            try:
                report = score_trial(self.sim.to_log(), mass=self.config.geometry.mass,
                                     length=self.config.geometry.length,
                                     width=self.config.geometry.width)
                payload = report.to_dict()
            except Exception as exc:
                payload = {"error": str(exc)}
            await self._send(ws, {"type": "trial_result",
                                  "seq": self._next_seq(), "report": payload})

    # -- incoming ------------------------------------------------------------

    def _parse_wrench(self, msg: dict) -> HandleWrench:
        left = tuple(float(v) for v in msg.get("left", (0, 0, 0)))
        right = tuple(float(v) for v in msg.get("right", (0, 0, 0)))
        if len(left) != 3 or len(right) != 3:
            raise ValueError("force vectors must have 3 components")
        if not all(math.isfinite(v) for v in (*left, *right)):
            raise ValueError("force must be finite")
        wrench, _ = HandleWrench(left=left, right=right).clamped(
            self.config.geometry.force_saturation)
        return wrench

    async def _handle_message(self, ws, raw: str) -> None:
        msg = json.loads(raw)
        seq = int(msg.get("seq", -1))
        if seq <= self._seq_in:
            return  # stale or replayed message, drop
        self._seq_in = seq
        kind = msg.get("type")
        if kind == "force":
            self._wrench = self._parse_wrench(msg)
            self._last_force_time = asyncio.get_event_loop().time()
            if self.config.lockstep:
                for _ in range(self.config.steps_per_message):
                    self.sim.step(self._wrench)
                await self._send(ws, self._state_message())
                await self._maybe_send_result(ws)
        elif kind == "reset":
            self.sim.reset()
            self._result_sent = False
            self._wrench = HandleWrench()
            await self._send(ws, self._config_message())
        elif kind == "select_task":
            self.sim.select_task(TaskSpec.from_dict(msg["task"]))
            self._result_sent = False
            self._wrench = HandleWrench()
            await self._send(ws, self._config_message())
        else:
            raise ValueError(f"unknown message type {kind!r}")

    # -- session -------------------------------------------------------------

    async def _realtime_loop(self, ws) -> None:
        loop = asyncio.get_event_loop()
        steps_per_tick = max(1, int(round(BROADCAST_PERIOD / self.config.dt)))
        next_tick = loop.time()
        while True:
            next_tick += BROADCAST_PERIOD
            delay = next_tick - loop.time()
            if delay > 0:
                await asyncio.sleep(delay)
            else:
                next_tick = loop.time()  # fell behind, resynchronize
            now = loop.time()
            age = math.inf if self._last_force_time is None else now - self._last_force_time
            if age > PAUSE_TIMEOUT:
                continue  # board rests until the client speaks again
            wrench = self._wrench if age <= FORCE_HOLD_TIMEOUT else HandleWrench()
            for _ in range(steps_per_tick):
                self.sim.step(wrench)
            await self._send(ws, self._state_message())
            await self._maybe_send_result(ws)

    async def _handler(self, ws) -> None:
        if self._client is not None:
            await ws.close(code=1013, reason="session busy: one client only")
            return
        self._client = ws
        pacer = None
        try:
            await self._send(ws, self._config_message())
            if not self.config.lockstep:
                pacer = asyncio.ensure_future(self._realtime_loop(ws))
            async for raw in ws:
                try:
                    await self._handle_message(ws, raw)
                except (ValueError, KeyError) as exc:
                    await self._send(ws, {"type": "error",
                                          "seq": self._next_seq(),
                                          "message": str(exc)})
        finally:
            if pacer:
                pacer.cancel()
            self._client = None
            self._wrench = HandleWrench()  # forces decay on disconnect

    async def start(self) -> None:
        self._server = await websockets.serve(self._handler, "127.0.0.1",
                                              self.config.port)
        self.port = self._server.sockets[0].getsockname()[1]

    async def run_forever(self) -> None:
        await self.start()
        print(f"session server listening on ws://127.0.0.1:{self.port} "
              f"({'lockstep' if self.config.lockstep else 'realtime'}, "
              f"controller {self.config.controller})", flush=True)
        await asyncio.Future()


def serve_forever(config: BenchConfig, model=None) -> None:
    asyncio.run(SessionServer(config, model=model).run_forever())


class ServerThread:
    """Test helper: run a session server on a daemon thread."""

    def __init__(self, config: BenchConfig, model=None) -> None:
        self.server = SessionServer(config, model=model)
        self._loop = None
        self._ready = threading.Event()
        self._thread = threading.Thread(target=self._run, daemon=True)

    def _run(self) -> None:
        self._loop = asyncio.new_event_loop()
        asyncio.set_event_loop(self._loop)
        self._loop.run_until_complete(self.server.start())
        self._ready.set()
        self._loop.run_forever()

    def __enter__(self) -> "ServerThread":
        self._thread.start()
        if not self._ready.wait(timeout=10):
            raise RuntimeError("server failed to start")
        return self

    @property
    def port(self) -> int:
        return self.server.port

    def __exit__(self, *exc) -> None:
        if self._loop:
            self._loop.call_soon_threadsafe(self._loop.stop)
        self._thread.join(timeout=5)
