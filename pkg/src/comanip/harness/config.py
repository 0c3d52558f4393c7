"""Bench configuration: one dataclass tree, JSON round trip, validation."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..controllers import EvicParams, VelocityLimits, VicParams
from ..dynamics import TableGeometry, ValidationError
from ..leader import LeaderGains, TriggerProfile

CONTROLLERS = ("bmvic", "evic", "nnpc")


@dataclass(frozen=True)
class BenchConfig:
    """Everything a trial needs besides the task itself."""

    controller: str = "evic"
    seed: int = 0
    dt: float = 0.002              # 500 Hz loop
    timeout: float = 30.0          # s before a trial is flagged incomplete
    settle_band: float = 0.05      # fraction of the displacement
    settle_hold: float = 1.0       # s the board must stay in band
    live: bool = False             # leader forces come from a client, not a script
    port: int = 8765
    lockstep: bool = False         # deterministic serving: steps advance per message
    steps_per_message: int = 10
    model_path: str | None = None  # trained predictor, required for nnpc
    nnpc_horizon: int = 50
    nnpc_command_step: int = 20   # rollout sample the base command uses
    nnpc_update_period: float = 0.1
    base_accel: float = 1.5        # m/s^2 slew on the follower base
    base_alpha: float = 2.0        # rad/s^2
    grasp_stiffness: float = 300.0
    grasp_rot_stiffness: float = 60.0
    geometry: TableGeometry = field(default_factory=TableGeometry)
    vic: VicParams = field(default_factory=VicParams)
    evic: EvicParams = field(default_factory=EvicParams)
    limits: VelocityLimits = field(default_factory=VelocityLimits)
    gains: LeaderGains = field(default_factory=LeaderGains)
    profile: TriggerProfile = field(default_factory=TriggerProfile)

    def validate(self) -> None:
        if self.controller not in CONTROLLERS:
            raise ValidationError(f"unknown controller {self.controller!r}")
        if self.dt <= 0 or self.timeout <= 0:
            raise ValidationError("dt and timeout must be positive")
        if not self.live and self.seed is None:
            raise ValidationError("scripted runs require a seed")
        # nnpc needs a trained model: either model_path here or an in-memory
        # model handed to the runner, checked where the predictor is built

    # -- JSON round trip ------------------------------------------------------

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @staticmethod
    def from_dict(data: dict) -> "BenchConfig":
        kwargs = dict(data)
        for key, cls in (("geometry", TableGeometry), ("vic", VicParams),
                         ("evic", EvicParams), ("limits", VelocityLimits),
                         ("gains", LeaderGains), ("profile", TriggerProfile)):
            if key in kwargs and isinstance(kwargs[key], dict):
                kwargs[key] = cls(**kwargs[key])
        return BenchConfig(**kwargs)

    def save(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @staticmethod
    def load(path: str | Path) -> "BenchConfig":
        with open(path) as fh:
            return BenchConfig.from_dict(json.load(fh))
