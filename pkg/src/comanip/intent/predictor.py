"""Runtime bridge between a trained model and the follower's control loop."""

from __future__ import annotations

import numpy as np

from .data import PredictionWindow, destandardize, standardize
from .network import RecurrentModel, iterated_predict


class IntentPredictor:
    """Keeps the live motion window and serves rollouts in physical units.

    Push one 6-channel table-frame motion sample per sensor tick; once the
    window is warm, ``predict_twist`` rolls the model forward and returns the
    planar twist (vx, vy, wz) at the end of the horizon, which is what the
    base command should anticipate.
    """

    def __init__(self, model: RecurrentModel, horizon: int = 50,
                 command_step: int | None = None) -> None:
        self.model = model
        self.horizon = horizon
        # how far into the rollout the base command looks; the full-horizon
        # prediction is validated offline, but closing the loop on it feeds
        # the anticipated velocity back into the motion being anticipated,
        # so the command may use a shorter lead
        self.command_step = horizon if command_step is None else command_step
        if not (1 <= self.command_step <= horizon):
            from ..dynamics import ValidationError
            raise ValidationError("command_step must lie within the horizon")
        self.window = PredictionWindow(model.window)

    @property
    def warm(self) -> bool:
        return self.window.warm

    def push(self, sample: np.ndarray) -> None:
        self.window.push(standardize(np.asarray(sample, dtype=float),
                                     self.model.mean, self.model.std))

    def reset(self) -> None:
        self.window.reset()

    def rollout(self) -> np.ndarray:
        """(horizon, 6) predicted motion in physical units."""
        std_rollout = iterated_predict(self.model, self.window.array(), self.horizon)
        return destandardize(std_rollout, self.model.mean, self.model.std)

    def predict_twist(self) -> tuple[float, float, float]:
        chosen = self.rollout()[self.command_step - 1]
        return (float(chosen[0]), float(chosen[1]), float(chosen[5]))
