"""Recurrent motion-intent estimation: data, network, training, model I/O."""

from .data import (
    Corpus,
    PredictionWindow,
    channel_stats,
    destandardize,
    load_corpus_dir,
    read_motion_csv,
    standardize,
    write_motion_csv,
)
from .model_io import export_debug_json, load_model, save_model
from .network import (
    RecurrentModel,
    forward,
    init_model,
    iterated_predict,
    mse,
)
from .predictor import IntentPredictor
from .training import (
    TrainingDiverged,
    TrainingSchedule,
    persistence_rollout,
    rollout_rmse,
    train,
)

__all__ = [
    "Corpus", "PredictionWindow", "channel_stats", "standardize",
    "destandardize", "load_corpus_dir", "read_motion_csv", "write_motion_csv",
    "RecurrentModel", "forward", "init_model", "iterated_predict", "mse",
    "IntentPredictor", "TrainingSchedule", "TrainingDiverged", "train",
    "rollout_rmse", "persistence_rollout", "save_model", "load_model",
    "export_debug_json",
]
