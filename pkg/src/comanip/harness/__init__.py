"""Trial orchestration: configuration, the 500 Hz loop, batches, live serving."""

from .config import BenchConfig
from .corpus import synthesize_corpus
from .trial import FollowerBase, load_task_script, replay_trial, run_batch, run_trial

__all__ = [
    "BenchConfig", "FollowerBase", "run_trial", "run_batch", "replay_trial",
    "load_task_script", "synthesize_corpus",
]
