"""Masked-action value-learning next-hop routing policy."""

from .episode import DeadEndError, Transition, reward, run_episode, select_action
from .features import (
    CandidateFeatures,
    DEFAULT_K_CAP,
    StateVector,
    encode,
    feasible_actions,
)
from .policy import Adam, PolicyParams, RLHyperParams, forward, gradients_mse, q_scores
from .training import (
    EvalReport,
    ReplayBuffer,
    TrainingDivergedError,
    TrainingLog,
    build_snapshot_set,
    evaluate,
    train,
)

__all__ = [
    "Adam",
    "CandidateFeatures",
    "DEFAULT_K_CAP",
    "DeadEndError",
    "EvalReport",
    "PolicyParams",
    "RLHyperParams",
    "ReplayBuffer",
    "StateVector",
    "TrainingDivergedError",
    "TrainingLog",
    "Transition",
    "build_snapshot_set",
    "encode",
    "evaluate",
    "feasible_actions",
    "forward",
    "gradients_mse",
    "q_scores",
    "reward",
    "run_episode",
    "select_action",
    "train",
]
