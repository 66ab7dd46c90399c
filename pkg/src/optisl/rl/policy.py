"""Value network, hyperparameters, and parameter serialization.

The policy scores each (state, candidate) pair with a shared two-hidden-
layer tanh network, so the action set may vary in size per decision.
Forward/backward passes are plain NumPy; gradients are exact and checked
against finite differences in the tests.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
import numpy as np

STATE_DIM = 5
CANDIDATE_DIM = 5
INPUT_DIM = STATE_DIM + CANDIDATE_DIM
POLICY_FILE_VERSION = 1


@dataclass(frozen=True)
class RLHyperParams:
    """Training knobs: learning, exploration schedule, replay, budgets."""

    hidden: tuple[int, ...] = (64, 64)
    learning_rate: float = 1e-3
    discount: float = 0.99
    epsilon_start: float = 1.0
    epsilon_final: float = 0.05
    epsilon_decay_episodes: int = 30_000
    replay_capacity: int = 100_000
    batch_size: int = 64
    target_sync: int = 1_000
    update_every: int = 4
    warmup_transitions: int = 1_000
    grad_clip: float = 10.0
    episodes: int = 50_000
    eval_every: int = 2_000
    eval_snapshots: int = 50

    def __post_init__(self) -> None:
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if not 0.0 <= self.discount <= 1.0:
            raise ValueError("discount must lie in [0, 1]")
        if not 0.0 <= self.epsilon_final <= self.epsilon_start <= 1.0:
            raise ValueError("need 0 <= epsilon_final <= epsilon_start <= 1")
        for name in (
            "epsilon_decay_episodes",
            "replay_capacity",
            "batch_size",
            "target_sync",
            "update_every",
            "warmup_transitions",
            "episodes",
            "eval_every",
            "eval_snapshots",
        ):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    @property
    def widths(self) -> tuple[int, ...]:
        return (INPUT_DIM, *self.hidden, 1)

    def epsilon_at(self, episode: int) -> float:
        if self.epsilon_start <= self.epsilon_final:
            return self.epsilon_final
        decay = (self.epsilon_final / self.epsilon_start) ** (
            1.0 / self.epsilon_decay_episodes
        )
        return max(self.epsilon_final, self.epsilon_start * decay**episode)


@dataclass
class PolicyParams:
    """Weights and biases of the candidate-scoring network."""

    widths: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    hyper: RLHyperParams = field(default_factory=RLHyperParams)

    @classmethod
    def zero_init(cls, hyper: RLHyperParams | None = None) -> "PolicyParams":
        hyper = hyper or RLHyperParams()
        widths = hyper.widths
        weights = [np.zeros((a, b)) for a, b in zip(widths[:-1], widths[1:])]
        biases = [np.zeros(b) for b in widths[1:]]
        return cls(widths, weights, biases, hyper)

    @classmethod
    def random_init(
        cls, rng: np.random.Generator, hyper: RLHyperParams | None = None
    ) -> "PolicyParams":
        """Uniform init in +-1/sqrt(fan_in), drawn from the given stream."""
        hyper = hyper or RLHyperParams()
        widths = hyper.widths
        weights, biases = [], []
        for a, b in zip(widths[:-1], widths[1:]):
            bound = 1.0 / np.sqrt(a)
            weights.append(rng.uniform(-bound, bound, size=(a, b)))
            biases.append(rng.uniform(-bound, bound, size=b))
        return cls(widths, weights, biases, hyper)

    def copy(self) -> "PolicyParams":
        return PolicyParams(
            self.widths,
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.hyper,
        )

    def copy_from(self, other: "PolicyParams") -> None:
        for mine, theirs in zip(self.weights, other.weights):
            mine[...] = theirs
        for mine, theirs in zip(self.biases, other.biases):
            mine[...] = theirs

    def flat(self) -> list[np.ndarray]:
        return [*self.weights, *self.biases]

    def save(self, path, config_hash: str = "") -> None:
        meta = {
            "version": POLICY_FILE_VERSION,
            "widths": list(self.widths),
            "hyper": asdict(self.hyper),
            "config_hash": config_hash,
        }
        arrays = {"meta": np.array(json.dumps(meta, sort_keys=True))}
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            arrays[f"w{i}"] = w
            arrays[f"b{i}"] = b
        with open(path, "wb") as fh:
            np.savez(fh, **arrays)

    @classmethod
    def load(cls, path) -> tuple["PolicyParams", dict]:
        with np.load(path, allow_pickle=False) as data:
            meta = json.loads(str(data["meta"][()]))
            if meta.get("version") != POLICY_FILE_VERSION:
                raise ValueError(f"unsupported policy file version: {meta.get('version')}")
            hyper_kwargs = dict(meta["hyper"])
            hyper_kwargs["hidden"] = tuple(hyper_kwargs["hidden"])
            hyper = RLHyperParams(**hyper_kwargs)
            widths = tuple(meta["widths"])
            n_layers = len(widths) - 1
            weights = [data[f"w{i}"].copy() for i in range(n_layers)]
            biases = [data[f"b{i}"].copy() for i in range(n_layers)]
        return cls(widths, weights, biases, hyper), meta


def forward(params: PolicyParams, x: np.ndarray) -> np.ndarray:
    """Network output for a batch of rows, shape (n,)."""
    h = x
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        h = h @ w + b
        if i < last:
            h = np.tanh(h)
    return h[:, 0]


def gradients_mse(
    params: PolicyParams, x: np.ndarray, y: np.ndarray
) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    """Mean-squared-error loss and its parameter gradients.

    loss = mean((q - y)^2) over the batch; returns (loss, dW list, db list).
    """
    n = x.shape[0]
    last = len(params.weights) - 1
    acts = [x]
    h = x
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        h = h @ w + b
        if i < last:
            h = np.tanh(h)
        acts.append(h)
    q = acts[-1][:, 0]
    err = q - y
    loss = float(np.mean(err * err))

    grad_w: list[np.ndarray] = [np.empty(0)] * len(params.weights)
    grad_b: list[np.ndarray] = [np.empty(0)] * len(params.biases)
    delta = (2.0 * err / n)[:, None]  # d loss / d output
    for i in range(last, -1, -1):
        grad_w[i] = acts[i].T @ delta
        grad_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ params.weights[i].T) * (1.0 - acts[i] * acts[i])
    return loss, grad_w, grad_b


def q_scores(params: PolicyParams, state: np.ndarray, cand_feats: np.ndarray) -> np.ndarray:
    """Score each candidate against the shared state, shape (n,)."""
    n = cand_feats.shape[0]
    if n == 0:
        return np.empty(0)
    x = np.empty((n, INPUT_DIM))
    x[:, :STATE_DIM] = state
    x[:, STATE_DIM:] = cand_feats
    return forward(params, x)


def clip_gradients(grads_w: list[np.ndarray], grads_b: list[np.ndarray], max_norm: float) -> float:
    """Scale gradients in place to a global L2 norm cap; returns the norm."""
    total = 0.0
    for g in (*grads_w, *grads_b):
        total += float(np.sum(g * g))
    norm = float(np.sqrt(total))
    if max_norm > 0 and norm > max_norm:
        scale = max_norm / norm
        for g in (*grads_w, *grads_b):
            g *= scale
    return norm


class Adam:
    """Adam optimizer over a PolicyParams instance (in-place updates)."""

    def __init__(
        self,
        params: PolicyParams,
        lr: float,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(a) for a in params.flat()]
        self.v = [np.zeros_like(a) for a in params.flat()]

    def step(
        self,
        params: PolicyParams,
        grads_w: list[np.ndarray],
        grads_b: list[np.ndarray],
    ) -> None:
        self.t += 1
        b1t = 1.0 - self.beta1**self.t
        b2t = 1.0 - self.beta2**self.t
        for slot, (arr, grad) in enumerate(
            zip(params.flat(), [*grads_w, *grads_b])
        ):
            m = self.m[slot]
            v = self.v[slot]
            m *= self.beta1
            m += (1.0 - self.beta1) * grad
            v *= self.beta2
            v += (1.0 - self.beta2) * grad * grad
            arr -= self.lr * (m / b1t) / (np.sqrt(v / b2t) + self.eps)
