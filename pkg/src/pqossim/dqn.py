"""Self-contained double deep Q-learning core.

A small fully-connected ReLU network (default 8 -> 12 -> 6 -> 3) maps the
state vector to one q-value per action. Training follows the double-DQN
rule: the online network picks the bootstrap action, a periodically
synchronized target network evaluates it. Updates are Adam with decoupled
weight decay, computed by hand-written backpropagation; no ML runtime is
involved, which keeps runs bit-reproducible across machines.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CheckpointError
from .modes import AGENT_ACTION_IDS

DEFAULT_LAYER_SIZES = (8, 12, 6, 3)

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

CHECKPOINT_FORMAT_VERSION = 1


@dataclass
class AgentConfig:
    """Hyperparameters of the learning agent."""

    discount: float = 0.95
    learning_rate: float = 1e-4
    weight_decay: float = 1e-3
    batch_size: int = 10
    replay_capacity: int = 50_000
    target_sync_period: int = 100
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_decay_episodes: int = 500
    rng_seed: int = 1

    def __post_init__(self) -> None:
        if not 0.0 <= self.discount < 1.0:
            raise ValueError(f"discount must be in [0, 1), got {self.discount}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.replay_capacity < 1:
            raise ValueError("replay_capacity must be >= 1")
        if self.target_sync_period < 1:
            raise ValueError("target_sync_period must be >= 1")
        for name in ("eps_start", "eps_end"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.eps_decay_episodes < 1:
            raise ValueError("eps_decay_episodes must be >= 1")


@dataclass(frozen=True)
class Transition:
    """One replay record: (s, a, r, s', terminal)."""

    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    terminal: bool


class QNetwork:
    """Dense ReLU network with a linear head, float64 throughout."""

    def __init__(self, layer_sizes=DEFAULT_LAYER_SIZES, rng: np.random.Generator | None = None):
        if len(layer_sizes) < 2:
            raise ValueError("need at least an input and an output layer")
        self.layer_sizes = tuple(int(s) for s in layer_sizes)
        rng = rng if rng is not None else np.random.default_rng(0)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(self.layer_sizes[:-1], self.layer_sizes[1:]):
            # uniform Glorot bounds keep initial q-values near zero
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            self.weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out, dtype=np.float64))

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_actions(self) -> int:
        return self.layer_sizes[-1]

    def parameters(self) -> list[np.ndarray]:
        params = []
        for w, b in zip(self.weights, self.biases):
            params.append(w)
            params.append(b)
        return params

    def copy_from(self, other: "QNetwork") -> None:
        for dst, src in zip(self.parameters(), other.parameters()):
            np.copyto(dst, src)

    def clone(self) -> "QNetwork":
        out = QNetwork(self.layer_sizes)
        out.copy_from(self)
        return out

    def forward_batch(self, states: np.ndarray) -> np.ndarray:
        """(B, n_inputs) -> (B, n_actions) q-values."""
        h = np.asarray(states, dtype=np.float64)
        if h.ndim != 2 or h.shape[1] != self.n_inputs:
            raise ValueError(f"expected (B, {self.n_inputs}) states, got {h.shape}")
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i != last:
                np.maximum(h, 0.0, out=h)
        return h

    def forward(self, state) -> np.ndarray:
        """Single-state q-values, shape (n_actions,)."""
        s = np.asarray(state, dtype=np.float64)
        if s.shape != (self.n_inputs,):
            raise ValueError(f"expected state of shape ({self.n_inputs},), got {s.shape}")
        return self.forward_batch(s[None, :])[0]


def forward(net: QNetwork, state) -> np.ndarray:
    return net.forward(state)


def select_action(net: QNetwork, state, epsilon: float, rng: np.random.Generator) -> int:
    """Epsilon-greedy: uniform random with prob epsilon, else greedy argmax.

    Greedy ties break toward the lowest action index (argmax semantics),
    so behavior is deterministic given the q-values.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(rng.integers(net.n_actions))
    return int(np.argmax(net.forward(state)))


def double_q_target(online: QNetwork, target: QNetwork, t: Transition, discount: float) -> float:
    """Bootstrap target: online net selects the action, target net scores it."""
    if t.terminal:
        return float(t.reward)
    a_star = int(np.argmax(online.forward(t.next_state)))
    return float(t.reward + discount * target.forward(t.next_state)[a_star])


class ReplayBuffer:
    """Fixed-capacity ring of transitions with uniform batch sampling."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._store: list[Transition] = []
        self._next = 0

    def __len__(self) -> int:
        return len(self._store)

    def push(self, t: Transition) -> None:
        if len(self._store) < self.capacity:
            self._store.append(t)
        else:
            self._store[self._next] = t
        self._next = (self._next + 1) % self.capacity

    def sample(self, batch_size: int, rng: np.random.Generator):
        """Uniform sample without replacement, or None while under-filled."""
        if len(self._store) < batch_size:
            return None
        idx = rng.choice(len(self._store), size=batch_size, replace=False)
        return [self._store[i] for i in idx]


class DqnAgent:
    """Online/target network pair plus the AdamW training step."""

    def __init__(self, config: AgentConfig, layer_sizes=DEFAULT_LAYER_SIZES):
        self.config = config
        init_rng = np.random.default_rng(np.random.SeedSequence(config.rng_seed))
        self.online = QNetwork(layer_sizes, init_rng)
        self.target = self.online.clone()
        self.step_count = 0
        params = self.online.parameters()
        self._adam_m = [np.zeros_like(p) for p in params]
        self._adam_v = [np.zeros_like(p) for p in params]

    # -- gradients -------------------------------------------------------

    def _loss_and_grads(self, states, actions, targets):
        """MSE loss at the taken actions and its parameter gradients."""
        net = self.online
        batch = states.shape[0]
        acts = [states]
        pre = []
        h = states
        last = len(net.weights) - 1
        for i, (w, b) in enumerate(zip(net.weights, net.biases)):
            z = h @ w + b
            pre.append(z)
            h = z if i == last else np.maximum(z, 0.0)
            acts.append(h)
        q = acts[-1]
        picked = q[np.arange(batch), actions]
        err = picked - targets
        loss = float(np.mean(err * err))

        dq = np.zeros_like(q)
        dq[np.arange(batch), actions] = 2.0 * err / batch
        grads_w = [None] * len(net.weights)
        grads_b = [None] * len(net.biases)
        delta = dq
        for i in range(last, -1, -1):
            grads_w[i] = acts[i].T @ delta
            grads_b[i] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ net.weights[i].T) * (pre[i - 1] > 0.0)
        grads = []
        for gw, gb in zip(grads_w, grads_b):
            grads.append(gw)
            grads.append(gb)
        return loss, grads

    def _adam_step(self, grads) -> None:
        cfg = self.config
        self.step_count += 1
        t = self.step_count
        corr1 = 1.0 - ADAM_BETA1**t
        corr2 = 1.0 - ADAM_BETA2**t
        for p, g, m, v in zip(self.online.parameters(), grads, self._adam_m, self._adam_v):
            m *= ADAM_BETA1
            m += (1.0 - ADAM_BETA1) * g
            v *= ADAM_BETA2
            v += (1.0 - ADAM_BETA2) * (g * g)
            update = (m / corr1) / (np.sqrt(v / corr2) + ADAM_EPS)
            # decoupled weight decay: not part of the moment estimates
            p -= cfg.learning_rate * (update + cfg.weight_decay * p)

    def train_batch(self, batch: list[Transition]) -> float:
        """One gradient step on a batch; returns the pre-update loss.

        Targets are double-DQN bootstraps treated as constants. The target
        network is refreshed by full copy every `target_sync_period` steps.
        """
        if not batch:
            raise ValueError("batch is empty")
        if len(batch) != self.config.batch_size:
            raise ValueError(
                f"batch size {len(batch)} != configured {self.config.batch_size}"
            )
        states = np.stack([t.state for t in batch]).astype(np.float64)
        actions = np.array([t.action for t in batch], dtype=np.int64)
        next_states = np.stack([t.next_state for t in batch]).astype(np.float64)
        rewards = np.array([t.reward for t in batch], dtype=np.float64)
        terminal = np.array([t.terminal for t in batch], dtype=bool)

        q_next_online = self.online.forward_batch(next_states)
        q_next_target = self.target.forward_batch(next_states)
        a_star = np.argmax(q_next_online, axis=1)
        boot = q_next_target[np.arange(len(batch)), a_star]
        targets = rewards + np.where(terminal, 0.0, self.config.discount * boot)

        loss, grads = self._loss_and_grads(states, actions, targets)
        self._adam_step(grads)
        if self.step_count % self.config.target_sync_period == 0:
            self.target.copy_from(self.online)
        return loss

    # -- persistence -------------------------------------------------------

    def save(self, path, action_mode_ids=AGENT_ACTION_IDS) -> None:
        """Write a versioned checkpoint; round-trips bit-exact."""
        data = {
            "format_version": np.int64(CHECKPOINT_FORMAT_VERSION),
            "layer_sizes": np.asarray(self.online.layer_sizes, dtype=np.int64),
            "step_count": np.int64(self.step_count),
            "action_mode_ids": np.asarray(action_mode_ids, dtype=np.int64),
        }
        for i, (w, b) in enumerate(zip(self.online.weights, self.online.biases)):
            data[f"w{i}"] = w
            data[f"b{i}"] = b
        for i, (w, b) in enumerate(zip(self.target.weights, self.target.biases)):
            data[f"target_w{i}"] = w
            data[f"target_b{i}"] = b
        for i, (m, v) in enumerate(zip(self._adam_m, self._adam_v)):
            data[f"adam_m{i}"] = m
            data[f"adam_v{i}"] = v
        np.savez(path, **data)

    @classmethod
    def load(cls, path, config: AgentConfig) -> "DqnAgent":
        try:
            with np.load(path, allow_pickle=False) as data:
                return cls._from_npz(dict(data), config, path)
        except (OSError, ValueError) as exc:
            raise CheckpointError(f"{path}: cannot read checkpoint: {exc}") from exc

    @classmethod
    def _from_npz(cls, data: dict, config: AgentConfig, path) -> "DqnAgent":
        try:
            version = int(data["format_version"])
            if version != CHECKPOINT_FORMAT_VERSION:
                raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
            sizes = tuple(int(s) for s in data["layer_sizes"])
            agent = cls(config, layer_sizes=sizes)
            agent.step_count = int(data["step_count"])
            n_layers = len(sizes) - 1
            for i in range(n_layers):
                agent.online.weights[i] = _checked(data[f"w{i}"], agent.online.weights[i].shape, path)
                agent.online.biases[i] = _checked(data[f"b{i}"], agent.online.biases[i].shape, path)
                agent.target.weights[i] = _checked(
                    data[f"target_w{i}"], agent.target.weights[i].shape, path
                )
                agent.target.biases[i] = _checked(
                    data[f"target_b{i}"], agent.target.biases[i].shape, path
                )
            # moment arrays follow the parameter order: w0, b0, w1, b1, ...
            params = agent.online.parameters()
            agent._adam_m = [
                _checked(data[f"adam_m{i}"], params[i].shape, path) for i in range(len(params))
            ]
            agent._adam_v = [
                _checked(data[f"adam_v{i}"], params[i].shape, path) for i in range(len(params))
            ]
            return agent
        except KeyError as exc:
            raise CheckpointError(f"{path}: checkpoint missing field {exc}") from exc

    @staticmethod
    def checkpoint_action_ids(path) -> tuple[int, ...]:
        """Action-index to mode-id mapping recorded in a checkpoint."""
        try:
            with np.load(path, allow_pickle=False) as data:
                return tuple(int(i) for i in data["action_mode_ids"])
        except (OSError, ValueError, KeyError) as exc:
            raise CheckpointError(f"{path}: cannot read checkpoint: {exc}") from exc


def _checked(arr: np.ndarray, shape, path) -> np.ndarray:
    arr = np.asarray(arr, dtype=np.float64)
    if shape is not None and arr.shape != tuple(shape):
        raise CheckpointError(f"{path}: checkpoint array has shape {arr.shape}, expected {shape}")
    return arr
