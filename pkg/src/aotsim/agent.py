"""PD3QN agent: masked epsilon-greedy control, double-DQN targets, prioritized
replay, Adam updates, and periodic soft target synchronization.
"""

import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConfigError, ContractError
from .network import (
    PARAM_FIELDS,
    AdamState,
    DuelingParams,
    apply_adam,
    init_adam,
    init_dueling,
    loss_and_gradients,
    q_forward,
    soft_update,
)
from .replay import ReplayBuffer, Transition

CHECKPOINT_FORMAT = "aotsim-checkpoint"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class AgentHyper:
    lr: float = 1e-4
    gamma: float = 0.5
    eps_start: float = 1.0
    eps_end: float = 0.05
    batch: int = 32
    target_period: int = 200
    soft_tau: float = 0.01
    train_start: int = 320
    buffer_capacity: int = 4000
    alpha: float = 0.2
    beta_start: float = 0.6
    beta_end: float = 1.0
    eps_priority: float = 1e-5
    hidden: int = 256
    eps_anneal_slots: int = 160000
    beta_anneal_steps: int = 160000

    def __post_init__(self):
        if not (0.0 <= self.gamma <= 1.0):
            raise ConfigError(f"gamma must be in [0,1], got {self.gamma}")
        if not (0.0 < self.soft_tau <= 1.0):
            raise ConfigError(f"soft_tau must be in (0,1], got {self.soft_tau}")
        if self.batch > self.buffer_capacity:
            raise ConfigError("batch size cannot exceed buffer capacity")
        if self.lr <= 0:
            raise ConfigError("learning rate must be > 0")
        if self.eps_anneal_slots <= 0 or self.beta_anneal_steps <= 0:
            raise ConfigError("annealing horizons must be > 0")


def masked_argmax(q: np.ndarray, mask: np.ndarray) -> int:
    """Index of the best feasible action; ties go to the lowest index."""
    if not mask.any():
        raise ContractError("empty feasibility mask")
    masked = np.where(mask, q, -np.inf)
    return int(np.argmax(masked))


class PD3QNAgent:
    """Single-owner training agent; copy parameters out for frozen evaluation."""

    def __init__(
        self,
        obs_dim: int,
        n_actions: int,
        hyper: AgentHyper = AgentHyper(),
        rng: np.random.Generator | None = None,
    ):
        self.obs_dim = obs_dim
        self.n_actions = n_actions
        self.hyper = hyper
        self.rng = rng if rng is not None else np.random.default_rng()
        self.online = init_dueling(obs_dim, n_actions, hyper.hidden, self.rng)
        self.target = self.online.copy()
        self.adam = init_adam(self.online)
        self.buffer = ReplayBuffer(
            capacity=hyper.buffer_capacity,
            alpha=hyper.alpha,
            eps_priority=hyper.eps_priority,
            beta=hyper.beta_start,
        )
        self.train_steps = 0
        self.train_slots = 0

    @property
    def epsilon(self) -> float:
        """Exploration rate: linear decay over the training-phase slots."""
        h = self.hyper
        frac = min(1.0, self.train_slots / h.eps_anneal_slots)
        return h.eps_start + (h.eps_end - h.eps_start) * frac

    @property
    def beta(self) -> float:
        """Importance-sampling exponent: linear anneal over training steps."""
        h = self.hyper
        frac = min(1.0, self.train_steps / h.beta_anneal_steps)
        return h.beta_start + (h.beta_end - h.beta_start) * frac

    def advance_slot(self) -> None:
        self.train_slots += 1

    def select_action(self, obs: np.ndarray, mask: np.ndarray, epsilon: float) -> int:
        """Masked epsilon-greedy: explore uniformly over feasible actions."""
        feasible = np.flatnonzero(mask)
        if feasible.size == 0:
            raise ContractError("no feasible action to select")
        if epsilon > 0 and self.rng.random() < epsilon:
            return int(feasible[self.rng.integers(feasible.size)])
        q, _, _ = q_forward(self.online, obs)
        return masked_argmax(q, mask)

    def store(self, transition: Transition) -> None:
        self.buffer.insert(transition)

    def td_targets(self, transitions: list) -> np.ndarray:
        """Double-DQN targets: online network picks, target network prices.

        Episodes have a fixed horizon with no terminal states, so every
        target bootstraps.
        """
        next_obs = np.stack([t.next_obs for t in transitions])
        next_mask = np.stack([t.next_mask for t in transitions])
        rewards = np.array([t.reward for t in transitions])
        q_online, _, _ = q_forward(self.online, next_obs)
        q_target, _, _ = q_forward(self.target, next_obs)
        masked = np.where(next_mask, q_online, -np.inf)
        a_star = np.argmax(masked, axis=1)
        rows = np.arange(len(transitions))
        return rewards + self.hyper.gamma * q_target[rows, a_star]

    def train_step(self):
        """One optimization step; returns the loss, or None before warm-up."""
        if len(self.buffer) < self.hyper.train_start:
            return None
        self.buffer.beta = self.beta
        batch = self.buffer.sample(self.hyper.batch, self.rng)
        if batch is None:
            return None
        targets = self.td_targets(batch.transitions)
        obs = np.stack([t.obs for t in batch.transitions])
        actions = np.array([t.action for t in batch.transitions])
        loss, grads, td = loss_and_gradients(self.online, obs, actions, targets, batch.weights)
        apply_adam(self.online, grads, self.adam, self.hyper.lr)
        self.buffer.update_priorities(batch.indices, td)
        self.train_steps += 1
        if self.train_steps % self.hyper.target_period == 0:
            soft_update(self.online, self.target, self.hyper.soft_tau)
        return loss

    def save(self, path) -> None:
        """Write a versioned checkpoint; loading restores training exactly."""
        meta = {
            "format": CHECKPOINT_FORMAT,
            "version": CHECKPOINT_VERSION,
            "obs_dim": self.obs_dim,
            "n_actions": self.n_actions,
            "hyper": asdict(self.hyper),
            "adam_step": self.adam.step,
            "train_steps": self.train_steps,
            "train_slots": self.train_slots,
            "rng_state": self.rng.bit_generator.state,
        }
        arrays = {}
        for name in PARAM_FIELDS:
            arrays[f"online_{name}"] = getattr(self.online, name)
            arrays[f"target_{name}"] = getattr(self.target, name)
            arrays[f"adam_m_{name}"] = self.adam.m[name]
            arrays[f"adam_v_{name}"] = self.adam.v[name]
        np.savez(path, meta=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8), **arrays)

    @classmethod
    def load(cls, path) -> "PD3QNAgent":
        try:
            with np.load(path) as data:
                meta = json.loads(bytes(data["meta"].tobytes()).decode())
                if meta.get("format") != CHECKPOINT_FORMAT:
                    raise ConfigError(f"{path} is not an agent checkpoint")
                if meta.get("version") != CHECKPOINT_VERSION:
                    raise ConfigError(
                        f"checkpoint version {meta.get('version')} unsupported "
                        f"(expected {CHECKPOINT_VERSION})"
                    )
                hyper = AgentHyper(**meta["hyper"])
                agent = cls.__new__(cls)
                agent.obs_dim = meta["obs_dim"]
                agent.n_actions = meta["n_actions"]
                agent.hyper = hyper
                agent.rng = np.random.default_rng()
                agent.rng.bit_generator.state = meta["rng_state"]
                agent.online = DuelingParams(
                    **{name: data[f"online_{name}"].copy() for name in PARAM_FIELDS}
                )
                agent.target = DuelingParams(
                    **{name: data[f"target_{name}"].copy() for name in PARAM_FIELDS}
                )
                agent.adam = AdamState(
                    m={name: data[f"adam_m_{name}"].copy() for name in PARAM_FIELDS},
                    v={name: data[f"adam_v_{name}"].copy() for name in PARAM_FIELDS},
                    step=meta["adam_step"],
                )
                agent.buffer = ReplayBuffer(
                    capacity=hyper.buffer_capacity,
                    alpha=hyper.alpha,
                    eps_priority=hyper.eps_priority,
                    beta=hyper.beta_start,
                )
                agent.train_steps = meta["train_steps"]
                agent.train_slots = meta["train_slots"]
                return agent
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(f"cannot load checkpoint {path}: {exc}") from exc
