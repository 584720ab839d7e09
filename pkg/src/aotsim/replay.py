"""Prioritized experience replay: sum-tree storage, stratified sampling with
importance weights, and TD-error priority refresh.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError


class Transition(NamedTuple):
    obs: np.ndarray
    action: int
    reward: float
    next_obs: np.ndarray
    next_mask: np.ndarray


class SumTree:
    """Binary tree over leaf priorities supporting prefix-sum lookup.

    Flat array of size 2*capacity-1; internal node i has children 2i+1 and
    2i+2, leaves sit at capacity-1..2*capacity-2, and the root carries the
    total mass.
    """

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.tree = np.zeros(2 * capacity - 1)

    def update(self, leaf: int, value: float) -> None:
        idx = leaf + self.capacity - 1
        change = value - self.tree[idx]
        self.tree[idx] = value
        while idx != 0:
            idx = (idx - 1) // 2
            self.tree[idx] += change

    def leaf_value(self, leaf: int) -> float:
        return float(self.tree[leaf + self.capacity - 1])

    def leaf_values(self) -> np.ndarray:
        return self.tree[self.capacity - 1 :]

    @property
    def total(self) -> float:
        return float(self.tree[0])

    def locate(self, mass: float) -> int:
        """Leaf index whose cumulative-priority interval contains ``mass``."""
        idx = 0
        while True:
            left = 2 * idx + 1
            if left >= len(self.tree):
                return idx - (self.capacity - 1)
            if mass <= self.tree[left]:
                idx = left
            else:
                mass -= self.tree[left]
                idx = left + 1


@dataclass
class SampledBatch:
    transitions: list
    indices: np.ndarray
    probs: np.ndarray
    weights: np.ndarray


class ReplayBuffer:
    """Ring buffer of transitions sampled proportionally to priority^alpha.

    New transitions enter at the current maximum raw priority so everything
    gets replayed at least once; priorities are refreshed to |TD error| +
    eps_priority after each training step. Importance weights follow
    (1 / (N * P(i)))^beta, normalized by the largest weight over the whole
    buffer so they stay in (0, 1].
    """

    def __init__(self, capacity: int, alpha: float, eps_priority: float, beta: float = 0.6):
        if capacity <= 0:
            raise ConfigError("replay capacity must be > 0")
        if alpha < 0:
            raise ConfigError("alpha must be >= 0")
        if eps_priority <= 0:
            raise ConfigError("eps_priority must be > 0")
        self.capacity = capacity
        self.alpha = alpha
        self.eps_priority = eps_priority
        self.beta = beta
        self.tree = SumTree(capacity)
        self.data: list = [None] * capacity
        self.raw_priority = np.zeros(capacity)
        self.size = 0
        self._write = 0

    def __len__(self) -> int:
        return self.size

    def insert(self, transition) -> None:
        raw = self.raw_priority[: self.size].max() if self.size else 1.0
        self.data[self._write] = transition
        self.raw_priority[self._write] = raw
        self.tree.update(self._write, raw**self.alpha)
        self._write = (self._write + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def update_priorities(self, indices, td_errors) -> None:
        for idx, err in zip(indices, td_errors):
            raw = abs(float(err)) + self.eps_priority
            self.raw_priority[idx] = raw
            self.tree.update(int(idx), raw**self.alpha)

    def sample(self, batch: int, rng: np.random.Generator) -> SampledBatch | None:
        """Stratified draw of ``batch`` transitions, or None while underfilled."""
        if self.size < batch:
            return None
        total = self.tree.total
        segment = total / batch
        indices = np.empty(batch, dtype=np.int64)
        for k in range(batch):
            mass = (k + rng.random()) * segment
            indices[k] = self.tree.locate(min(mass, total * (1 - 1e-12)))
        leaf = self.tree.leaf_values()
        probs = leaf[indices] / total
        min_prob = leaf[: self.size].min() / total
        max_weight = (1.0 / (self.size * min_prob)) ** self.beta
        weights = (1.0 / (self.size * probs)) ** self.beta / max_weight
        return SampledBatch(
            transitions=[self.data[i] for i in indices],
            indices=indices,
            probs=probs,
            weights=weights,
        )
