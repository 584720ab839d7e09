"""Non-learning comparison policies, all restricted to the feasibility mask."""

import numpy as np

from .errors import ContractError


def rand_policy(mask: np.ndarray, rng: np.random.Generator) -> int:
    """Uniform choice over the feasible actions."""
    feasible = np.flatnonzero(mask)
    if feasible.size == 0:
        raise ContractError("empty feasibility mask")
    return int(feasible[rng.integers(feasible.size)])


def maf_policy(state, mask: np.ndarray, base_index: int) -> int:
    """Device with the globally maximum trust age; base when it is unreachable.

    The oldest device stays the target even when the battery cannot cover the
    trip; the UAV then recharges instead of letting the zero-cost stay-put
    move shadow the real target indefinitely. Ties break to the lowest index.
    """
    target = int(np.argmax(state.aot))
    if mask[target]:
        return target
    if not mask[base_index]:
        raise ContractError("empty feasibility mask")
    return base_index


def nf_policy(state, mask: np.ndarray, last_visited, env) -> int:
    """Nearest feasible device not visited in the immediately preceding slot.

    Distance is measured from the UAV's current position; only the single
    previous target is excluded. Base when no device qualifies.
    """
    base_index = env.base_index
    device_mask = mask[:base_index].copy()
    if last_visited is not None and last_visited < base_index:
        device_mask[last_visited] = False
    if not device_mask.any():
        if not mask[base_index]:
            raise ContractError("empty feasibility mask")
        return base_index
    dist = np.where(device_mask, env.dist[state.position, :base_index], np.inf)
    return int(np.argmin(dist))


class BaselineActor:
    """Adapter giving the three baselines one episode-facing interface."""

    def __init__(self, name: str, rng: np.random.Generator | None = None):
        if name not in ("rand", "maf", "nf"):
            raise ValueError(f"unknown baseline {name!r}")
        self.name = name
        self.rng = rng if rng is not None else np.random.default_rng()
        self._last_visited = None

    def begin_episode(self) -> None:
        self._last_visited = None

    def on_outcome(self, env, outcome):
        return None

    def act(self, env) -> int:
        state = env.state
        mask = env.feasible_mask()
        if self.name == "rand":
            action = rand_policy(mask, self.rng)
        elif self.name == "maf":
            action = maf_policy(state, mask, env.base_index)
        else:
            action = nf_policy(state, mask, self._last_visited, env)
        self._last_visited = action if action < env.base_index else None
        return action
