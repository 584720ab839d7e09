"""Dueling Q-network on plain numpy arrays: forward pass, exact reverse-mode
gradients of the importance-weighted squared TD loss, Adam, and soft target
blending.

Architecture: shared dense layer with ReLU, then a value stream and an
advantage stream (one ReLU hidden layer each); the heads recombine as
Q = V + A - mean(A) so the decomposition is identifiable.
"""

from dataclasses import dataclass, fields

import numpy as np

PARAM_FIELDS = (
    "w_in", "b_in",
    "w_v1", "b_v1", "w_v2", "b_v2",
    "w_a1", "b_a1", "w_a2", "b_a2",
)


@dataclass
class DuelingParams:
    w_in: np.ndarray
    b_in: np.ndarray
    w_v1: np.ndarray
    b_v1: np.ndarray
    w_v2: np.ndarray
    b_v2: np.ndarray
    w_a1: np.ndarray
    b_a1: np.ndarray
    w_a2: np.ndarray
    b_a2: np.ndarray

    @property
    def in_dim(self) -> int:
        return self.w_in.shape[0]

    @property
    def n_actions(self) -> int:
        return self.w_a2.shape[1]

    def copy(self) -> "DuelingParams":
        return DuelingParams(**{f.name: getattr(self, f.name).copy() for f in fields(self)})


def init_dueling(
    in_dim: int, n_actions: int, hidden: int = 256, rng: np.random.Generator | None = None
) -> DuelingParams:
    """Fresh parameters: weights uniform in +-1/sqrt(fan_in), zero biases."""
    rng = rng if rng is not None else np.random.default_rng()

    def w(fan_in, fan_out):
        bound = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=(fan_in, fan_out))

    return DuelingParams(
        w_in=w(in_dim, hidden), b_in=np.zeros(hidden),
        w_v1=w(hidden, hidden), b_v1=np.zeros(hidden),
        w_v2=w(hidden, 1), b_v2=np.zeros(1),
        w_a1=w(hidden, hidden), b_a1=np.zeros(hidden),
        w_a2=w(hidden, n_actions), b_a2=np.zeros(n_actions),
    )


def zeros_like_params(params: DuelingParams) -> DuelingParams:
    return DuelingParams(**{name: np.zeros_like(getattr(params, name)) for name in PARAM_FIELDS})


def _forward(params: DuelingParams, x: np.ndarray) -> dict:
    h_pre = x @ params.w_in + params.b_in
    h = np.maximum(h_pre, 0.0)
    v1_pre = h @ params.w_v1 + params.b_v1
    v1 = np.maximum(v1_pre, 0.0)
    value = v1 @ params.w_v2 + params.b_v2
    a1_pre = h @ params.w_a1 + params.b_a1
    a1 = np.maximum(a1_pre, 0.0)
    adv = a1 @ params.w_a2 + params.b_a2
    q = value + adv - adv.mean(axis=1, keepdims=True)
    return {
        "x": x, "h_pre": h_pre, "h": h,
        "v1_pre": v1_pre, "v1": v1, "value": value,
        "a1_pre": a1_pre, "a1": a1, "adv": adv, "q": q,
    }


def q_forward(params: DuelingParams, obs: np.ndarray):
    """Q values plus the value/advantage decomposition for one or many states."""
    x = np.asarray(obs, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != params.in_dim:
        raise ValueError(f"observation shape {np.shape(obs)} incompatible with input dim {params.in_dim}")
    cache = _forward(params, x)
    q, value, adv = cache["q"], cache["value"][:, 0], cache["adv"]
    if single:
        return q[0], float(value[0]), adv[0]
    return q, value, adv


def loss_and_gradients(params: DuelingParams, obs, actions, targets, weights):
    """Weighted squared-TD loss, its exact gradients, and the raw TD errors.

    loss = sum_i w_i * (target_i - Q(s_i, a_i))^2. Only the taken action's
    Q entry receives direct error signal; the mean-subtraction spreads it
    across all advantage outputs.
    """
    x = np.asarray(obs, dtype=float)
    actions = np.asarray(actions, dtype=np.int64)
    targets = np.asarray(targets, dtype=float)
    weights = np.asarray(weights, dtype=float)
    cache = _forward(params, x)
    q = cache["q"]
    batch = x.shape[0]
    rows = np.arange(batch)
    td = targets - q[rows, actions]
    loss = float(np.sum(weights * td * td))

    g_taken = -2.0 * weights * td
    d_q = np.zeros_like(q)
    d_q[rows, actions] = g_taken
    # Q = V + A - mean(A): value gets the full row signal, advantages get it
    # centered.
    d_value = d_q.sum(axis=1, keepdims=True)
    d_adv = d_q - d_q.sum(axis=1, keepdims=True) / q.shape[1]

    grads = {}
    grads["w_v2"] = cache["v1"].T @ d_value
    grads["b_v2"] = d_value.sum(axis=0)
    d_v1 = (d_value @ params.w_v2.T) * (cache["v1_pre"] > 0)
    grads["w_v1"] = cache["h"].T @ d_v1
    grads["b_v1"] = d_v1.sum(axis=0)

    grads["w_a2"] = cache["a1"].T @ d_adv
    grads["b_a2"] = d_adv.sum(axis=0)
    d_a1 = (d_adv @ params.w_a2.T) * (cache["a1_pre"] > 0)
    grads["w_a1"] = cache["h"].T @ d_a1
    grads["b_a1"] = d_a1.sum(axis=0)

    d_h = d_v1 @ params.w_v1.T + d_a1 @ params.w_a1.T
    d_h_pre = d_h * (cache["h_pre"] > 0)
    grads["w_in"] = x.T @ d_h_pre
    grads["b_in"] = d_h_pre.sum(axis=0)

    return loss, DuelingParams(**grads), td


@dataclass
class AdamState:
    m: dict
    v: dict
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def init_adam(params: DuelingParams) -> AdamState:
    return AdamState(
        m={name: np.zeros_like(getattr(params, name)) for name in PARAM_FIELDS},
        v={name: np.zeros_like(getattr(params, name)) for name in PARAM_FIELDS},
    )


def apply_adam(params: DuelingParams, grads: DuelingParams, adam: AdamState, lr: float) -> None:
    """Bias-corrected Adam update, in place on ``params``."""
    adam.step += 1
    correct1 = 1.0 - adam.beta1**adam.step
    correct2 = 1.0 - adam.beta2**adam.step
    for name in PARAM_FIELDS:
        g = getattr(grads, name)
        m = adam.m[name]
        v = adam.v[name]
        m *= adam.beta1
        m += (1.0 - adam.beta1) * g
        v *= adam.beta2
        v += (1.0 - adam.beta2) * g * g
        update = (m / correct1) / (np.sqrt(v / correct2) + adam.eps)
        getattr(params, name)[...] -= lr * update


def soft_update(online: DuelingParams, target: DuelingParams, tau: float) -> None:
    """Geometric blend of online parameters into the target network."""
    if not (0.0 < tau <= 1.0):
        raise ValueError(f"soft update factor must be in (0, 1], got {tau}")
    for name in PARAM_FIELDS:
        t = getattr(target, name)
        t *= 1.0 - tau
        t += tau * getattr(online, name)
