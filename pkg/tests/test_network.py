import numpy as np
import pytest

from aotsim.network import (
    PARAM_FIELDS,
    apply_adam,
    init_adam,
    init_dueling,
    loss_and_gradients,
    q_forward,
    soft_update,
    zeros_like_params,
)


def tiny_net(seed, in_dim=4, hidden=8, n_actions=3):
    rng = np.random.default_rng(seed)
    return init_dueling(in_dim, n_actions, hidden, rng)


def min_preactivation_gap(params, obs):
    """Smallest |pre-activation| over all ReLU inputs for these observations.

    Central differences are only a valid oracle away from the ReLU kinks, so
    gradient checks reject cases where a perturbation could cross zero.
    """
    from aotsim.network import _forward

    cache = _forward(params, np.atleast_2d(np.asarray(obs, dtype=float)))
    return min(
        float(np.min(np.abs(cache[key]))) for key in ("h_pre", "v1_pre", "a1_pre")
    )


def finite_difference_grads(params, obs, actions, targets, weights, step=1e-4):
    """Central-difference oracle over every parameter entry."""
    grads = zeros_like_params(params)
    for name in PARAM_FIELDS:
        arr = getattr(params, name)
        g = getattr(grads, name)
        it = np.nditer(arr, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            original = arr[idx]
            arr[idx] = original + step
            up, _, _ = loss_and_gradients(params, obs, actions, targets, weights)
            arr[idx] = original - step
            down, _, _ = loss_and_gradients(params, obs, actions, targets, weights)
            arr[idx] = original
            g[idx] = (up - down) / (2 * step)
    return grads


class TestForward:
    def test_constant_advantage_collapses_to_value(self):
        params = tiny_net(0)
        params.w_a2[...] = 0.0
        params.b_a2[...] = 3.7
        obs = np.random.default_rng(1).normal(size=4)
        q, v, adv = q_forward(params, obs)
        assert np.allclose(q, v)
        assert np.allclose(adv, 3.7)

    def test_mean_centering_identity(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            params = tiny_net(rng.integers(1 << 30))
            obs = rng.normal(size=4)
            q, v, _ = q_forward(params, obs)
            assert abs(np.mean(q - v)) < 1e-6

    def test_zero_params_zero_q(self):
        params = tiny_net(3)
        for name in PARAM_FIELDS:
            getattr(params, name)[...] = 0.0
        q, v, adv = q_forward(params, np.ones(4))
        assert np.all(q == 0) and v == 0 and np.all(adv == 0)

    def test_batch_matches_single(self):
        params = tiny_net(4)
        rng = np.random.default_rng(5)
        batch = rng.normal(size=(6, 4))
        q_batch, v_batch, _ = q_forward(params, batch)
        for i in range(6):
            q_one, v_one, _ = q_forward(params, batch[i])
            assert np.allclose(q_one, q_batch[i])
            assert np.isclose(v_one, v_batch[i])

    def test_shape_error(self):
        params = tiny_net(6)
        with pytest.raises(ValueError):
            q_forward(params, np.ones(5))


class TestLossAndGradients:
    def test_zero_loss_zero_grads_at_fixed_point(self):
        params = tiny_net(7)
        rng = np.random.default_rng(8)
        obs = rng.normal(size=(5, 4))
        actions = rng.integers(0, 3, size=5)
        q, _, _ = q_forward(params, obs)
        targets = q[np.arange(5), actions]
        loss, grads, td = loss_and_gradients(params, obs, actions, targets, np.ones(5))
        assert loss == 0.0
        assert np.all(td == 0.0)
        for name in PARAM_FIELDS:
            assert np.all(getattr(grads, name) == 0.0)

    def test_single_transition_loss_is_squared_td(self):
        params = tiny_net(9)
        obs = np.random.default_rng(10).normal(size=(1, 4))
        q, _, _ = q_forward(params, obs)
        target = np.array([q[0, 1] + 2.5])
        loss, _, td = loss_and_gradients(params, obs, np.array([1]), target, np.ones(1))
        assert loss == pytest.approx(2.5**2)
        assert td[0] == pytest.approx(2.5)

    def test_weights_scale_loss(self):
        params = tiny_net(11)
        rng = np.random.default_rng(12)
        obs = rng.normal(size=(4, 4))
        actions = rng.integers(0, 3, size=4)
        targets = rng.normal(size=4)
        loss1, _, _ = loss_and_gradients(params, obs, actions, targets, np.ones(4))
        loss2, _, _ = loss_and_gradients(params, obs, actions, targets, 0.5 * np.ones(4))
        assert loss2 == pytest.approx(0.5 * loss1)

    def test_gradients_match_finite_differences(self):
        rng = np.random.default_rng(13)
        for seed in range(3):
            params = tiny_net(100 + seed)
            obs = rng.normal(size=(4, 4))
            while min_preactivation_gap(params, obs) < 1e-2:
                obs = rng.normal(size=(4, 4))
            actions = rng.integers(0, 3, size=4)
            targets = rng.normal(scale=2.0, size=4)
            weights = rng.uniform(0.2, 1.0, size=4)
            _, grads, _ = loss_and_gradients(params, obs, actions, targets, weights)
            numeric = finite_difference_grads(params, obs, actions, targets, weights)
            for name in PARAM_FIELDS:
                a = getattr(grads, name)
                n = getattr(numeric, name)
                denom = np.maximum(np.abs(n), 1e-6)
                assert np.max(np.abs(a - n) / denom) < 1e-4


class TestAdam:
    def test_zero_gradient_no_move(self):
        params = tiny_net(14)
        before = params.copy()
        adam = init_adam(params)
        apply_adam(params, zeros_like_params(params), adam, lr=0.1)
        for name in PARAM_FIELDS:
            assert np.array_equal(getattr(params, name), getattr(before, name))

    def test_zero_lr_no_move(self):
        params = tiny_net(15)
        before = params.copy()
        adam = init_adam(params)
        grads = zeros_like_params(params)
        grads.w_in[...] = 1.0
        apply_adam(params, grads, adam, lr=0.0)
        assert np.array_equal(params.w_in, before.w_in)

    def test_constant_gradient_step_approaches_lr(self):
        params = tiny_net(16)
        adam = init_adam(params)
        grads = zeros_like_params(params)
        grads.b_v2[...] = 3.0
        lr = 0.01
        prev = params.b_v2.copy()
        for _ in range(300):
            prev = params.b_v2.copy()
            apply_adam(params, grads, adam, lr)
        assert abs(prev[0] - params.b_v2[0]) == pytest.approx(lr, rel=1e-3)

    def test_moments_decay(self):
        params = tiny_net(17)
        adam = init_adam(params)
        grads = zeros_like_params(params)
        grads.w_in[...] = 1.0
        apply_adam(params, grads, adam, lr=0.01)
        m_after_first = adam.m["w_in"].copy()
        apply_adam(params, zeros_like_params(params), adam, lr=0.01)
        assert np.all(np.abs(adam.m["w_in"]) < np.abs(m_after_first))


class TestSoftUpdate:
    def test_tau_one_copies(self):
        online, target = tiny_net(18), tiny_net(19)
        soft_update(online, target, 1.0)
        for name in PARAM_FIELDS:
            assert np.array_equal(getattr(target, name), getattr(online, name))

    def test_geometric_shrink(self):
        online, target = tiny_net(20), tiny_net(21)
        gap0 = np.linalg.norm(online.w_in - target.w_in)
        soft_update(online, target, 0.01)
        gap1 = np.linalg.norm(online.w_in - target.w_in)
        assert gap1 == pytest.approx(0.99 * gap0, rel=1e-9)

    def test_tau_zero_rejected(self):
        online, target = tiny_net(22), tiny_net(23)
        with pytest.raises(ValueError):
            soft_update(online, target, 0.0)
