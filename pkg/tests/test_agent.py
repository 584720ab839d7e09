import numpy as np
import pytest

from aotsim.agent import AgentHyper, PD3QNAgent, masked_argmax
from aotsim.errors import ConfigError, ContractError
from aotsim.network import PARAM_FIELDS, q_forward
from aotsim.replay import Transition


def small_agent(seed=0, obs_dim=5, n_actions=4, **overrides):
    hyper = AgentHyper(
        hidden=16,
        batch=8,
        buffer_capacity=64,
        train_start=8,
        target_period=5,
        eps_anneal_slots=100,
        beta_anneal_steps=100,
        **overrides,
    )
    return PD3QNAgent(obs_dim, n_actions, hyper, np.random.default_rng(seed))


def random_transition(rng, obs_dim=5, n_actions=4):
    mask = np.zeros(n_actions, dtype=bool)
    mask[rng.integers(n_actions)] = True
    mask |= rng.random(n_actions) < 0.6
    return Transition(
        obs=rng.normal(size=obs_dim),
        action=int(rng.integers(n_actions)),
        reward=float(rng.normal()),
        next_obs=rng.normal(size=obs_dim),
        next_mask=mask,
    )


class TestSelectAction:
    def test_greedy_is_masked_argmax(self):
        agent = small_agent(1)
        rng = np.random.default_rng(2)
        for _ in range(50):
            obs = rng.normal(size=5)
            mask = rng.random(4) < 0.7
            if not mask.any():
                mask[0] = True
            q, _, _ = q_forward(agent.online, obs)
            assert agent.select_action(obs, mask, epsilon=0.0) == masked_argmax(q, mask)

    def test_full_exploration_is_uniform_over_mask(self):
        agent = small_agent(3)
        mask = np.array([True, False, True, True])
        counts = np.zeros(4)
        n = 100_000
        obs = np.zeros(5)
        for _ in range(n):
            counts[agent.select_action(obs, mask, epsilon=1.0)] += 1
        assert counts[1] == 0
        assert np.all(np.abs(counts[[0, 2, 3]] / n - 1 / 3) < 0.02)

    def test_singleton_mask_forces_action(self):
        agent = small_agent(4)
        mask = np.zeros(4, dtype=bool)
        mask[3] = True
        for eps in (0.0, 0.5, 1.0):
            assert agent.select_action(np.zeros(5), mask, epsilon=eps) == 3

    def test_empty_mask_rejected(self):
        agent = small_agent(5)
        with pytest.raises(ContractError):
            agent.select_action(np.zeros(5), np.zeros(4, dtype=bool), epsilon=0.0)

    def test_argmax_ties_break_low(self):
        q = np.array([1.0, 5.0, 5.0, 0.0])
        assert masked_argmax(q, np.array([True] * 4)) == 1
        assert masked_argmax(q, np.array([True, False, True, True])) == 2


class TestTdTargets:
    def test_gamma_zero_targets_are_rewards(self):
        agent = small_agent(6, **{"gamma": 0.0})
        rng = np.random.default_rng(7)
        batch = [random_transition(rng) for _ in range(6)]
        targets = agent.td_targets(batch)
        assert np.allclose(targets, [t.reward for t in batch])

    def test_bootstrap_arithmetic(self):
        agent = small_agent(8, **{"gamma": 0.5})
        tr = random_transition(np.random.default_rng(9))
        q_online, _, _ = q_forward(agent.online, tr.next_obs)
        a_star = masked_argmax(q_online, tr.next_mask)
        q_target, _, _ = q_forward(agent.target, tr.next_obs)
        expected = tr.reward + 0.5 * q_target[a_star]
        assert agent.td_targets([tr])[0] == pytest.approx(expected)

    def test_double_decoupling(self):
        # Force online and target nets to disagree on the best action; the
        # bootstrap must use online's argmax priced by the target net.
        agent = small_agent(10, **{"gamma": 1.0})
        for name in PARAM_FIELDS:
            getattr(agent.online, name)[...] = 0.0
            getattr(agent.target, name)[...] = 0.0
        agent.online.b_a2[...] = np.array([0.0, 10.0, 0.0, 0.0])   # online picks 1
        agent.target.b_a2[...] = np.array([0.0, 0.0, 40.0, 0.0])   # target favors 2
        tr = Transition(
            obs=np.zeros(5),
            action=0,
            reward=1.0,
            next_obs=np.zeros(5),
            next_mask=np.ones(4, dtype=bool),
        )
        q_target, _, _ = q_forward(agent.target, tr.next_obs)
        assert agent.td_targets([tr])[0] == pytest.approx(1.0 + q_target[1])


class TestTrainStep:
    def test_not_ready_before_threshold(self):
        agent = small_agent(11)
        rng = np.random.default_rng(12)
        for _ in range(agent.hyper.train_start - 1):
            agent.store(random_transition(rng))
        assert agent.train_step() is None
        agent.store(random_transition(rng))
        assert agent.train_step() is not None

    def test_soft_update_fires_on_period(self):
        agent = small_agent(13)
        rng = np.random.default_rng(14)
        for _ in range(32):
            agent.store(random_transition(rng))
        target_before = agent.target.copy()
        for step in range(1, 11):
            agent.train_step()
            changed = any(
                not np.array_equal(getattr(agent.target, n), getattr(target_before, n))
                for n in PARAM_FIELDS
            )
            if step < agent.hyper.target_period:
                assert not changed
            if step == agent.hyper.target_period:
                assert changed
                break

    def test_priorities_updated_after_training(self):
        agent = small_agent(15)
        rng = np.random.default_rng(16)
        for _ in range(32):
            agent.store(random_transition(rng))
        assert np.all(agent.buffer.raw_priority[:32] == 1.0)
        agent.train_step()
        assert np.any(agent.buffer.raw_priority[:32] != 1.0)

    def test_epsilon_schedule_endpoints(self):
        agent = small_agent(17)
        assert agent.epsilon == 1.0
        for _ in range(100):
            agent.advance_slot()
        assert agent.epsilon == pytest.approx(0.05)
        agent.advance_slot()
        assert agent.epsilon == pytest.approx(0.05)

    def test_beta_schedule_endpoints(self):
        agent = small_agent(18)
        assert agent.beta == pytest.approx(0.6)
        agent.train_steps = 100
        assert agent.beta == pytest.approx(1.0)

    def test_deterministic_parameter_trajectory(self):
        results = []
        for _ in range(2):
            agent = small_agent(19)
            rng = np.random.default_rng(20)
            for _ in range(40):
                agent.store(random_transition(rng))
            for _ in range(25):
                agent.train_step()
            results.append(agent.online.copy())
        for name in PARAM_FIELDS:
            assert np.array_equal(getattr(results[0], name), getattr(results[1], name))


class TestCheckpoint:
    def test_round_trip_exact(self, tmp_path):
        agent = small_agent(21)
        rng = np.random.default_rng(22)
        for _ in range(40):
            agent.store(random_transition(rng))
        for _ in range(12):
            agent.train_step()
        path = tmp_path / "ckpt.npz"
        agent.save(path)
        loaded = PD3QNAgent.load(path)
        for name in PARAM_FIELDS:
            assert np.array_equal(getattr(loaded.online, name), getattr(agent.online, name))
            assert np.array_equal(getattr(loaded.target, name), getattr(agent.target, name))
            assert np.array_equal(loaded.adam.m[name], agent.adam.m[name])
            assert np.array_equal(loaded.adam.v[name], agent.adam.v[name])
        assert loaded.adam.step == agent.adam.step
        assert loaded.train_steps == agent.train_steps
        assert loaded.train_slots == agent.train_slots
        assert loaded.rng.bit_generator.state == agent.rng.bit_generator.state
        assert loaded.hyper == agent.hyper

    def test_corrupt_file_rejected(self, tmp_path):
        path = tmp_path / "junk.npz"
        path.write_bytes(b"not a checkpoint")
        with pytest.raises(ConfigError):
            PD3QNAgent.load(path)

    def test_wrong_format_rejected(self, tmp_path):
        path = tmp_path / "other.npz"
        np.savez(path, meta=np.frombuffer(b'{"format": "other"}', dtype=np.uint8))
        with pytest.raises(ConfigError):
            PD3QNAgent.load(path)


class TestHyperValidation:
    def test_bad_gamma(self):
        with pytest.raises(ConfigError):
            AgentHyper(gamma=1.5)

    def test_bad_tau(self):
        with pytest.raises(ConfigError):
            AgentHyper(soft_tau=0.0)

    def test_batch_larger_than_buffer(self):
        with pytest.raises(ConfigError):
            AgentHyper(batch=64, buffer_capacity=32)
