import numpy as np
import pytest

from aotsim.errors import ConfigError, ContractError
from aotsim.power import (
    SolarModel,
    StationBattery,
    UavBattery,
    charge_amount,
    default_solar_model,
    solar_step,
    station_update,
    stationary_distribution,
    uav_battery_update,
)


def degenerate_solar(mu, transition=None, slot_seconds=300.0):
    k = len(mu)
    t = np.eye(k) if transition is None else np.asarray(transition, dtype=float)
    return SolarModel(
        transition=t,
        mu=np.asarray(mu, dtype=float),
        sigma=np.zeros(k),
        panel_m2=10.0,
        efficiency=0.15,
        slot_seconds=slot_seconds,
        initial_state=0,
        state_names=tuple(f"s{i}" for i in range(k)),
    )


class TestSolar:
    def test_degenerate_normal_exact(self):
        model = degenerate_solar([200.0, 0.0, 0.0, 0.0])
        rng = np.random.default_rng(0)
        _, harvested = solar_step(model, 0, rng)
        assert harvested == 10.0 * 0.15 * 300.0 * 200.0

    def test_identity_transition_freezes_state(self):
        model = degenerate_solar([1.0, 2.0, 3.0, 4.0])
        rng = np.random.default_rng(1)
        state = 2
        for _ in range(50):
            state, _ = solar_step(model, state, rng)
            assert state == 2

    def test_occupancy_matches_stationary_distribution(self):
        model = default_solar_model()
        pi = stationary_distribution(model.transition)
        rng = np.random.default_rng(7)
        counts = np.zeros(4)
        state = 0
        n = 1_000_000
        for _ in range(n):
            state, _ = solar_step(model, state, rng)
            counts[state] += 1
        assert np.all(np.abs(counts / n - pi) < 0.01)

    def test_negative_draws_clamp_to_zero(self):
        model = SolarModel(
            transition=np.eye(4),
            mu=np.array([-500.0, 0.0, 0.0, 0.0]),
            sigma=np.array([1.0, 0.0, 0.0, 0.0]),
            panel_m2=10.0,
            efficiency=0.15,
            slot_seconds=300.0,
        )
        rng = np.random.default_rng(3)
        for _ in range(20):
            _, harvested = solar_step(model, 0, rng)
            assert harvested == 0.0

    def test_bad_transition_rejected(self):
        with pytest.raises(ConfigError):
            degenerate_solar([1, 1, 1, 1], transition=np.full((4, 4), 0.3))

    def test_bad_efficiency_rejected(self):
        with pytest.raises(ConfigError):
            SolarModel(
                transition=np.eye(4),
                mu=np.zeros(4),
                sigma=np.zeros(4),
                efficiency=0.0,
            )


class TestStation:
    def test_idle_slot_unchanged(self):
        st = StationBattery(level=5000.0, capacity=10000.0)
        assert station_update(st, False, 0.0, 0.0).level == 5000.0

    def test_clamp_at_capacity(self):
        st = StationBattery(level=10000.0, capacity=10000.0)
        assert station_update(st, False, 0.0, 999.0).level == 10000.0

    def test_arithmetic(self):
        st = StationBattery(level=100.0, capacity=10000.0)
        assert station_update(st, True, 40.0, 10.0).level == 70.0

    def test_overdraw_rejected(self):
        st = StationBattery(level=100.0, capacity=10000.0)
        with pytest.raises(ContractError):
            station_update(st, True, 150.0, 0.0)

    def test_charge_away_from_base_rejected(self):
        st = StationBattery(level=100.0, capacity=10000.0)
        with pytest.raises(ContractError):
            station_update(st, False, 10.0, 0.0)


class TestChargeAmount:
    def test_full_uav_takes_nothing(self):
        assert charge_amount(277200.0, 277200.0, 99999.0) == 0.0

    def test_empty_station_gives_nothing(self):
        assert charge_amount(1000.0, 277200.0, 0.0) == 0.0

    def test_station_bound(self):
        assert charge_amount(200000.0, 277200.0, 50000.0) == 50000.0

    def test_headroom_bound(self):
        assert charge_amount(250000.0, 277200.0, 999999.0) == 27200.0


class TestUavBattery:
    def test_no_op(self):
        b = UavBattery(level=5000.0, capacity=277200.0)
        assert uav_battery_update(b, 0.0, 0.0, False).level == 5000.0

    def test_travel_drain(self):
        b = UavBattery(level=1000.0, capacity=277200.0)
        assert uav_battery_update(b, 300.0, 0.0, False).level == 700.0

    def test_clamp_at_capacity(self):
        b = UavBattery(level=277190.0, capacity=277200.0)
        assert uav_battery_update(b, 0.0, 50.0, True).level == 277200.0

    def test_overdraft_rejected(self):
        b = UavBattery(level=100.0, capacity=277200.0)
        with pytest.raises(ContractError):
            uav_battery_update(b, 200.0, 0.0, False)

    def test_charge_away_from_base_rejected(self):
        b = UavBattery(level=100.0, capacity=277200.0)
        with pytest.raises(ContractError):
            uav_battery_update(b, 0.0, 10.0, False)

    def test_level_bounds_enforced(self):
        with pytest.raises(ContractError):
            UavBattery(level=-1.0, capacity=100.0)
        with pytest.raises(ContractError):
            UavBattery(level=101.0, capacity=100.0)


class TestLedgers:
    def test_uav_ledger_without_clamps(self):
        rng = np.random.default_rng(5)
        capacity = 1e15
        level = 1e12
        b = UavBattery(level=level, capacity=capacity)
        spent = 0.0
        gained = 0.0
        for _ in range(2000):
            travel = float(rng.uniform(0, 5e4))
            at_base = bool(rng.random() < 0.3)
            charge = float(rng.uniform(0, 1e5)) if at_base else 0.0
            b = uav_battery_update(b, travel, charge, at_base)
            spent += travel
            gained += charge
        assert b.level == pytest.approx(level - spent + gained, rel=1e-9)

    def test_station_ledger_without_clamps(self):
        rng = np.random.default_rng(6)
        capacity = 1e15
        level = 1e12
        st = StationBattery(level=level, capacity=capacity)
        lent = 0.0
        harvested_total = 0.0
        for _ in range(2000):
            at_base = bool(rng.random() < 0.3)
            charge = float(rng.uniform(0, 1e5)) if at_base else 0.0
            harvested = float(rng.uniform(0, 2e5))
            st = station_update(st, at_base, charge, harvested)
            lent += charge
            harvested_total += harvested
        assert st.level == pytest.approx(level - lent + harvested_total, rel=1e-9)
