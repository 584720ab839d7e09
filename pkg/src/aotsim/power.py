"""Battery dynamics for the UAV and base station, and the solar Markov process.

All energies are Joules. Within one slot the station first lends the UAV its
charge from the pre-slot reserve, then the slot's harvest arrives, then the
capacity clamp applies.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ContractError

SOLAR_STATE_NAMES = ("excellent", "good", "fair", "poor")


@dataclass(frozen=True)
class UavBattery:
    level: float
    capacity: float

    def __post_init__(self):
        if not (0.0 <= self.level <= self.capacity):
            raise ContractError(f"UAV battery level {self.level} outside [0, {self.capacity}]")


@dataclass(frozen=True)
class StationBattery:
    level: float
    capacity: float

    def __post_init__(self):
        if not (0.0 <= self.level <= self.capacity):
            raise ContractError(f"station level {self.level} outside [0, {self.capacity}]")


@dataclass(frozen=True)
class SolarModel:
    """Four-state weather Markov chain driving the station's energy harvest.

    Per slot the chain advances one transition; the irradiance draw (W/m^2)
    for the occupied state is normal with that state's mean and spread,
    clamped below at zero. Harvested energy is panel_m2 * efficiency *
    slot_seconds * irradiance.
    """

    transition: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray
    panel_m2: float = 10.0
    efficiency: float = 0.15
    slot_seconds: float = 300.0
    initial_state: int = 0
    state_names: tuple[str, ...] = SOLAR_STATE_NAMES

    def __post_init__(self):
        t = np.asarray(self.transition, dtype=float)
        mu = np.asarray(self.mu, dtype=float)
        sigma = np.asarray(self.sigma, dtype=float)
        k = len(self.state_names)
        if t.shape != (k, k) or mu.shape != (k,) or sigma.shape != (k,):
            raise ConfigError(f"solar model needs a {k}x{k} matrix and {k} mu/sigma entries")
        if np.any(t < 0) or np.any(np.abs(t.sum(axis=1) - 1.0) > 1e-9):
            raise ConfigError("each solar transition row must be nonnegative and sum to 1")
        if np.any(sigma < 0):
            raise ConfigError("solar sigma entries must be >= 0")
        if not (0.0 < self.efficiency <= 1.0):
            raise ConfigError(f"solar efficiency must be in (0,1], got {self.efficiency}")
        if self.panel_m2 <= 0:
            raise ConfigError("panel area must be > 0")
        if not (0 <= self.initial_state < k):
            raise ConfigError(f"initial solar state {self.initial_state} out of range")
        object.__setattr__(self, "transition", t)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "_cumrows", np.cumsum(t, axis=1))

    def n_states(self) -> int:
        return len(self.state_names)


def solar_step(model: SolarModel, current_state: int, rng: np.random.Generator):
    """Advance the weather chain one slot; return (next_state, harvested J).

    The harvest is governed by the state occupied during the new slot.
    """
    if not (0 <= current_state < model.n_states()):
        raise ContractError(f"solar state {current_state} out of range")
    u = rng.random()
    next_state = int(np.searchsorted(model._cumrows[current_state], u, side="right"))
    next_state = min(next_state, model.n_states() - 1)
    x = model.mu[next_state]
    if model.sigma[next_state] > 0:
        x = rng.normal(model.mu[next_state], model.sigma[next_state])
    x = max(0.0, x)
    harvested = model.panel_m2 * model.efficiency * model.slot_seconds * x
    return next_state, harvested


def charge_amount(uav_level_after_travel: float, uav_capacity: float, station_level: float) -> float:
    """Energy the station hands over in one recharge slot.

    The UAV absorbs as much as fits, bounded by the station's pre-slot
    reserve; the paper-grade charge rate is one full top-up per slot.
    """
    if uav_level_after_travel < 0 or station_level < 0:
        raise ContractError("negative energy level passed to charge_amount")
    return min(uav_capacity - uav_level_after_travel, station_level)


def station_update(
    station: StationBattery, at_base: bool, charge_given: float, harvested: float
) -> StationBattery:
    """One-slot station ledger: lend charge_given (if the UAV is docked), gain harvest, clamp."""
    if charge_given < 0:
        raise ContractError(f"charge_given must be >= 0, got {charge_given}")
    if not at_base and charge_given != 0.0:
        raise ContractError("station cannot charge a UAV that is not at the base")
    if charge_given > station.level + 1e-9:
        raise ContractError(
            f"station reserve {station.level} cannot cover charge {charge_given}"
        )
    lent = charge_given if at_base else 0.0
    level = min(station.capacity, station.level - lent + harvested)
    return StationBattery(level=max(0.0, level), capacity=station.capacity)


def uav_battery_update(
    batt: UavBattery, travel: float, charge: float, at_base: bool
) -> UavBattery:
    """One-slot UAV ledger: spend travel energy, then absorb charge when docked."""
    if travel < 0 or charge < 0:
        raise ContractError("travel and charge energies must be >= 0")
    if not at_base and charge != 0.0:
        raise ContractError("UAV can only charge at the base")
    if travel > batt.level + 1e-9:
        raise ContractError(
            f"travel energy {travel} exceeds battery level {batt.level}; "
            "the feasibility mask should have prevented this move"
        )
    level = batt.level - min(travel, batt.level)
    if at_base:
        level = min(batt.capacity, level + charge)
    return UavBattery(level=level, capacity=batt.capacity)


def stationary_distribution(transition: np.ndarray) -> np.ndarray:
    """Stationary vector of a row-stochastic matrix (left eigenvector oracle)."""
    t = np.asarray(transition, dtype=float)
    k = t.shape[0]
    a = np.vstack([t.T - np.eye(k), np.ones((1, k))])
    b = np.zeros(k + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a, b, rcond=None)
    return pi


def default_solar_model(slot_seconds: float = 300.0, initial_state: int = 0) -> SolarModel:
    """Sticky four-state default: 0.7 self-transition, uniform leak elsewhere.

    The irradiance means/spreads are plausible clear/cloudy-sky values, not
    calibrated ground truth; override them in the run configuration.
    """
    k = 4
    t = np.full((k, k), 0.1)
    np.fill_diagonal(t, 0.7)
    return SolarModel(
        transition=t,
        mu=np.array([800.0, 400.0, 150.0, 25.0]),
        sigma=np.array([80.0, 60.0, 40.0, 15.0]),
        panel_m2=10.0,
        efficiency=0.15,
        slot_seconds=slot_seconds,
        initial_state=initial_state,
    )
