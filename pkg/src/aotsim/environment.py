"""One-slot MDP dynamics: trust-age bookkeeping, energy-feasible action
masking, battery and solar updates, and the weighted reward.

Action indices 0..n-1 send the UAV to a device for attestation; action n is
a return to base for one recharge slot. Per slot exactly one of the two
happens: a single device goes offline (its trust age resets to 1, throughput
drops to the precomputed degraded value) or the UAV docks (full throughput,
all ages grow).
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ContractError
from .kinetics import FlightParams, travel_distance, trip_energy_matrix
from .power import (
    SolarModel,
    StationBattery,
    UavBattery,
    charge_amount,
    solar_step,
    station_update,
    uav_battery_update,
)
from .topology import DeviceGraph, ThroughputTable


@dataclass
class EnvState:
    aot: np.ndarray
    position: int
    uav_level: float
    station_level: float
    solar_state: int
    slot: int

    def copy(self) -> "EnvState":
        return EnvState(
            aot=self.aot.copy(),
            position=self.position,
            uav_level=self.uav_level,
            station_level=self.station_level,
            solar_state=self.solar_state,
            slot=self.slot,
        )


@dataclass(frozen=True)
class StepOutcome:
    next_state: EnvState
    reward: float
    throughput: float
    avg_aot: float
    attested: int | None
    travel_j: float
    charge_j: float
    harvested_j: float


def average_aot(aot) -> float:
    """Arithmetic mean trust age over the device vector."""
    arr = np.asarray(aot)
    if arr.size == 0:
        raise ValueError("cannot average an empty trust-age vector")
    return float(arr.mean())


class UavEnv:
    """Simulation environment owned by a single run; not thread-safe.

    Hop energies, return-trip costs, and per-device degraded throughputs are
    all precomputed from the static graph, so a step is a handful of array
    lookups. Construction fails if any hop would need more than v_max.
    """

    def __init__(
        self,
        graph: DeviceGraph,
        table: ThroughputTable,
        flight: FlightParams,
        solar: SolarModel,
        uav_capacity_j: float,
        station_capacity_j: float,
        station_initial_j: float,
        age_weight: float = 10.0,
        flow_weight: float = 0.5,
        aot_norm: float = 50.0,
        initial_aot: str = "ones",
        rng: np.random.Generator | None = None,
    ):
        if uav_capacity_j <= 0 or station_capacity_j <= 0:
            raise ConfigError("battery capacities must be > 0")
        if not (0.0 <= station_initial_j <= station_capacity_j):
            raise ConfigError("initial station energy must lie within [0, capacity]")
        if aot_norm <= 0:
            raise ConfigError("aot_norm must be > 0")
        if initial_aot not in ("ones", "random"):
            raise ConfigError(f"initial_aot must be 'ones' or 'random', got {initial_aot!r}")

        self.graph = graph
        self.table = table
        self.flight = flight
        self.solar = solar
        self.uav_capacity = float(uav_capacity_j)
        self.station_capacity = float(station_capacity_j)
        self.station_initial = float(station_initial_j)
        self.age_weight = float(age_weight)
        self.flow_weight = float(flow_weight)
        self.aot_norm = float(aot_norm)
        self.initial_aot = initial_aot
        self._rng = rng if rng is not None else np.random.default_rng()

        self.device_ids = graph.devices
        self.n_devices = len(self.device_ids)
        if self.n_devices == 0:
            raise ConfigError("graph has no attestable devices")
        self.base_index = self.n_devices
        self.n_actions = self.n_devices + 1

        coords = [graph.nodes[d] for d in self.device_ids] + [graph.base]
        self.coords = coords
        self.energy = trip_energy_matrix(coords, flight)
        self.dist = np.array(
            [[travel_distance(a, b) for b in coords] for a in coords]
        )
        self._return_cost = self.energy[:, self.base_index].copy()
        # cost[p, i]: go to device i, then still be able to reach the base
        self._move_cost = self.energy[:, : self.n_devices] + self._return_cost[: self.n_devices]

        missing = [d for d in self.device_ids if d not in table.degraded]
        if missing:
            raise ConfigError(f"throughput table lacks degraded flows for devices {missing}")
        self._degraded = np.array([table.degraded[d] for d in self.device_ids])
        self.full_throughput = table.full

        self._state: EnvState | None = None
        self._aot_sum = 0

    @property
    def state(self) -> EnvState:
        if self._state is None:
            raise ContractError("environment not reset")
        return self._state

    def reset(self) -> EnvState:
        if self.initial_aot == "random":
            aot = self._rng.integers(1, int(self.aot_norm) + 1, size=self.n_devices)
        else:
            aot = np.ones(self.n_devices, dtype=np.int64)
        self._state = EnvState(
            aot=aot.astype(np.int64),
            position=self.base_index,
            uav_level=self.uav_capacity,
            station_level=self.station_initial,
            solar_state=self.solar.initial_state,
            slot=0,
        )
        self._aot_sum = int(aot.sum())
        return self._state

    def feasible_mask(self, state: EnvState | None = None) -> np.ndarray:
        """Boolean mask over actions: device trips must leave return energy."""
        s = self.state if state is None else state
        mask = np.empty(self.n_actions, dtype=bool)
        mask[: self.n_devices] = s.uav_level >= self._move_cost[s.position]
        mask[self.base_index] = s.uav_level >= self._return_cost[s.position]
        return mask

    def feasible_actions(self, state: EnvState | None = None) -> list[int]:
        return [int(a) for a in np.flatnonzero(self.feasible_mask(state))]

    def step(self, action: int) -> StepOutcome:
        s = self.state
        if not (0 <= action < self.n_actions):
            raise ContractError(f"action {action} out of range")
        if not self.feasible_mask(s)[action]:
            raise ContractError(
                f"action {action} infeasible at slot {s.slot} "
                f"(battery {s.uav_level:.1f} J, position {s.position})"
            )

        at_base = action == self.base_index
        travel = float(self.energy[s.position, action])
        avg_before = self._aot_sum / self.n_devices

        aot = s.aot + 1
        if at_base:
            attested = None
            throughput = self.full_throughput
            new_sum = self._aot_sum + self.n_devices
        else:
            attested = action
            throughput = float(self._degraded[action])
            aot[action] = 1
            new_sum = self._aot_sum + self.n_devices - int(s.aot[action])

        next_solar, harvested = solar_step(self.solar, s.solar_state, self._rng)

        if at_base:
            level_after = s.uav_level - travel
            charge = charge_amount(level_after, self.uav_capacity, s.station_level)
        else:
            charge = 0.0
        station = station_update(
            StationBattery(s.station_level, self.station_capacity), at_base, charge, harvested
        )
        uav = uav_battery_update(
            UavBattery(s.uav_level, self.uav_capacity), travel, charge, at_base
        )

        avg_after = new_sum / self.n_devices
        reward = self.flow_weight * throughput + self.age_weight * (avg_before - avg_after)

        next_state = EnvState(
            aot=aot,
            position=action,
            uav_level=uav.level,
            station_level=station.level,
            solar_state=next_solar,
            slot=s.slot + 1,
        )
        self._state = next_state
        self._aot_sum = new_sum
        return StepOutcome(
            next_state=next_state,
            reward=reward,
            throughput=throughput,
            avg_aot=avg_after,
            attested=attested,
            travel_j=travel,
            charge_j=charge,
            harvested_j=harvested,
        )

    def observe(self, state: EnvState | None = None) -> np.ndarray:
        """Normalized observation: ages, position, both battery levels."""
        s = self.state if state is None else state
        n = self.n_devices
        obs = np.empty(n + 3)
        obs[:n] = s.aot / self.aot_norm
        obs[n] = (s.position + 1) / (n + 1)
        obs[n + 1] = s.uav_level / self.uav_capacity
        obs[n + 2] = s.station_level / self.station_capacity
        return obs

    @property
    def observation_dim(self) -> int:
        return self.n_devices + 3
