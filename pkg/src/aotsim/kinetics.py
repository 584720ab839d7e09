"""Flight geometry and the rotary-wing propulsion energy model.

Each slot lasts ``slot_seconds``, so a hop of distance D is flown at speed
D / slot_seconds. Energy is priced per meter and scales with the hop length.
"""

import math
from dataclasses import dataclass

from .errors import ConfigError

Coord = tuple[float, float]


@dataclass(frozen=True)
class FlightParams:
    """Rotary-wing propulsion constants plus the slot duration.

    blade_power and induced_power are the hover blade-profile and induced
    power components (W); tip_speed is the rotor-blade tip speed (m/s);
    induced_velocity the mean hover induced velocity (m/s); drag_ratio the
    fuselage drag ratio; rotor_solidity and rotor_area describe the rotor
    disc; air_density in kg/m^3. v_max caps feasible hop length at
    v_max * slot_seconds.
    """

    blade_power: float = 79.86
    induced_power: float = 88.63
    tip_speed: float = 120.0
    induced_velocity: float = 4.03
    drag_ratio: float = 0.6
    air_density: float = 1.225
    rotor_solidity: float = 0.05
    rotor_area: float = 0.503
    v_max: float = 21.0
    slot_seconds: float = 300.0

    def __post_init__(self):
        for name in (
            "blade_power",
            "induced_power",
            "tip_speed",
            "induced_velocity",
            "drag_ratio",
            "air_density",
            "rotor_solidity",
            "rotor_area",
            "v_max",
            "slot_seconds",
        ):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"flight parameter {name} must be finite and > 0, got {value}")
        if self.v_max > self.tip_speed:
            raise ConfigError(
                f"v_max ({self.v_max}) cannot exceed rotor tip speed ({self.tip_speed})"
            )


def travel_distance(a: Coord, b: Coord) -> float:
    """Euclidean distance in meters between two ground coordinates."""
    return math.hypot(a[0] - b[0], a[1] - b[1])


def flight_speed(distance: float, params: FlightParams) -> float:
    """Speed (m/s) needed to cover ``distance`` within one slot.

    Raises ConfigError when the required speed exceeds v_max, meaning the
    configured region is too large for the slot duration.
    """
    if distance < 0:
        raise ValueError(f"distance must be >= 0, got {distance}")
    v = distance / params.slot_seconds
    if v > params.v_max + 1e-9:
        raise ConfigError(
            f"hop of {distance:.1f} m needs {v:.2f} m/s, above the {params.v_max} m/s limit; "
            "shrink the region or lengthen the slot"
        )
    return v


def power_per_meter(v: float, params: FlightParams) -> float:
    """Propulsion energy per meter traveled (J/m) at speed v.

    Three additive components: blade profile (dominant at low speed via the
    1/v term), induced power with nested square roots, and parasite drag
    growing with v^2. Multiplying by v recovers the usual power-vs-speed
    curve in watts, so the per-hop energy equals that power times the slot
    duration.
    """
    if v <= 0:
        raise ValueError(f"speed must be > 0 for per-meter power, got {v}")
    v0 = params.tip_speed
    v1 = params.induced_velocity
    blade = params.blade_power * (1.0 / v + 3.0 * v / (v0 * v0))
    induced = params.induced_power * math.sqrt(
        math.sqrt(v**-4 + 1.0 / (4.0 * v1**4)) - 1.0 / (2.0 * v1 * v1)
    )
    parasite = (
        0.5
        * params.drag_ratio
        * params.air_density
        * params.rotor_solidity
        * params.rotor_area
        * v
        * v
    )
    return blade + induced + parasite


def travel_energy(a: Coord, b: Coord, params: FlightParams) -> float:
    """Energy (J) to fly from a to b in one slot; zero for a zero-length move.

    Re-selecting the current location means the vehicle stays landed, so no
    propulsion energy is charged (the per-meter model diverges at v = 0 and
    must not be evaluated there).
    """
    d = travel_distance(a, b)
    if d == 0.0:
        return 0.0
    return power_per_meter(flight_speed(d, params), params) * d


def trip_energy_matrix(points: list[Coord], params: FlightParams):
    """Symmetric matrix of hop energies (J) between every pair of points.

    Validates up front that every pair is reachable within one slot, so a
    region-too-large error surfaces at construction rather than mid-run.
    """
    import numpy as np

    n = len(points)
    e = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            e[i, j] = e[j, i] = travel_energy(points[i], points[j], params)
    return e
