"""UAV attestation scheduling simulator.

A discrete-time model of a UAV that attests devices in a multi-hop IoT
network backed by a solar charging station, together with a prioritized
dueling double deep Q-network agent and three baseline policies. Scheduling
trades off the devices' trust age against source-gateway max-flow
throughput.
"""

__version__ = "0.1.0"

from .environment import EnvState, StepOutcome, UavEnv, average_aot
from .errors import ConfigError, ContractError
from .kinetics import FlightParams, flight_speed, power_per_meter, travel_distance, travel_energy
from .power import SolarModel, StationBattery, UavBattery
from .topology import (
    DeviceGraph,
    ThroughputTable,
    attested_throughput,
    build_throughput_table,
    max_flow,
    random_geometric_graph,
)

__all__ = [
    "ConfigError",
    "ContractError",
    "DeviceGraph",
    "EnvState",
    "FlightParams",
    "SolarModel",
    "StationBattery",
    "StepOutcome",
    "ThroughputTable",
    "UavBattery",
    "UavEnv",
    "attested_throughput",
    "average_aot",
    "build_throughput_table",
    "flight_speed",
    "max_flow",
    "power_per_meter",
    "random_geometric_graph",
    "travel_distance",
    "travel_energy",
    "__version__",
]
