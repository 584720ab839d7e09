"""Run configuration: dataclasses mirroring the JSON config file, defaults for
every knob, and builders that materialize the simulation objects.

Batteries are configured in Wh/kWh and converted to Joules here; everything
downstream works in SI units.
"""

import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .environment import UavEnv
from .errors import ConfigError
from .kinetics import FlightParams
from .power import SolarModel
from .topology import (
    DeviceGraph,
    build_throughput_table,
    load_graph,
    random_geometric_graph,
    scale_to_target,
)

WH_TO_J = 3600.0
KWH_TO_J = 3.6e6

# Node count and square-region side for the four canonical network setups.
NETWORK_SETUPS = {
    "n1": (5, 1500.0),
    "n2": (6, 2000.0),
    "n3": (7, 2500.0),
    "n4": (8, 3000.0),
}


@dataclass(frozen=True)
class NetworkConfig:
    devices: int = 7
    region_m: float = 2500.0
    radius_m: float | None = None  # None: 0.5 * region
    capacity_kbps: float = 10.0
    target_full_kbps: float | None = 50.0
    graph_file: str | None = None
    graph_seed: int | None = None  # None: derived from the run seed

    def __post_init__(self):
        if self.devices < 3:
            raise ConfigError("need at least 3 devices")
        if self.region_m <= 0:
            raise ConfigError("region must be > 0")
        if self.radius_m is not None and self.radius_m <= 0:
            raise ConfigError("radius must be > 0")


@dataclass(frozen=True)
class FlightConfig:
    p0_w: float = 79.86
    p1_w: float = 88.63
    tip_speed_ms: float = 120.0
    induced_velocity_ms: float = 4.03
    drag_ratio: float = 0.6
    air_density: float = 1.225
    rotor_solidity: float = 0.05
    rotor_area_m2: float = 0.503
    v_max_ms: float = 21.0
    slot_s: float = 300.0
    altitude_m: float = 100.0  # documentation only; never enters the energy model


@dataclass(frozen=True)
class BatteryConfig:
    uav_capacity_wh: float = 77.0
    station_capacity_kwh: float = 0.77
    station_initial_kwh: float = 0.385


@dataclass(frozen=True)
class SolarConfig:
    # Sticky default chain; means/spreads are plausible irradiance values
    # (W/m^2), not calibrated ground truth.
    transition: tuple = (
        (0.7, 0.1, 0.1, 0.1),
        (0.1, 0.7, 0.1, 0.1),
        (0.1, 0.1, 0.7, 0.1),
        (0.1, 0.1, 0.1, 0.7),
    )
    mu: tuple = (800.0, 400.0, 150.0, 25.0)
    sigma: tuple = (80.0, 60.0, 40.0, 15.0)
    panel_m2: float = 10.0
    efficiency: float = 0.15
    initial_state: int = 0


@dataclass(frozen=True)
class RewardConfig:
    age_weight: float = 10.0
    flow_weight: float = 0.5


@dataclass(frozen=True)
class AgentConfig:
    lr: float = 1e-4
    gamma: float = 0.5
    hidden: int = 256
    batch: int = 32
    buffer: int = 4000
    alpha: float = 0.2
    beta_start: float = 0.6
    beta_end: float = 1.0
    eps_priority: float = 1e-5
    eps_start: float = 1.0
    eps_end: float = 0.05
    # Slots over which epsilon decays to its floor; None spreads the decay
    # across the whole training phase. The fast default mirrors the reported
    # behavior where early near-greedy play starts from a poor policy and
    # trust ages fall steeply once learning kicks in.
    eps_anneal_slots: int | None = 4000
    target_period: int = 200
    soft_tau: float = 0.01
    train_start: int = 320


@dataclass(frozen=True)
class RunSection:
    episodes: int = 100
    slots: int = 2000
    train_episodes: int = 80
    aot_norm: float = 50.0
    initial_aot: str = "ones"
    eval_epsilon: float = 0.05

    def __post_init__(self):
        if self.episodes <= 0 or self.slots <= 0:
            raise ConfigError("episodes and slots must be > 0")
        if not (0 <= self.train_episodes < self.episodes):
            raise ConfigError("train_episodes must satisfy 0 <= train < episodes")
        if not (0.0 <= self.eval_epsilon <= 1.0):
            raise ConfigError("eval_epsilon must be in [0,1]")


@dataclass(frozen=True)
class RunConfig:
    network: NetworkConfig = field(default_factory=NetworkConfig)
    flight: FlightConfig = field(default_factory=FlightConfig)
    battery: BatteryConfig = field(default_factory=BatteryConfig)
    solar: SolarConfig = field(default_factory=SolarConfig)
    reward: RewardConfig = field(default_factory=RewardConfig)
    agent: AgentConfig = field(default_factory=AgentConfig)
    run: RunSection = field(default_factory=RunSection)


_SECTIONS = {
    "network": NetworkConfig,
    "flight": FlightConfig,
    "battery": BatteryConfig,
    "solar": SolarConfig,
    "reward": RewardConfig,
    "agent": AgentConfig,
    "run": RunSection,
}


def default_config() -> RunConfig:
    return RunConfig()


def config_from_dict(doc: dict) -> RunConfig:
    """Build a config from a (possibly partial) dict; unknown keys are errors."""
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    sections = {}
    for key, value in doc.items():
        cls = _SECTIONS.get(key)
        if cls is None:
            raise ConfigError(f"unknown config section {key!r}")
        if not isinstance(value, dict):
            raise ConfigError(f"config section {key!r} must be an object")
        known = {f.name for f in cls.__dataclass_fields__.values()}
        bad = set(value) - known
        if bad:
            raise ConfigError(f"unknown keys in section {key!r}: {sorted(bad)}")
        value = dict(value)
        for name in ("transition", "mu", "sigma"):
            if name in value and isinstance(value[name], list):
                value[name] = tuple(
                    tuple(row) if isinstance(row, list) else row for row in value[name]
                )
        try:
            sections[key] = cls(**value)
        except TypeError as exc:
            raise ConfigError(f"bad value in section {key!r}: {exc}") from exc
    return replace(RunConfig(), **sections)


def load_config(path=None) -> RunConfig:
    """Read a JSON config file; a missing path means pure defaults."""
    if path is None:
        return default_config()
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_dict(doc)


def config_to_dict(cfg: RunConfig) -> dict:
    return asdict(cfg)


def apply_preset(cfg: RunConfig, preset: str) -> RunConfig:
    """Run-scale presets: 'full' is the paper-scale default, 'desk' fits CI."""
    if preset == "full":
        return cfg
    if preset == "desk":
        run = replace(cfg.run, episodes=50, slots=500, train_episodes=40)
        return replace(cfg, run=run)
    raise ConfigError(f"unknown preset {preset!r} (expected 'full' or 'desk')")


def network_setup(cfg: RunConfig, name: str) -> RunConfig:
    """Swap in one of the canonical node-count/region combinations."""
    key = name.lower()
    if key not in NETWORK_SETUPS:
        raise ConfigError(f"unknown network setup {name!r} (expected one of {sorted(NETWORK_SETUPS)})")
    devices, region = NETWORK_SETUPS[key]
    network = replace(cfg.network, devices=devices, region_m=region)
    return replace(cfg, network=network)


def build_flight(cfg: RunConfig) -> FlightParams:
    f = cfg.flight
    return FlightParams(
        blade_power=f.p0_w,
        induced_power=f.p1_w,
        tip_speed=f.tip_speed_ms,
        induced_velocity=f.induced_velocity_ms,
        drag_ratio=f.drag_ratio,
        air_density=f.air_density,
        rotor_solidity=f.rotor_solidity,
        rotor_area=f.rotor_area_m2,
        v_max=f.v_max_ms,
        slot_seconds=f.slot_s,
    )


def build_solar(cfg: RunConfig) -> SolarModel:
    s = cfg.solar
    return SolarModel(
        transition=np.array(s.transition, dtype=float),
        mu=np.array(s.mu, dtype=float),
        sigma=np.array(s.sigma, dtype=float),
        panel_m2=s.panel_m2,
        efficiency=s.efficiency,
        slot_seconds=cfg.flight.slot_s,
        initial_state=s.initial_state,
    )


def build_graph(cfg: RunConfig, seed: int) -> DeviceGraph:
    net = cfg.network
    if net.graph_file is not None:
        graph = load_graph(net.graph_file)
    else:
        graph_seed = net.graph_seed if net.graph_seed is not None else seed
        radius = net.radius_m if net.radius_m is not None else 0.5 * net.region_m
        graph = random_geometric_graph(
            n=net.devices,
            region=net.region_m,
            radius=radius,
            capacity=net.capacity_kbps,
            seed=graph_seed,
        )
    if net.target_full_kbps is not None:
        graph = scale_to_target(graph, net.target_full_kbps)
    return graph


def build_env(cfg: RunConfig, seed: int, rng: np.random.Generator) -> UavEnv:
    graph = build_graph(cfg, seed)
    table = build_throughput_table(graph)
    return UavEnv(
        graph=graph,
        table=table,
        flight=build_flight(cfg),
        solar=build_solar(cfg),
        uav_capacity_j=cfg.battery.uav_capacity_wh * WH_TO_J,
        station_capacity_j=cfg.battery.station_capacity_kwh * KWH_TO_J,
        station_initial_j=cfg.battery.station_initial_kwh * KWH_TO_J,
        age_weight=cfg.reward.age_weight,
        flow_weight=cfg.reward.flow_weight,
        aot_norm=cfg.run.aot_norm,
        initial_aot=cfg.run.initial_aot,
        rng=rng,
    )
