"""Experiment orchestration: seeded train/eval loops, per-episode metric
aggregation, and the delimited output files.

Every run is fully determined by (config, seed); timestamps appear only in
the run_config.json provenance snapshot, never in the metric files.
"""

import csv
import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .agent import AgentHyper, PD3QNAgent
from .baselines import BaselineActor
from .config import RunConfig, build_env, config_to_dict
from .errors import ConfigError
from .power import SOLAR_STATE_NAMES
from .replay import Transition

CSV_COLUMNS = (
    "episode",
    "phase",
    "avg_reward",
    "avg_aot",
    "avg_throughput_kbps",
    "avg_loss",
    "solar_excellent",
    "solar_good",
    "solar_fair",
    "solar_poor",
    "charge_events",
)


@dataclass(frozen=True)
class MetricsRecord:
    episode: int
    phase: str
    avg_reward: float
    avg_aot: float
    avg_throughput: float
    avg_loss: float
    solar_occupancy: tuple
    charge_events: int


def derive_rngs(seed: int) -> dict:
    """Independent child streams so env noise matches across policies."""
    children = np.random.SeedSequence(seed).spawn(3)
    return {
        "env": np.random.default_rng(children[0]),
        "agent": np.random.default_rng(children[1]),
        "policy": np.random.default_rng(children[2]),
    }


class AgentActor:
    """Episode adapter for the learning agent.

    In training mode each slot stores the transition, advances the
    exploration schedule, and runs one optimization step; in evaluation mode
    the agent acts at a fixed epsilon and never learns.
    """

    def __init__(self, agent: PD3QNAgent, train: bool, eval_epsilon: float = 0.0):
        self.agent = agent
        self.train = train
        self.eval_epsilon = eval_epsilon
        self._obs = None
        self._action = None

    def begin_episode(self) -> None:
        self._obs = None
        self._action = None

    def act(self, env) -> int:
        obs = env.observe()
        mask = env.feasible_mask()
        eps = self.agent.epsilon if self.train else self.eval_epsilon
        action = self.agent.select_action(obs, mask, eps)
        self._obs = obs
        self._action = action
        return action

    def on_outcome(self, env, outcome):
        if not self.train:
            return None
        self.agent.store(
            Transition(
                obs=self._obs,
                action=self._action,
                reward=outcome.reward,
                next_obs=env.observe(),
                next_mask=env.feasible_mask(),
            )
        )
        self.agent.advance_slot()
        return self.agent.train_step()


def run_episode(env, actor, slots: int, episode: int, phase: str) -> MetricsRecord:
    """Reset the environment and execute exactly ``slots`` steps."""
    env.reset()
    actor.begin_episode()
    reward_sum = 0.0
    aot_sum = 0.0
    throughput_sum = 0.0
    loss_sum = 0.0
    loss_steps = 0
    occupancy = [0] * len(SOLAR_STATE_NAMES)
    charge_events = 0
    for _ in range(slots):
        action = actor.act(env)
        outcome = env.step(action)
        loss = actor.on_outcome(env, outcome)
        if loss is not None:
            loss_sum += loss
            loss_steps += 1
        reward_sum += outcome.reward
        aot_sum += outcome.avg_aot
        throughput_sum += outcome.throughput
        occupancy[outcome.next_state.solar_state] += 1
        if outcome.charge_j > 0:
            charge_events += 1
    return MetricsRecord(
        episode=episode,
        phase=phase,
        avg_reward=reward_sum / slots,
        avg_aot=aot_sum / slots,
        avg_throughput=throughput_sum / slots,
        avg_loss=loss_sum / loss_steps if loss_steps else 0.0,
        solar_occupancy=tuple(c / slots for c in occupancy),
        charge_events=charge_events,
    )


def build_agent(cfg: RunConfig, env, rng: np.random.Generator) -> PD3QNAgent:
    a = cfg.agent
    train_slots = cfg.run.train_episodes * cfg.run.slots
    hyper = AgentHyper(
        lr=a.lr,
        gamma=a.gamma,
        eps_start=a.eps_start,
        eps_end=a.eps_end,
        batch=a.batch,
        target_period=a.target_period,
        soft_tau=a.soft_tau,
        train_start=a.train_start,
        buffer_capacity=a.buffer,
        alpha=a.alpha,
        beta_start=a.beta_start,
        beta_end=a.beta_end,
        eps_priority=a.eps_priority,
        hidden=a.hidden,
        eps_anneal_slots=a.eps_anneal_slots if a.eps_anneal_slots else max(1, train_slots),
        beta_anneal_steps=max(1, train_slots - a.train_start),
    )
    return PD3QNAgent(env.observation_dim, env.n_actions, hyper, rng)


def train(
    cfg: RunConfig,
    seed: int,
    out_dir=None,
    greedy_eval: bool = False,
    progress=None,
):
    """Train for the configured episodes, then run the assessment episodes.

    Returns (records, agent). When ``out_dir`` is given, writes the metric
    files, the config snapshot, and a final checkpoint there.
    """
    rngs = derive_rngs(seed)
    env = build_env(cfg, seed, rngs["env"])
    agent = build_agent(cfg, env, rngs["agent"])
    eval_eps = 0.0 if greedy_eval else cfg.run.eval_epsilon
    records = []
    for episode in range(1, cfg.run.episodes + 1):
        training = episode <= cfg.run.train_episodes
        actor = AgentActor(agent, train=training, eval_epsilon=eval_eps)
        record = run_episode(
            env, actor, cfg.run.slots, episode, "train" if training else "eval"
        )
        records.append(record)
        if progress is not None:
            progress(record)
    if out_dir is not None:
        out = Path(out_dir)
        emit_metrics(records, out, run_meta(cfg, seed, policy="pd3qn", greedy_eval=greedy_eval))
        agent.save(out / "checkpoint.npz")
    return records, agent


def evaluate(
    cfg: RunConfig,
    seed: int,
    policy: str = "pd3qn",
    checkpoint=None,
    agent: PD3QNAgent | None = None,
    episodes: int | None = None,
    epsilon: float = 0.0,
    out_dir=None,
    progress=None,
):
    """Frozen-policy rollouts: greedy agent (from a checkpoint) or a baseline."""
    rngs = derive_rngs(seed)
    env = build_env(cfg, seed, rngs["env"])
    if episodes is None:
        episodes = cfg.run.episodes - cfg.run.train_episodes
    if policy == "pd3qn":
        if agent is None:
            if checkpoint is None:
                raise ConfigError("evaluating pd3qn needs a checkpoint")
            agent = PD3QNAgent.load(checkpoint)
        if agent.obs_dim != env.observation_dim or agent.n_actions != env.n_actions:
            raise ConfigError(
                f"checkpoint dimensions ({agent.obs_dim}, {agent.n_actions}) do not match "
                f"this network setup ({env.observation_dim}, {env.n_actions})"
            )
        actor = AgentActor(agent, train=False, eval_epsilon=epsilon)
    elif policy in ("rand", "maf", "nf"):
        actor = BaselineActor(policy, rngs["policy"])
    else:
        raise ConfigError(f"unknown policy {policy!r}")
    records = [
        run_episode(env, actor, cfg.run.slots, episode, "eval")
        for episode in range(1, episodes + 1)
    ]
    if progress is not None:
        for record in records:
            progress(record)
    if out_dir is not None:
        emit_metrics(records, Path(out_dir), run_meta(cfg, seed, policy=policy))
    return records


def run_meta(cfg: RunConfig, seed: int, **extra) -> dict:
    meta = {
        "package": "aotsim",
        "version": __version__,
        "seed": seed,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "config": config_to_dict(cfg),
    }
    meta.update(extra)
    return meta


def record_to_row(record: MetricsRecord) -> dict:
    row = {
        "episode": record.episode,
        "phase": record.phase,
        "avg_reward": record.avg_reward,
        "avg_aot": record.avg_aot,
        "avg_throughput_kbps": record.avg_throughput,
        "avg_loss": record.avg_loss,
        "charge_events": record.charge_events,
    }
    for name, share in zip(SOLAR_STATE_NAMES, record.solar_occupancy):
        row[f"solar_{name}"] = share
    return row


def emit_metrics(records, out_dir, meta: dict) -> None:
    """Write metrics.csv, metrics.jsonl (same values), and run_config.json."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "metrics.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for record in records:
                row = record_to_row(record)
                writer.writerow([repr(row[c]) if isinstance(row[c], float) else row[c] for c in CSV_COLUMNS])
        with open(out / "metrics.jsonl", "w") as fh:
            for record in records:
                fh.write(json.dumps(record_to_row(record)) + "\n")
        with open(out / "run_config.json", "w") as fh:
            json.dump(meta, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise ConfigError(f"cannot write metrics under {out}: {exc}") from exc


def parse_metrics_csv(path) -> list[MetricsRecord]:
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            records = []
            for row in reader:
                records.append(
                    MetricsRecord(
                        episode=int(row["episode"]),
                        phase=row["phase"],
                        avg_reward=float(row["avg_reward"]),
                        avg_aot=float(row["avg_aot"]),
                        avg_throughput=float(row["avg_throughput_kbps"]),
                        avg_loss=float(row["avg_loss"]),
                        solar_occupancy=tuple(
                            float(row[f"solar_{name}"]) for name in SOLAR_STATE_NAMES
                        ),
                        charge_events=int(row["charge_events"]),
                    )
                )
    except OSError as exc:
        raise ConfigError(f"cannot read metrics file {path}: {exc}") from exc
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"malformed metrics file {path}: {exc}") from exc
    return records
