"""Network graph, max-flow throughput, and the degraded flows under attestation.

Link capacities are kept as integral milli-Kbps so the augmenting-path search
never meets floating-point residuals; all public values are plain Kbps.
"""

import json
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .kinetics import Coord

MILLI = 1000


@dataclass(frozen=True)
class DeviceGraph:
    """Directed capacitated graph of ground nodes plus the charging base.

    ``nodes`` holds every graph node coordinate (attestable devices first by
    construction); ``source`` and ``gateway`` index into it and are
    infrastructure, never attested. ``links`` maps (from, to) to capacity in
    milli-Kbps. The base is not a traffic node, only the UAV's recharge
    location.
    """

    nodes: tuple[Coord, ...]
    links: dict[tuple[int, int], int]
    source: int
    gateway: int
    base: Coord

    def __post_init__(self):
        n = len(self.nodes)
        if n < 3:
            raise ConfigError(f"graph needs at least 3 nodes, got {n}")
        if not (0 <= self.source < n) or not (0 <= self.gateway < n):
            raise ConfigError("source/gateway index out of range")
        if self.source == self.gateway:
            raise ConfigError("source and gateway must differ")
        for (u, v), cap in self.links.items():
            if u == v:
                raise ConfigError(f"self-loop on node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ConfigError(f"link ({u},{v}) references a missing node")
            if not (isinstance(cap, int) and cap > 0):
                raise ConfigError(f"link ({u},{v}) capacity must be a positive integer, got {cap}")
        for x, y in list(self.nodes) + [self.base]:
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ConfigError("non-finite coordinate")

    @property
    def devices(self) -> tuple[int, ...]:
        """Attestable node ids: everything except source and gateway."""
        skip = {self.source, self.gateway}
        return tuple(i for i in range(len(self.nodes)) if i not in skip)

    def capacity_matrix(self) -> np.ndarray:
        n = len(self.nodes)
        cap = np.zeros((n, n), dtype=np.int64)
        for (u, v), c in self.links.items():
            cap[u, v] += c
        return cap


@dataclass(frozen=True)
class ThroughputTable:
    """Full max flow and the degraded flow with each device taken offline."""

    full: float
    degraded: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        for dev, rate in self.degraded.items():
            if rate < 0 or rate > self.full + 1e-9:
                raise ConfigError(f"degraded flow for device {dev} outside [0, full]")


def _edmonds_karp(cap: np.ndarray, source: int, sink: int) -> int:
    """Max flow on an integer capacity matrix via shortest augmenting paths."""
    n = cap.shape[0]
    residual = cap.copy()
    total = 0
    parent = np.empty(n, dtype=np.int64)
    while True:
        parent.fill(-1)
        parent[source] = source
        queue = deque([source])
        while queue and parent[sink] == -1:
            u = queue.popleft()
            for v in np.nonzero(residual[u])[0]:
                if parent[v] == -1:
                    parent[v] = u
                    queue.append(v)
        if parent[sink] == -1:
            return int(total)
        bottleneck = None
        v = sink
        while v != source:
            u = int(parent[v])
            r = int(residual[u, v])
            bottleneck = r if bottleneck is None else min(bottleneck, r)
            v = u
        v = sink
        while v != source:
            u = int(parent[v])
            residual[u, v] -= bottleneck
            residual[v, u] += bottleneck
            v = u
        total += bottleneck


def max_flow(graph: DeviceGraph, source: int | None = None, sink: int | None = None) -> float:
    """Maximum source-to-sink flow in Kbps (equals the min-cut capacity)."""
    s = graph.source if source is None else source
    d = graph.gateway if sink is None else sink
    n = len(graph.nodes)
    if not (0 <= s < n and 0 <= d < n):
        raise ValueError(f"source/sink ({s},{d}) not in graph with {n} nodes")
    if s == d:
        raise ValueError("source equals sink")
    return _edmonds_karp(graph.capacity_matrix(), s, d) / MILLI


def attested_throughput(graph: DeviceGraph, device: int) -> float:
    """Max flow in Kbps with ``device`` and all its incident links removed."""
    if device == graph.source or device == graph.gateway:
        raise ValueError(f"node {device} is the source or gateway and is never attested")
    if not (0 <= device < len(graph.nodes)):
        raise ValueError(f"device {device} not in graph")
    cap = graph.capacity_matrix()
    cap[device, :] = 0
    cap[:, device] = 0
    return _edmonds_karp(cap, graph.source, graph.gateway) / MILLI


def build_throughput_table(graph: DeviceGraph) -> ThroughputTable:
    """Precompute the full flow and every single-device-offline flow.

    The topology is static for a whole run, so these values are computed once
    and looked up per slot.
    """
    full = max_flow(graph)
    degraded = {dev: attested_throughput(graph, dev) for dev in graph.devices}
    return ThroughputTable(full=full, degraded=degraded)


def random_geometric_graph(
    n: int,
    region: float,
    radius: float,
    capacity: float,
    seed: int,
    max_retries: int = 200,
) -> DeviceGraph:
    """Random geometric topology: n attestable devices plus source and gateway.

    Draws n + 2 uniform coordinates in [0, region]^2; the point nearest the
    corner opposite the origin becomes the source and the point nearest the
    origin becomes the gateway, leaving n devices (ids 0..n-1, source = n,
    gateway = n + 1). Every pair within ``radius`` gets a link in both
    directions at the given capacity (Kbps). Redraws until the source can
    reach the gateway; the same seed always yields the same graph.
    """
    if n < 3:
        raise ConfigError(f"need at least 3 devices, got {n}")
    if radius <= 0 or region <= 0:
        raise ConfigError("region and radius must be > 0")
    cap_milli = int(round(capacity * MILLI))
    if cap_milli <= 0:
        raise ConfigError(f"capacity must be positive, got {capacity}")
    rng = np.random.default_rng(seed)
    for _ in range(max_retries):
        pts = rng.uniform(0.0, region, size=(n + 2, 2))
        d_origin = np.hypot(pts[:, 0], pts[:, 1])
        d_corner = np.hypot(pts[:, 0] - region, pts[:, 1] - region)
        gateway_pt = int(np.argmin(d_origin))
        d_corner[gateway_pt] = np.inf
        source_pt = int(np.argmin(d_corner))
        order = [i for i in range(n + 2) if i not in (source_pt, gateway_pt)]
        order += [source_pt, gateway_pt]
        coords = tuple((float(pts[i, 0]), float(pts[i, 1])) for i in order)
        links: dict[tuple[int, int], int] = {}
        for i in range(n + 2):
            for j in range(i + 1, n + 2):
                dx = coords[i][0] - coords[j][0]
                dy = coords[i][1] - coords[j][1]
                if math.hypot(dx, dy) <= radius:
                    links[(i, j)] = cap_milli
                    links[(j, i)] = cap_milli
        graph = DeviceGraph(nodes=coords, links=links, source=n, gateway=n + 1, base=(0.0, 0.0))
        if max_flow(graph) > 0:
            return graph
    raise ConfigError(
        f"no connected topology after {max_retries} draws "
        f"(n={n}, region={region}, radius={radius}); increase the radius"
    )


def scale_to_target(graph: DeviceGraph, target_kbps: float) -> DeviceGraph:
    """Rescale all capacities so the full max flow lands on ``target_kbps``.

    Rounding to integral milli-Kbps can leave the result a few milli-Kbps off
    the target; every capacity stays at least 1 milli-Kbps.
    """
    full = max_flow(graph)
    if full <= 0:
        raise ConfigError("cannot scale a graph with zero source-gateway flow")
    factor = target_kbps / full
    links = {uv: max(1, int(round(c * factor))) for uv, c in graph.links.items()}
    return DeviceGraph(
        nodes=graph.nodes,
        links=links,
        source=graph.source,
        gateway=graph.gateway,
        base=graph.base,
    )


def graph_to_json(graph: DeviceGraph) -> dict:
    return {
        "devices": [[x, y] for x, y in graph.nodes],
        "links": [[u, v, c / MILLI] for (u, v), c in sorted(graph.links.items())],
        "source": graph.source,
        "gateway": graph.gateway,
        "base": [graph.base[0], graph.base[1]],
    }


def graph_from_json(doc: dict) -> DeviceGraph:
    try:
        nodes = tuple((float(x), float(y)) for x, y in doc["devices"])
        links = {}
        for u, v, kbps in doc["links"]:
            cap = int(round(float(kbps) * MILLI))
            if cap <= 0:
                raise ConfigError(f"link ({u},{v}) capacity must be positive, got {kbps}")
            links[(int(u), int(v))] = cap
        base = (float(doc["base"][0]), float(doc["base"][1]))
        return DeviceGraph(
            nodes=nodes,
            links=links,
            source=int(doc["source"]),
            gateway=int(doc["gateway"]),
            base=base,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed graph document: {exc}") from exc


def load_graph(path) -> DeviceGraph:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read graph file {path}: {exc}") from exc
    return graph_from_json(doc)


def save_graph(graph: DeviceGraph, path) -> None:
    with open(path, "w") as fh:
        json.dump(graph_to_json(graph), fh, indent=2)
        fh.write("\n")
