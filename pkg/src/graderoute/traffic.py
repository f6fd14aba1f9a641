"""M/M/1 traffic model: link flows, queueing delay and per-node observables."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .topology import ParseError, Topology, format_real, in_degree, link_key

__all__ = [
    "NodeDynamics",
    "RoutingError",
    "SaturationError",
    "TrafficModel",
    "compute_flows",
    "derive_dynamics",
    "link_delay",
    "load_traffic",
    "min_hop_path",
    "save_traffic",
    "synthetic_demands",
    "total_delay",
]

DEFAULT_DELAY_THRESHOLD = 1.0
DEFAULT_UTIL_THRESHOLD = 0.8


class RoutingError(RuntimeError):
    def __init__(self, j: int, k: int):
        self.pair = (j, k)
        super().__init__(f"no route for demand {j} -> {k}")


class SaturationError(ArithmeticError):
    """Queue on a link is unstable: arrival rate at or above service rate."""

    def __init__(self, key: tuple[int, int], lam: float, service: float):
        self.link = key
        super().__init__(
            f"link {key[0]}-{key[1]} saturated: flow {lam} >= mu*C = {service}"
        )


@dataclass(frozen=True)
class NodeDynamics:
    delay_present: bool
    congestion_present: bool
    density: int


@dataclass
class TrafficModel:
    """External demand matrix ``gamma``, service-rate scale ``mu`` and per-link flows."""

    gamma: np.ndarray
    mu: float
    flows: dict[tuple[int, int], float]

    @classmethod
    def build(cls, t: Topology, gamma, mu: float = 1.0) -> "TrafficModel":
        if not mu > 0:
            raise ValueError(f"mu must be positive, got {mu}")
        gamma = np.asarray(gamma, dtype=float)
        return cls(gamma=gamma, mu=float(mu), flows=compute_flows(t, gamma))


def min_hop_path(t, j: int, k: int) -> list[int] | None:
    """Fewest-hop path from ``j`` to ``k``; ties go to the lexicographically smallest sequence.

    Breadth-first search that expands neighbours in ascending order and keeps the
    first parent found yields exactly that path.
    """
    if j == k:
        return [j]
    parent = {j: None}
    queue = deque([j])
    while queue:
        cur = queue.popleft()
        for nb, _ in t.neighbors(cur):
            if nb in parent:
                continue
            parent[nb] = cur
            if nb == k:
                path = [k]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                return path[::-1]
            queue.append(nb)
    return None


def compute_flows(t: Topology, gamma) -> dict[tuple[int, int], float]:
    gamma = np.asarray(gamma, dtype=float)
    n = t.num_nodes
    if gamma.shape != (n, n):
        raise ValueError(f"traffic matrix shape {gamma.shape} does not match {n} nodes")
    if np.any(np.diag(gamma) != 0):
        raise ValueError("traffic matrix must have a zero diagonal")
    if np.any(gamma < 0):
        raise ValueError("traffic demands must be non-negative")
    flows = {l.key: 0.0 for l in t.links}
    for j, k in zip(*np.nonzero(gamma)):
        path = min_hop_path(t, int(j), int(k))
        if path is None:
            raise RoutingError(int(j), int(k))
        for a, b in zip(path, path[1:]):
            flows[link_key(a, b)] += float(gamma[j, k])
    return flows


def link_delay(lam: float, mu: float, capacity: float) -> float:
    """Mean M/M/1 delay term ``lam / (mu*C - lam)`` for one channel."""
    service = mu * capacity
    if lam >= service:
        raise SaturationError((-1, -1), lam, service)
    return lam / (service - lam)


def total_delay(
    flows: dict[tuple[int, int], float],
    mu: float,
    t: Topology,
    links: Iterable[tuple[int, int]] | None = None,
) -> float:
    """Sum of ``lam_i / (mu*C_i - lam_i)`` over ``links`` (all links when omitted)."""
    keys = [l.key for l in t.links] if links is None else [link_key(*k) for k in links]
    total = 0.0
    for key in keys:
        link = t.link(*key)
        if link is None:
            raise KeyError(f"unknown link {key}")
        lam = flows.get(key, 0.0)
        try:
            total += link_delay(lam, mu, link.capacity)
        except SaturationError:
            raise SaturationError(key, lam, mu * link.capacity) from None
    return total


def derive_dynamics(
    t: Topology,
    model: TrafficModel,
    delay_threshold: float = DEFAULT_DELAY_THRESHOLD,
    util_threshold: float = DEFAULT_UTIL_THRESHOLD,
) -> list[NodeDynamics]:
    """Per-node delay flag, congestion flag and density.

    Node delay is the queueing delay summed over incident links; congestion is
    the worst incident-link utilisation ``lam / (mu*C)``. A saturated incident
    link sets both flags.
    """
    if not delay_threshold > 0:
        raise ValueError("delay_threshold must be positive")
    if not 0.0 < util_threshold < 1.0:
        raise ValueError("util_threshold must lie in (0, 1)")
    out = []
    mu = model.mu
    for nd in t.nodes:
        delay = 0.0
        util = 0.0
        saturated = False
        for _, link in t.neighbors(nd.id):
            lam = model.flows.get(link.key, 0.0)
            service = mu * link.capacity
            if lam >= service:
                saturated = True
                break
            delay += lam / (service - lam)
            util = max(util, lam / service)
        out.append(
            NodeDynamics(
                delay_present=saturated or delay > delay_threshold,
                congestion_present=saturated or util > util_threshold,
                density=in_degree(t, nd.id),
            )
        )
    return out


def synthetic_demands(
    n: int,
    rng: np.random.Generator,
    density: float = 0.15,
    gamma_range: tuple[float, float] = (0.01, 0.1),
) -> np.ndarray:
    """Each ordered pair gets a demand with probability ``density``, size uniform in ``gamma_range``."""
    if not 0.0 <= density <= 1.0:
        raise ValueError("demand density must lie in [0, 1]")
    lo, hi = gamma_range
    if lo > hi or lo < 0:
        raise ValueError(f"bad gamma range {gamma_range}")
    mask = rng.random((n, n)) < density
    sizes = rng.uniform(lo, hi, size=(n, n))
    gamma = np.where(mask, sizes, 0.0)
    np.fill_diagonal(gamma, 0.0)
    return gamma


def dumps_traffic(gamma) -> str:
    gamma = np.asarray(gamma, dtype=float)
    lines = ["traffic v1"]
    for j, k in zip(*np.nonzero(gamma)):
        lines.append(f"demand {j} {k} {format_real(float(gamma[j, k]))}")
    return "\n".join(lines) + "\n"


def save_traffic(gamma, path: str | Path) -> None:
    Path(path).write_text(dumps_traffic(gamma), encoding="utf-8")


def loads_traffic(text: str, n: int) -> np.ndarray:
    gamma = np.zeros((n, n))
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if not header_seen:
            if tok != ["traffic", "v1"]:
                raise ParseError("expected header 'traffic v1'", lineno)
            header_seen = True
            continue
        if tok[0] != "demand" or len(tok) != 4:
            raise ParseError("expected 'demand <j> <k> <gamma>'", lineno)
        try:
            j, k, g = int(tok[1]), int(tok[2]), float(tok[3])
        except ValueError:
            raise ParseError("bad number in demand", lineno) from None
        if not (0 <= j < n and 0 <= k < n):
            raise ParseError(f"demand references unknown node", lineno)
        if j == k and g != 0:
            raise ParseError("demand from a node to itself", lineno)
        if g < 0:
            raise ParseError("negative demand", lineno)
        gamma[j, k] = g
    if not header_seen:
        raise ParseError("empty traffic file")
    return gamma


def load_traffic(path: str | Path, n: int) -> np.ndarray:
    return loads_traffic(Path(path).read_text(encoding="utf-8"), n)
