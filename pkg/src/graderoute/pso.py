"""Level-2 path search: priority-vector particles decoded into paths, scored by bandwidth ratio.

Each particle is a real vector with one priority per node. Decoding walks from
the source, always stepping to the admissible neighbour with the highest
priority, and tombstones visited nodes so that paths are loop-free.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .kb import RouteRecord

__all__ = [
    "TOMBSTONE",
    "ConvergenceTrace",
    "Particle",
    "Path",
    "Swarm",
    "SwarmConfig",
    "decode_path",
    "fitness",
    "init_swarm",
    "run",
    "step",
    "window_ok",
]

TOMBSTONE = -999.0
INIT_POSITION = 5.0
INIT_VELOCITY = 1.0


@dataclass(frozen=True)
class Path:
    nodes: tuple[int, ...]
    valid: bool

    def links(self) -> list[tuple[int, int]]:
        return list(zip(self.nodes, self.nodes[1:]))

    def __len__(self):
        return len(self.nodes)


@dataclass(frozen=True)
class SwarmConfig:
    particle_count: int = 30
    iterations: int = 100
    w: float = 0.8
    c1: float = 2.0
    c2: float = 2.0
    v_max: float = 4.0
    M: int = 4
    perturbation: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.particle_count < 1:
            raise ValueError("particle_count must be >= 1")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if not self.v_max > 0:
            raise ValueError("v_max must be positive")
        if self.M < 1:
            raise ValueError("M must be >= 1")
        if not 0.0 <= self.perturbation < 0.5:
            raise ValueError("perturbation must lie in [0, 0.5)")


def window_ok(current: int, candidate: int, source: int, dest: int, M: int) -> bool:
    """Index-window rule that stops the walk from jumping too far away from the destination."""
    delta = candidate - current
    if source > dest:
        return delta > -M
    return delta < M


def decode_path(x, graph, source: int, dest: int, M: int) -> Path:
    """Turn priority vector ``x`` into a path from ``source`` toward ``dest``.

    Ties in priority go to the smaller node id. ``x`` itself is left untouched.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    for n in (source, dest):
        if not 0 <= n < graph.num_nodes:
            raise KeyError(f"unknown node {n}")
    work = np.array(x, dtype=float, copy=True)
    visited = {source}
    work[source] = TOMBSTONE
    nodes = [source]
    cur = source
    while cur != dest:
        best = None
        best_pri = -np.inf
        for nb, _ in graph.neighbors(cur):
            if nb in visited or not window_ok(cur, nb, source, dest, M):
                continue
            # neighbours arrive in ascending id order, so strict > keeps the lowest id on ties
            if best is None or work[nb] > best_pri:
                best, best_pri = nb, work[nb]
        if best is None:
            return Path(tuple(nodes), False)
        visited.add(best)
        work[best] = TOMBSTONE
        nodes.append(best)
        cur = best
    return Path(tuple(nodes), True)


def fitness(p: Path, graph, bandwidths: Mapping[tuple[int, int], float] | None = None) -> float:
    """First-link bandwidth over the summed bandwidth of every link on the path.

    Invalid and single-node paths score 0. ``bandwidths`` optionally overrides
    link bandwidths by ``(min, max)`` key.
    """
    if not p.valid or len(p.nodes) < 2:
        return 0.0
    bw = []
    for u, v in p.links():
        link = graph.link(u, v)
        if link is None:
            return 0.0
        if bandwidths is not None and link.key in bandwidths:
            bw.append(bandwidths[link.key])
        else:
            bw.append(link.bandwidth)
    return bw[0] / sum(bw)


@dataclass(frozen=True)
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    decoded_path: Path
    fitness: float
    pbest_position: np.ndarray
    pbest_fitness: float
    pbest_path: Path


@dataclass
class Swarm:
    """Array-backed swarm state; row ``i`` of every array belongs to particle ``i``."""

    source: int
    dest: int
    positions: np.ndarray
    velocities: np.ndarray
    paths: list[Path]
    fitness: np.ndarray
    pbest_positions: np.ndarray
    pbest_fitness: np.ndarray
    pbest_paths: list[Path]
    gbest_index: int
    rng: np.random.Generator = field(repr=False)
    improved: bool = False

    @property
    def gbest_fitness(self) -> float:
        return float(self.pbest_fitness[self.gbest_index])

    @property
    def gbest_position(self) -> np.ndarray:
        return self.pbest_positions[self.gbest_index]

    @property
    def gbest_path(self) -> Path:
        return self.pbest_paths[self.gbest_index]

    def __len__(self):
        return len(self.paths)

    def particle(self, i: int) -> Particle:
        return Particle(
            self.positions[i].copy(), self.velocities[i].copy(), self.paths[i],
            float(self.fitness[i]), self.pbest_positions[i].copy(),
            float(self.pbest_fitness[i]), self.pbest_paths[i],
        )


def init_swarm(cfg: SwarmConfig, graph, source: int, dest: int) -> Swarm:
    rng = np.random.default_rng(cfg.seed)
    n = graph.num_nodes
    pos = rng.uniform(-INIT_POSITION, INIT_POSITION, size=(cfg.particle_count, n))
    vel = rng.uniform(-INIT_VELOCITY, INIT_VELOCITY, size=(cfg.particle_count, n))
    paths = [decode_path(x, graph, source, dest, cfg.M) for x in pos]
    fit = np.array([fitness(p, graph) for p in paths])
    return Swarm(
        source=source, dest=dest, positions=pos, velocities=vel, paths=paths,
        fitness=fit, pbest_positions=pos.copy(), pbest_fitness=fit.copy(),
        pbest_paths=list(paths), gbest_index=int(np.argmax(fit)), rng=rng,
    )


def _perturbed(path: Path, graph, rng: np.random.Generator, half_width: float):
    out = {}
    for u, v in path.links():
        link = graph.link(u, v)
        out[link.key] = link.bandwidth * rng.uniform(1.0 - half_width, 1.0 + half_width)
    return out


def step(s: Swarm, graph, cfg: SwarmConfig) -> Swarm:
    """Advance the swarm one iteration in place and return it."""
    rng = s.rng
    shape = s.positions.shape
    r1 = rng.random(shape)
    r2 = rng.random(shape)
    gbest = s.gbest_position
    v = (
        cfg.w * s.velocities
        + cfg.c1 * r1 * (s.pbest_positions - s.positions)
        + cfg.c2 * r2 * (gbest - s.positions)
    )
    np.clip(v, -cfg.v_max, cfg.v_max, out=v)
    s.velocities = v
    s.positions = s.positions + v

    old_best = s.gbest_fitness
    for i in range(shape[0]):
        path = decode_path(s.positions[i], graph, s.source, s.dest, cfg.M)
        if cfg.perturbation > 0 and path.valid:
            f = fitness(path, graph, _perturbed(path, graph, rng, cfg.perturbation))
        else:
            f = fitness(path, graph)
        s.paths[i] = path
        s.fitness[i] = f
        if f > s.pbest_fitness[i]:
            s.pbest_fitness[i] = f
            s.pbest_positions[i] = s.positions[i]
            s.pbest_paths[i] = path
    s.gbest_index = int(np.argmax(s.pbest_fitness))
    s.improved = s.gbest_fitness > old_best
    return s


@dataclass(frozen=True)
class ConvergenceTrace:
    """gBest fitness after initialisation (index 0) and after each iteration."""

    fitness: tuple[float, ...]

    @property
    def iterations_to_converge(self) -> int:
        last = 0
        for i in range(1, len(self.fitness)):
            if self.fitness[i] > self.fitness[i - 1]:
                last = i
        return last


def run(
    cfg: SwarmConfig, graph, source: int, dest: int, graded: bool = False
) -> tuple[RouteRecord, ConvergenceTrace]:
    s = init_swarm(cfg, graph, source, dest)
    trace = [s.gbest_fitness]
    for _ in range(cfg.iterations):
        step(s, graph, cfg)
        trace.append(s.gbest_fitness)
    tr = ConvergenceTrace(tuple(trace))
    best = s.gbest_path
    rec = RouteRecord(
        source=source,
        dest=dest,
        path=best.nodes if best.valid else (),
        fitness=s.gbest_fitness,
        iterations_to_converge=tr.iterations_to_converge,
        graded=graded,
        seed=cfg.seed,
    )
    return rec, tr


def with_defaults_for(graph, cfg: SwarmConfig | None = None, **overrides) -> SwarmConfig:
    """Config with ``M`` set to the graph's nodes-per-region."""
    cfg = cfg or SwarmConfig()
    return replace(cfg, M=graph.pnr, **overrides)
