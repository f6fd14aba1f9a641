"""Level-1 node grading: rule-based priorities, the -3..+3 grade scale and the graded subgraph."""
from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass, field
from typing import IO, Sequence

from .topology import Link, NodeAttributes, Topology
from .traffic import NodeDynamics

__all__ = [
    "DENSITY_LIMIT",
    "GRADE_OF_PRIORITY",
    "GradedSubgraph",
    "assign_priority",
    "grade_nodes",
    "level1_select",
    "priority_to_grade",
    "verify_connectivity",
    "write_grade_report",
]

DENSITY_LIMIT = 5
TOP_PER_REGION = 3
SURVIVOR_BAND = (0, 2)
FALLBACK_BAND = (-2, 3)

# 0 is the optimum, positives are usable with caveats, negatives are structurally poor/dead.
GRADE_OF_PRIORITY = {1: 0, 2: 1, 3: 2, 4: 3, 5: -2, 6: -3}


def assign_priority(attrs: NodeAttributes, dyn: NodeDynamics) -> int:
    """Priority class 1 (best) .. 6 (dead) from the nested rule chain."""
    if not attrs.network_lifetime > 0:
        return 6
    if dyn.density >= DENSITY_LIMIT:
        return 5
    if dyn.congestion_present:
        return 4
    if not attrs.resource_allocated:
        return 3
    if dyn.delay_present:
        return 2
    return 1


def priority_to_grade(p: int) -> int:
    try:
        return GRADE_OF_PRIORITY[p]
    except KeyError:
        raise ValueError(f"priority must be in 1..6, got {p}") from None


def grade_nodes(t: Topology, dynamics: Sequence[NodeDynamics]) -> tuple[list[int], list[int]]:
    """Priorities and grades for every node, in node order."""
    priorities = [assign_priority(nd.attrs, dyn) for nd, dyn in zip(t.nodes, dynamics)]
    return priorities, [priority_to_grade(p) for p in priorities]


@dataclass
class GradedSubgraph:
    """View of a topology restricted to the kept nodes.

    Exposes the same ``neighbors``/``link``/``num_nodes`` surface as
    :class:`Topology` so path decoding and enumeration run on either.
    Node ids keep their original numbering.
    """

    topology: Topology
    kept_nodes: frozenset[int]
    provenance: dict[int, str] = field(default_factory=dict)
    connected: bool = True

    @property
    def induced_links(self) -> list[Link]:
        kept = self.kept_nodes
        return [l for l in self.topology.links if l.u in kept and l.v in kept]

    @property
    def num_nodes(self) -> int:
        return self.topology.num_nodes

    @property
    def pnr(self) -> int:
        return self.topology.pnr

    def has_node(self, n: int) -> bool:
        return n in self.kept_nodes

    def neighbors(self, n: int) -> list[tuple[int, Link]]:
        if n not in self.kept_nodes:
            if not self.topology.has_node(n):
                raise KeyError(f"unknown node {n}")
            return []
        return [(m, l) for m, l in self.topology.neighbors(n) if m in self.kept_nodes]

    def link(self, u: int, v: int) -> Link | None:
        if u in self.kept_nodes and v in self.kept_nodes:
            return self.topology.link(u, v)
        return None


def _reachable(graph, source: int, dest: int) -> bool:
    if not graph.has_node(source) or not graph.has_node(dest):
        return False
    seen = {source}
    queue = deque([source])
    while queue:
        cur = queue.popleft()
        if cur == dest:
            return True
        for nb, _ in graph.neighbors(cur):
            if nb not in seen:
                seen.add(nb)
                queue.append(nb)
    return False


def verify_connectivity(g: GradedSubgraph, source: int, dest: int) -> bool:
    """Breadth-first reachability of ``dest`` from ``source`` inside the subgraph."""
    return _reachable(g, source, dest)


def level1_select(
    t: Topology, grades: Sequence[int], source: int, dest: int
) -> GradedSubgraph:
    """Keep endpoints, nodes graded 0..+2 and the three best nodes of each region.

    Region ranking is by ``|grade|`` ascending, node bandwidth descending, id
    ascending. If ``dest`` is unreachable, nodes graded -2..+3 are re-admitted
    in rank order until it is reachable, then any re-admitted node the
    connection does not need is dropped again. If even the whole widened band
    cannot connect the endpoints, the result keeps that band and comes back
    with ``connected=False``.
    """
    for n in (source, dest):
        if not t.has_node(n):
            raise KeyError(f"unknown node {n}")
    if len(grades) != t.num_nodes:
        raise ValueError(f"need {t.num_nodes} grades, got {len(grades)}")

    reason: dict[int, str] = {source: "endpoint", dest: "endpoint"}
    lo, hi = SURVIVOR_BAND
    for nd in t.nodes:
        if nd.id not in reason and lo <= grades[nd.id] <= hi:
            reason[nd.id] = "in-range"

    def rank(n: int):
        return (abs(grades[n]), -t.nodes[n].attrs.bandwidth, n)

    for r in range(t.region_count):
        ranked = sorted(t.region_nodes(r), key=rank)
        for n in ranked[:TOP_PER_REGION]:
            reason.setdefault(n, "top3")

    g = GradedSubgraph(t, frozenset(reason), dict(reason))
    if verify_connectivity(g, source, dest):
        return g

    lo, hi = FALLBACK_BAND
    candidates = sorted(
        (nd.id for nd in t.nodes if nd.id not in reason and lo <= grades[nd.id] <= hi),
        key=rank,
    )
    kept = set(reason)
    added = []
    for n in candidates:
        kept.add(n)
        added.append(n)
        if _reachable(GradedSubgraph(t, frozenset(kept)), source, dest):
            break
    else:
        for n in added:
            reason[n] = "fallback"
        return GradedSubgraph(t, frozenset(kept), dict(reason), connected=False)

    # drop widened nodes the route does not need, latest first
    for n in reversed(added):
        kept.discard(n)
        if not _reachable(GradedSubgraph(t, frozenset(kept)), source, dest):
            kept.add(n)
    for n in added:
        if n in kept:
            reason[n] = "fallback"
    return GradedSubgraph(t, frozenset(kept), dict(reason))


def write_grade_report(
    fh: IO[str],
    t: Topology,
    priorities: Sequence[int],
    grades: Sequence[int],
    g: GradedSubgraph,
) -> None:
    """CSV with columns ``node,region,priority,grade,kept,reason``."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["node", "region", "priority", "grade", "kept", "reason"])
    for nd in t.nodes:
        kept = nd.id in g.kept_nodes
        w.writerow([
            nd.id, nd.region, priorities[nd.id], grades[nd.id], int(kept),
            g.provenance.get(nd.id, "excluded"),
        ])
