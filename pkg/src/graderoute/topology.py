"""Region-based network topologies: construction, persistence and structural queries.

Nodes are numbered densely ``0..N-1`` and region ``r`` owns the contiguous
block ``r*pnr .. (r+1)*pnr - 1``. Links are undirected and carry two weights:
``bandwidth`` (used by the path fitness) and ``capacity`` (used by the
queueing delay model).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "AttrRanges",
    "Link",
    "Node",
    "NodeAttributes",
    "ParseError",
    "Topology",
    "TopologyError",
    "format_real",
    "generate_topology",
    "in_degree",
    "link_key",
    "load_topology",
    "neighbors",
    "save_topology",
]


class TopologyError(ValueError):
    """Raised when a topology violates a structural invariant."""


class ParseError(TopologyError):
    """Raised for malformed topology text. Carries the offending line number."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"{message} at line {lineno}"
        super().__init__(message)


def format_real(x: float) -> str:
    """Nine significant digits when that is exact, otherwise the shortest exact repr."""
    text = format(x, ".9g")
    if float(text) != x:
        text = repr(float(x))
    return text


def _quantize(x: float) -> float:
    return float(format(x, ".9g"))


def link_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class NodeAttributes:
    network_lifetime: float
    resource_allocated: bool
    bandwidth: float

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise TopologyError(f"node bandwidth must be positive, got {self.bandwidth}")
        if not self.network_lifetime >= 0:
            raise TopologyError(f"network lifetime must be >= 0, got {self.network_lifetime}")


@dataclass(frozen=True)
class Node:
    id: int
    region: int
    attrs: NodeAttributes


@dataclass(frozen=True)
class Link:
    u: int
    v: int
    bandwidth: float
    capacity: float

    def __post_init__(self):
        if self.u == self.v:
            raise TopologyError(f"self-loop on node {self.u}")
        if not (self.bandwidth > 0 and self.capacity > 0):
            raise TopologyError(f"link {self.u}-{self.v} needs positive bandwidth and capacity")

    @property
    def key(self) -> tuple[int, int]:
        return link_key(self.u, self.v)

    def other(self, n: int) -> int:
        return self.v if n == self.u else self.u


@dataclass(frozen=True)
class Topology:
    """Immutable undirected region-partitioned graph.

    Links are stored once per unordered pair, sorted by ``(min(u,v), max(u,v))``
    and normalised so that ``u < v``.
    """

    pnr: int
    region_count: int
    nodes: tuple[Node, ...]
    links: tuple[Link, ...]
    _adj: tuple[tuple[tuple[int, Link], ...], ...] = field(
        default=(), repr=False, compare=False
    )
    _by_key: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.pnr < 1 or self.region_count < 1:
            raise TopologyError("pnr and region_count must be >= 1")
        n = len(self.nodes)
        if n != self.pnr * self.region_count:
            raise TopologyError(
                f"node count {n} != pnr*regions = {self.pnr * self.region_count}"
            )
        for i, node in enumerate(self.nodes):
            if node.id != i:
                raise TopologyError(f"node ids must be dense 0..N-1; got {node.id} at slot {i}")
            if not 0 <= node.region < self.region_count:
                raise TopologyError(f"node {i} has unknown region {node.region}")

        by_key: dict[tuple[int, int], Link] = {}
        for link in self.links:
            for end in (link.u, link.v):
                if not 0 <= end < n:
                    raise TopologyError(f"link {link.u}-{link.v} references unknown node {end}")
            if link.key in by_key:
                raise TopologyError(f"duplicate link {link.key[0]}-{link.key[1]}")
            by_key[link.key] = link
        links = tuple(
            Link(k[0], k[1], by_key[k].bandwidth, by_key[k].capacity) for k in sorted(by_key)
        )
        adj: list[list[tuple[int, Link]]] = [[] for _ in range(n)]
        for link in links:
            adj[link.u].append((link.v, link))
            adj[link.v].append((link.u, link))
        for row in adj:
            row.sort(key=lambda item: item[0])
        object.__setattr__(self, "links", links)
        object.__setattr__(self, "_by_key", {l.key: l for l in links})
        object.__setattr__(self, "_adj", tuple(tuple(row) for row in adj))

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    def has_node(self, n: int) -> bool:
        return 0 <= n < len(self.nodes)

    def _check(self, n: int) -> None:
        if not self.has_node(n):
            raise KeyError(f"unknown node {n}")

    def neighbors(self, n: int) -> list[tuple[int, Link]]:
        self._check(n)
        return list(self._adj[n])

    def link(self, u: int, v: int) -> Link | None:
        return self._by_key.get(link_key(u, v))

    def region_nodes(self, region: int) -> list[int]:
        return [nd.id for nd in self.nodes if nd.region == region]

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[tuple[int, int, float] | tuple[int, int, float, float]],
        pnr: int | None = None,
        attrs: Sequence[NodeAttributes] | None = None,
    ) -> "Topology":
        """Convenience constructor for hand-built graphs.

        ``edges`` holds ``(u, v, bandwidth)`` or ``(u, v, bandwidth, capacity)``;
        capacity defaults to 10. With ``pnr=None`` the whole graph is one region.
        """
        pnr = n if pnr is None else pnr
        regions = n // pnr
        default = NodeAttributes(1.0, True, 1.0)
        nodes = tuple(
            Node(i, i // pnr, attrs[i] if attrs is not None else default) for i in range(n)
        )
        links = []
        for e in edges:
            u, v, bw = e[0], e[1], e[2]
            cap = e[3] if len(e) > 3 else 10.0
            links.append(Link(int(u), int(v), float(bw), float(cap)))
        return cls(pnr=pnr, region_count=regions, nodes=nodes, links=tuple(links))


def neighbors(t, n: int) -> list[tuple[int, Link]]:
    """Neighbours of ``n`` in ascending node order, paired with the connecting link."""
    return t.neighbors(n)


def in_degree(t, n: int) -> int:
    """Number of links incident to ``n``; links are undirected so this is the degree."""
    return len(t.neighbors(n))


@dataclass(frozen=True)
class AttrRanges:
    """Sampling ranges for generated node and link attributes."""

    lifetime: tuple[float, float] = (10.0, 100.0)
    dead_prob: float = 0.1
    node_bandwidth: tuple[float, float] = (1.0, 100.0)
    link_bandwidth: tuple[float, float] = (1.0, 10.0)
    capacity: tuple[float, float] = (5.0, 20.0)
    resource_prob: float = 0.8

    def validate(self) -> None:
        for name in ("lifetime", "node_bandwidth", "link_bandwidth", "capacity"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} range has min {lo} > max {hi}")
        if self.lifetime[0] < 0:
            raise ValueError("lifetime range must be non-negative")
        for name in ("node_bandwidth", "link_bandwidth", "capacity"):
            if getattr(self, name)[0] <= 0:
                raise ValueError(f"{name} range must be positive")
        for name in ("dead_prob", "resource_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")


def generate_topology(
    region_count: int,
    pnr: int,
    intra_edge_prob: float = 0.2,
    inter_edges_per_region_pair: int = 2,
    attr_ranges: AttrRanges | None = None,
    seed: int = 0,
) -> Topology:
    """Random region-based topology.

    Each region first receives a random spanning tree over its nodes, then every
    remaining intra-region pair is linked with probability ``intra_edge_prob``.
    Regions form a chain: regions ``r`` and ``r+1`` are joined by
    ``inter_edges_per_region_pair`` random gateway links whose endpoint ids
    differ by less than ``pnr`` (fewer links if such pairs run out).
    """
    if region_count < 1 or pnr < 1:
        raise ValueError("region_count and pnr must be >= 1")
    if not 0.0 <= intra_edge_prob <= 1.0:
        raise ValueError(f"intra_edge_prob must lie in [0, 1], got {intra_edge_prob}")
    if inter_edges_per_region_pair < 0:
        raise ValueError("inter_edges_per_region_pair must be >= 0")
    ranges = attr_ranges or AttrRanges()
    ranges.validate()
    rng = np.random.default_rng(seed)

    def draw(lo_hi: tuple[float, float]) -> float:
        return _quantize(rng.uniform(*lo_hi))

    n = region_count * pnr
    nodes = []
    for i in range(n):
        dead = rng.random() < ranges.dead_prob
        lifetime = 0.0 if dead else draw(ranges.lifetime)
        resource = bool(rng.random() < ranges.resource_prob)
        nodes.append(Node(i, i // pnr, NodeAttributes(lifetime, resource, draw(ranges.node_bandwidth))))

    pairs: list[tuple[int, int]] = []
    present: set[tuple[int, int]] = set()

    def add(u: int, v: int) -> None:
        k = link_key(u, v)
        if k not in present:
            present.add(k)
            pairs.append(k)

    for r in range(region_count):
        members = list(range(r * pnr, (r + 1) * pnr))
        order = [members[i] for i in rng.permutation(pnr)]
        for i in range(1, pnr):
            add(order[i], order[int(rng.integers(0, i))])
        for a in range(pnr):
            for b in range(a + 1, pnr):
                if rng.random() < intra_edge_prob:
                    add(members[a], members[b])

    for r in range(region_count - 1):
        lo, mid, hi = r * pnr, (r + 1) * pnr, (r + 2) * pnr
        pairs_all = [(a, b) for a in range(lo, mid) for b in range(mid, hi)]
        # gateways keep |u - v| < pnr so the decoder's index window can cross them
        candidates = [(a, b) for a, b in pairs_all if b - a < pnr] or pairs_all
        k = min(inter_edges_per_region_pair, len(candidates))
        for idx in sorted(rng.choice(len(candidates), size=k, replace=False)):
            add(*candidates[int(idx)])

    links = tuple(
        Link(u, v, draw(ranges.link_bandwidth), draw(ranges.capacity)) for u, v in pairs
    )
    return Topology(pnr=pnr, region_count=region_count, nodes=tuple(nodes), links=links)


def dumps_topology(t: Topology) -> str:
    lines = ["topology v1", f"regions {t.region_count} pnr {t.pnr}"]
    for nd in t.nodes:
        a = nd.attrs
        lines.append(
            f"node {nd.id} {nd.region} {format_real(a.bandwidth)} "
            f"{format_real(a.network_lifetime)} {int(a.resource_allocated)}"
        )
    for l in t.links:
        lines.append(f"link {l.u} {l.v} {format_real(l.bandwidth)} {format_real(l.capacity)}")
    return "\n".join(lines) + "\n"


def save_topology(t: Topology, path: str | Path) -> None:
    Path(path).write_text(dumps_topology(t), encoding="utf-8")


def _num(tok: str, lineno: int, kind=float):
    try:
        return kind(tok)
    except ValueError:
        raise ParseError(f"bad number {tok!r}", lineno) from None


def loads_topology(text: str) -> Topology:
    header_seen = False
    regions = pnr = None
    nodes: dict[int, Node] = {}
    links: dict[tuple[int, int], Link] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if not header_seen:
            if tok != ["topology", "v1"]:
                raise ParseError("expected header 'topology v1'", lineno)
            header_seen = True
            continue
        kind = tok[0]
        if kind == "regions":
            if len(tok) != 4 or tok[2] != "pnr":
                raise ParseError("expected 'regions <R> pnr <P>'", lineno)
            regions, pnr = _num(tok[1], lineno, int), _num(tok[3], lineno, int)
        elif kind == "node":
            if len(tok) != 6:
                raise ParseError("expected 'node <id> <region> <bandwidth> <lifetime> <resource>'", lineno)
            nid, region = _num(tok[1], lineno, int), _num(tok[2], lineno, int)
            if tok[5] not in ("0", "1"):
                raise ParseError(f"resource flag must be 0 or 1, got {tok[5]!r}", lineno)
            if nid in nodes:
                raise ParseError(f"duplicate node {nid}", lineno)
            try:
                attrs = NodeAttributes(
                    _num(tok[4], lineno), tok[5] == "1", _num(tok[3], lineno)
                )
            except TopologyError as exc:
                raise ParseError(str(exc), lineno) from None
            nodes[nid] = Node(nid, region, attrs)
        elif kind == "link":
            if len(tok) != 5:
                raise ParseError("expected 'link <u> <v> <bandwidth> <capacity>'", lineno)
            u, v = _num(tok[1], lineno, int), _num(tok[2], lineno, int)
            if u == v:
                raise ParseError(f"self-loop at line {lineno}")
            key = link_key(u, v)
            if key in links:
                raise TopologyError(f"duplicate link {key[0]}-{key[1]} at line {lineno}")
            try:
                links[key] = Link(u, v, _num(tok[3], lineno), _num(tok[4], lineno))
            except TopologyError as exc:
                raise ParseError(str(exc), lineno) from None
        else:
            raise ParseError(f"unknown record {kind!r}", lineno)
    if not header_seen:
        raise ParseError("empty topology file")
    if regions is None:
        raise TopologyError("missing 'regions <R> pnr <P>' line")
    if len(nodes) != regions * pnr:
        raise TopologyError(
            f"declared {regions}x{pnr} = {regions * pnr} nodes but found {len(nodes)} node lines"
        )
    ordered = tuple(nodes[i] if i in nodes else None for i in range(len(nodes)))
    if any(nd is None for nd in ordered):
        raise TopologyError("node ids must be dense 0..N-1")
    return Topology(pnr=pnr, region_count=regions, nodes=ordered, links=tuple(links.values()))


def load_topology(path: str | Path) -> Topology:
    return loads_topology(Path(path).read_text(encoding="utf-8"))
