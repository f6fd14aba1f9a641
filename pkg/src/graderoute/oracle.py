"""Exhaustive search over simple paths, used to check what the swarm finds on small graphs."""
from __future__ import annotations

from dataclasses import dataclass

from .pso import Path, fitness

__all__ = ["OracleResult", "PathList", "best_path_bruteforce", "enumerate_simple_paths"]

DEFAULT_MAX_PATHS = 10**6


class PathList(list):
    """List of paths that remembers whether enumeration stopped at the cap."""

    truncated: bool = False


@dataclass(frozen=True)
class OracleResult:
    best_path: Path
    best_fitness: float
    paths_examined: int
    truncated: bool = False


def enumerate_simple_paths(graph, source: int, dest: int, max_paths: int = DEFAULT_MAX_PATHS) -> PathList:
    """Depth-first enumeration of loop-free source->dest paths, neighbours in ascending order."""
    if max_paths < 1:
        raise ValueError("max_paths must be >= 1")
    for n in (source, dest):
        if not 0 <= n < graph.num_nodes:
            raise KeyError(f"unknown node {n}")
    out = PathList()
    if not (graph.has_node(source) and graph.has_node(dest)):
        return out
    if source == dest:
        out.append(Path((source,), True))
        return out

    prefix = [source]
    on_path = {source}
    # explicit stack of neighbour iterators keeps deep graphs off the recursion limit
    stack = [iter(graph.neighbors(source))]
    while stack:
        nxt = next(stack[-1], None)
        if nxt is None:
            stack.pop()
            on_path.discard(prefix.pop())
            continue
        nb = nxt[0]
        if nb in on_path:
            continue
        if nb == dest:
            out.append(Path(tuple(prefix) + (dest,), True))
            if len(out) >= max_paths:
                out.truncated = next(_remaining(graph, prefix, on_path, stack, dest), False)
                return out
            continue
        prefix.append(nb)
        on_path.add(nb)
        stack.append(iter(graph.neighbors(nb)))
    return out


def _remaining(graph, prefix, on_path, stack, dest):
    """Yield True if the suspended search would still produce another path."""
    prefix, on_path = list(prefix), set(on_path)
    while stack:
        nxt = next(stack[-1], None)
        if nxt is None:
            stack.pop()
            on_path.discard(prefix.pop())
            continue
        nb = nxt[0]
        if nb in on_path:
            continue
        if nb == dest:
            yield True
            return
        prefix.append(nb)
        on_path.add(nb)
        stack.append(iter(graph.neighbors(nb)))


def best_path_bruteforce(graph, source: int, dest: int, max_paths: int = DEFAULT_MAX_PATHS) -> OracleResult:
    """Highest-fitness simple path; ties go to the shorter path, then the smaller node sequence."""
    paths = enumerate_simple_paths(graph, source, dest, max_paths)
    best = None
    best_key = None
    for p in paths:
        f = fitness(p, graph)
        key = (-f, len(p.nodes), p.nodes)
        if best_key is None or key < best_key:
            best, best_key = p, key
    if best is None:
        return OracleResult(Path((source,), False), 0.0, 0, paths.truncated)
    return OracleResult(best, -best_key[0] + 0.0, len(paths), paths.truncated)
