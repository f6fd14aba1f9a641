"""Knowledge base of the best route found per (source, destination, graded) key."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .topology import ParseError

__all__ = ["KnowledgeBase", "RouteRecord", "load", "query", "record", "save"]


@dataclass(frozen=True)
class RouteRecord:
    source: int
    dest: int
    path: tuple[int, ...]
    fitness: float
    iterations_to_converge: int
    graded: bool
    seed: int

    @property
    def valid(self) -> bool:
        return (
            len(self.path) > 0
            and self.path[0] == self.source
            and self.path[-1] == self.dest
            and len(set(self.path)) == len(self.path)
        )

    @property
    def key(self) -> tuple[int, int, bool]:
        return (self.source, self.dest, self.graded)


class KnowledgeBase:
    """In-memory store; only strictly better routes replace an existing entry."""

    def __init__(self):
        self._routes: dict[tuple[int, int, bool], RouteRecord] = {}

    def __len__(self):
        return len(self._routes)

    def __eq__(self, other):
        return isinstance(other, KnowledgeBase) and self._routes == other._routes

    def records(self) -> list[RouteRecord]:
        return [self._routes[k] for k in sorted(self._routes)]

    def record(self, r: RouteRecord) -> bool:
        """Store ``r``; returns whether it became the entry for its key."""
        if not r.valid:
            raise ValueError(f"refusing to store invalid route {r.path} for {r.source}->{r.dest}")
        if not 0.0 <= r.fitness <= 1.0:
            raise ValueError(f"fitness {r.fitness} outside [0, 1]")
        old = self._routes.get(r.key)
        if old is not None and not r.fitness > old.fitness:
            return False
        self._routes[r.key] = r
        return True

    def query(self, source: int, dest: int, graded: bool) -> RouteRecord | None:
        return self._routes.get((source, dest, bool(graded)))

    def dumps(self) -> str:
        lines = ["kb v1"]
        for r in self.records():
            lines.append(
                f"route {r.source} {r.dest} {int(r.graded)} {r.fitness!r} "
                f"{r.iterations_to_converge} {r.seed} {'-'.join(map(str, r.path))}"
            )
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def loads(cls, text: str) -> "KnowledgeBase":
        kb = cls()
        header_seen = False
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            if not header_seen:
                if line != "kb v1":
                    raise ParseError("expected header 'kb v1'", lineno)
                header_seen = True
                continue
            tok = line.split()
            if len(tok) != 8 or tok[0] != "route" or tok[3] not in ("0", "1"):
                raise ParseError("malformed route record", lineno)
            try:
                r = RouteRecord(
                    source=int(tok[1]),
                    dest=int(tok[2]),
                    graded=tok[3] == "1",
                    fitness=float(tok[4]),
                    iterations_to_converge=int(tok[5]),
                    seed=int(tok[6]),
                    path=tuple(int(x) for x in tok[7].split("-")),
                )
                kb.record(r)
            except ValueError as exc:
                raise ParseError(f"bad route record ({exc})", lineno) from None
        if not header_seen:
            raise ParseError("empty knowledge base file")
        return kb

    @classmethod
    def load(cls, path: str | Path) -> "KnowledgeBase":
        return cls.loads(Path(path).read_text(encoding="utf-8"))


def record(kb: KnowledgeBase, r: RouteRecord) -> bool:
    return kb.record(r)


def query(kb: KnowledgeBase, source: int, dest: int, graded: bool) -> RouteRecord | None:
    return kb.query(source, dest, graded)


def save(kb: KnowledgeBase, path: str | Path) -> None:
    kb.save(path)


def load(path: str | Path) -> KnowledgeBase:
    return KnowledgeBase.load(path)
