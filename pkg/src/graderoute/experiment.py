"""Pipeline wiring: traffic model -> grading -> swarm search -> knowledge base, plus the paired comparison."""
from __future__ import annotations

import csv
import io
import logging
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import IO, Iterable, Sequence

import numpy as np

from . import grading, oracle, pso, traffic
from .kb import KnowledgeBase, RouteRecord
from .topology import AttrRanges, Topology, format_real, generate_topology

__all__ = [
    "COMPARE_COLUMNS",
    "ComparisonRow",
    "ExperimentConfig",
    "RouteResult",
    "Summary",
    "compare",
    "grade",
    "read_comparison_csv",
    "report",
    "route",
    "summarize",
    "trial_seed",
    "write_comparison_csv",
]

log = logging.getLogger(__name__)

COMPARE_COLUMNS = [
    "trial", "ungraded_iterations", "ungraded_fitness",
    "graded_iterations", "graded_fitness", "nodes_total", "nodes_graded",
]
REPORT_COLUMNS = [
    "trial", "nodes_ungraded", "nodes_graded",
    "ungraded_iterations", "graded_iterations", "iteration_reduction",
]

_TAGS = {"topology": 0, "demands": 1, "endpoints": 2, "ungraded": 3, "graded": 4}


def trial_seed(master_seed: int, trial: int, tag: str) -> int:
    """Independent 63-bit seed for one (trial, purpose) stream."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(trial, _TAGS[tag]))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


@dataclass(frozen=True)
class Grading:
    dynamics: list
    priorities: list[int]
    grades: list[int]


def grade(
    t: Topology,
    gamma,
    mu: float = 1.0,
    delay_threshold: float = traffic.DEFAULT_DELAY_THRESHOLD,
    util_threshold: float = traffic.DEFAULT_UTIL_THRESHOLD,
) -> Grading:
    model = traffic.TrafficModel.build(t, gamma, mu)
    dyn = traffic.derive_dynamics(t, model, delay_threshold, util_threshold)
    priorities, grades = grading.grade_nodes(t, dyn)
    return Grading(dyn, priorities, grades)


@dataclass
class RouteResult:
    mode: str
    path: tuple[int, ...]
    fitness: float
    iterations_to_converge: int
    nodes_total: int
    nodes_used: int
    record: RouteRecord | None = None
    subgraph: grading.GradedSubgraph | None = None

    @property
    def found(self) -> bool:
        return len(self.path) > 0


def route(
    t: Topology,
    gamma,
    source: int,
    dest: int,
    mode: str,
    cfg: pso.SwarmConfig,
    mu: float = 1.0,
    delay_threshold: float = traffic.DEFAULT_DELAY_THRESHOLD,
    util_threshold: float = traffic.DEFAULT_UTIL_THRESHOLD,
    kb: KnowledgeBase | None = None,
) -> RouteResult:
    """Route one demand. ``mode`` is ``ungraded``, ``graded`` or ``oracle``."""
    if mode not in ("ungraded", "graded", "oracle"):
        raise ValueError(f"unknown mode {mode!r}")
    n = t.num_nodes
    if mode == "oracle":
        res = oracle.best_path_bruteforce(t, source, dest)
        path = res.best_path.nodes if res.best_path.valid else ()
        return RouteResult(mode, path, res.best_fitness, 0, n, n)

    if mode == "graded":
        g = grade(t, gamma, mu, delay_threshold, util_threshold)
        graph = grading.level1_select(t, g.grades, source, dest)
        used = len(graph.kept_nodes)
    else:
        # the ungraded run still needs a feasible traffic model to be meaningful
        traffic.TrafficModel.build(t, gamma, mu)
        graph, used = t, n
    rec, _ = pso.run(cfg, graph, source, dest, graded=mode == "graded")
    if kb is not None and rec.valid:
        kb.record(rec)
    return RouteResult(
        mode, rec.path, rec.fitness, rec.iterations_to_converge, n, used, rec,
        graph if mode == "graded" else None,
    )


@dataclass(frozen=True)
class ExperimentConfig:
    regions: int = 4
    pnr: int = 8
    intra_edge_prob: float = 0.2
    inter_edges_per_region_pair: int = 2
    attr_ranges: AttrRanges = field(default_factory=AttrRanges)
    demand_density: float = 0.15
    gamma_range: tuple[float, float] = (0.01, 0.1)
    mu: float = 1.0
    swarm: pso.SwarmConfig = field(default_factory=pso.SwarmConfig)
    delay_threshold: float = traffic.DEFAULT_DELAY_THRESHOLD
    util_threshold: float = traffic.DEFAULT_UTIL_THRESHOLD
    trials: int = 30
    master_seed: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.regions < 2:
            raise ValueError("comparison needs at least two regions")


@dataclass(frozen=True)
class ComparisonRow:
    trial: int
    ungraded_iterations: int
    ungraded_fitness: float
    graded_iterations: int
    graded_fitness: float
    nodes_total: int
    nodes_graded: int


@dataclass(frozen=True)
class TrialDetail:
    """Everything a single comparison trial produced, for checks beyond the CSV row."""

    row: ComparisonRow
    topology: Topology
    grades: list[int]
    source: int
    dest: int
    subgraph: grading.GradedSubgraph


def _pick_endpoints(t: Topology, rng: np.random.Generator) -> tuple[int, int]:
    r1, r2 = rng.choice(t.region_count, size=2, replace=False)
    src = int(rng.choice(t.region_nodes(int(r1))))
    dst = int(rng.choice(t.region_nodes(int(r2))))
    return src, dst


def run_trial(cfg: ExperimentConfig, trial: int) -> TrialDetail:
    t = generate_topology(
        cfg.regions, cfg.pnr, cfg.intra_edge_prob, cfg.inter_edges_per_region_pair,
        cfg.attr_ranges, seed=trial_seed(cfg.master_seed, trial, "topology"),
    )
    gamma = traffic.synthetic_demands(
        t.num_nodes, np.random.default_rng(trial_seed(cfg.master_seed, trial, "demands")),
        cfg.demand_density, cfg.gamma_range,
    )
    src, dst = _pick_endpoints(
        t, np.random.default_rng(trial_seed(cfg.master_seed, trial, "endpoints"))
    )
    g = grade(t, gamma, cfg.mu, cfg.delay_threshold, cfg.util_threshold)
    sub = grading.level1_select(t, g.grades, src, dst)

    base = replace(cfg.swarm, M=t.pnr)
    ung, _ = pso.run(replace(base, seed=trial_seed(cfg.master_seed, trial, "ungraded")), t, src, dst)
    grd, _ = pso.run(
        replace(base, seed=trial_seed(cfg.master_seed, trial, "graded")), sub, src, dst, graded=True
    )
    row = ComparisonRow(
        trial, ung.iterations_to_converge, ung.fitness,
        grd.iterations_to_converge, grd.fitness, t.num_nodes, len(sub.kept_nodes),
    )
    return TrialDetail(row, t, g.grades, src, dst, sub)


def _safe_trial(cfg: ExperimentConfig, trial: int) -> TrialDetail | ComparisonRow:
    try:
        return run_trial(cfg, trial)
    except Exception as exc:  # one bad trial must not sink the batch
        log.warning("trial %d failed: %s", trial, exc)
        n = cfg.regions * cfg.pnr
        return ComparisonRow(trial, -1, float("nan"), -1, float("nan"), n, n)


def compare(
    cfg: ExperimentConfig, details: list | None = None, workers: int = 1
) -> list[ComparisonRow]:
    """Paired ungraded/graded runs, one row per trial in trial order.

    A failing trial is logged and reported with iterations ``-1`` and NaN fitness.
    With ``workers > 1`` trials run in separate processes; output order and
    values do not depend on scheduling.
    """
    trials = range(cfg.trials)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_safe_trial, [cfg] * cfg.trials, trials))
    else:
        results = [_safe_trial(cfg, t) for t in trials]
    rows = []
    for res in results:
        if isinstance(res, TrialDetail):
            rows.append(res.row)
            if details is not None:
                details.append(res)
        else:
            rows.append(res)
    return rows


@dataclass(frozen=True)
class Summary:
    trials: int
    median_iteration_reduction: float
    fraction_graded_not_slower: float
    mean_node_ratio: float


def summarize(rows: Sequence[ComparisonRow]) -> Summary:
    ok = [r for r in rows if r.ungraded_iterations >= 0 and r.graded_iterations >= 0]
    if not ok:
        return Summary(0, float("nan"), float("nan"), float("nan"))
    return Summary(
        trials=len(ok),
        median_iteration_reduction=float(
            statistics.median(r.ungraded_iterations - r.graded_iterations for r in ok)
        ),
        fraction_graded_not_slower=sum(
            r.graded_iterations <= r.ungraded_iterations for r in ok
        ) / len(ok),
        mean_node_ratio=statistics.fmean(r.nodes_graded / r.nodes_total for r in ok),
    )


def write_comparison_csv(fh: IO[str], rows: Iterable[ComparisonRow]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(COMPARE_COLUMNS)
    for r in rows:
        w.writerow([
            r.trial, r.ungraded_iterations, format_real(r.ungraded_fitness),
            r.graded_iterations, format_real(r.graded_fitness), r.nodes_total, r.nodes_graded,
        ])


def comparison_csv(rows: Iterable[ComparisonRow]) -> str:
    buf = io.StringIO()
    write_comparison_csv(buf, rows)
    return buf.getvalue()


class CsvFormatError(ValueError):
    def __init__(self, message: str, lineno: int):
        self.lineno = lineno
        super().__init__(f"{message} at line {lineno}")


def read_comparison_csv(fh: IO[str]) -> list[ComparisonRow]:
    reader = csv.reader(fh)
    header = next(reader, None)
    if header is None:
        return []
    if header != COMPARE_COLUMNS:
        raise CsvFormatError(f"unexpected header {header}", 1)
    rows = []
    for cells in reader:
        lineno = reader.line_num
        if not cells:
            continue
        if len(cells) != len(COMPARE_COLUMNS):
            raise CsvFormatError(f"expected {len(COMPARE_COLUMNS)} columns, got {len(cells)}", lineno)
        try:
            row = ComparisonRow(
                int(cells[0]), int(cells[1]), float(cells[2]),
                int(cells[3]), float(cells[4]), int(cells[5]), int(cells[6]),
            )
        except ValueError as exc:
            raise CsvFormatError(f"bad value ({exc})", lineno) from None
        if row.nodes_graded > row.nodes_total:
            raise CsvFormatError("nodes_graded exceeds nodes_total", lineno)
        rows.append(row)
    return rows


def report(rows: Sequence[ComparisonRow], fh: IO[str]) -> None:
    """Per-trial node-count and iteration series, ready for plotting."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in rows:
        w.writerow([
            r.trial, r.nodes_total, r.nodes_graded, r.ungraded_iterations,
            r.graded_iterations, r.ungraded_iterations - r.graded_iterations,
        ])
