"""``grade-route`` command line: generate, route, compare, report."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import experiment, grading, traffic
from .experiment import ExperimentConfig
from .kb import KnowledgeBase
from .pso import SwarmConfig
from .topology import TopologyError, generate_topology, load_topology, save_topology

EX_OK = 0
EX_NOPATH = 2
EX_USAGE = 64
EX_DATAERR = 65
EX_IOERR = 74

log = logging.getLogger("graderoute")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _swarm_flags(p: argparse.ArgumentParser) -> None:
    d = SwarmConfig()
    g = p.add_argument_group("swarm")
    g.add_argument("--particles", type=int, default=d.particle_count)
    g.add_argument("--iterations", type=int, default=d.iterations)
    g.add_argument("--w", type=float, default=d.w, help="inertia weight")
    g.add_argument("--c1", type=float, default=d.c1, help="cognitive coefficient")
    g.add_argument("--c2", type=float, default=d.c2, help="social coefficient")
    g.add_argument("--vmax", type=float, default=d.v_max, help="velocity clamp")
    g.add_argument("--perturbation", type=float, default=d.perturbation,
                   help="half-width of the random link-cost change per iteration")
    g.add_argument("--seed", type=int, default=0)


def _threshold_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--delay-threshold", type=float, default=traffic.DEFAULT_DELAY_THRESHOLD)
    p.add_argument("--util-threshold", type=float, default=traffic.DEFAULT_UTIL_THRESHOLD)
    p.add_argument("--mu", type=float, default=1.0)


def _swarm_config(args, M: int) -> SwarmConfig:
    try:
        return SwarmConfig(
            particle_count=args.particles, iterations=args.iterations, w=args.w,
            c1=args.c1, c2=args.c2, v_max=args.vmax, M=M,
            perturbation=args.perturbation, seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="grade-route", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="write a random region-based topology")
    p.add_argument("--regions", type=int, default=4)
    p.add_argument("--pnr", type=int, default=8)
    p.add_argument("--intra-prob", type=float, default=0.2)
    p.add_argument("--inter-edges", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--traffic-out", help="also write a synthetic traffic matrix here")
    p.add_argument("--demand-density", type=float, default=0.15)

    p = sub.add_parser("route", help="find a route between two nodes")
    p.add_argument("--topology", required=True)
    p.add_argument("--traffic", help="traffic matrix file (no traffic when omitted)")
    p.add_argument("--source", type=int, required=True)
    p.add_argument("--dest", type=int, required=True)
    p.add_argument("--mode", choices=("ungraded", "graded", "oracle"), default="graded")
    p.add_argument("--kb", help="knowledge base file to update")
    p.add_argument("--grades-out", help="write the per-node grade report (graded mode)")
    _swarm_flags(p)
    _threshold_flags(p)

    p = sub.add_parser("compare", help="paired graded/ungraded trials")
    p.add_argument("--regions", type=int, default=4)
    p.add_argument("--pnr", type=int, default=8)
    p.add_argument("--intra-prob", type=float, default=0.2)
    p.add_argument("--inter-edges", type=int, default=2)
    p.add_argument("--demand-density", type=float, default=0.15)
    p.add_argument("--trials", type=int, default=30)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="CSV output path (stdout table only when omitted)")
    _swarm_flags(p)
    _threshold_flags(p)

    p = sub.add_parser("report", help="node-count and iteration series from a compare CSV")
    p.add_argument("input")
    p.add_argument("--out", help="output CSV (stdout when omitted)")
    return parser


def cmd_generate(args) -> int:
    try:
        t = generate_topology(args.regions, args.pnr, args.intra_prob, args.inter_edges, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    save_topology(t, args.out)
    if args.traffic_out:
        gamma = traffic.synthetic_demands(
            t.num_nodes, np.random.default_rng([args.seed, 1]), args.demand_density
        )
        traffic.save_traffic(gamma, args.traffic_out)
    print(f"wrote {t.num_nodes} nodes, {len(t.links)} links to {args.out}")
    return EX_OK


def cmd_route(args) -> int:
    t = load_topology(args.topology)
    n = t.num_nodes
    gamma = traffic.load_traffic(args.traffic, n) if args.traffic else np.zeros((n, n))
    for node in (args.source, args.dest):
        if not t.has_node(node):
            raise UsageError(f"unknown node {node}")
    flows = traffic.compute_flows(t, gamma)
    for l in t.links:
        if flows[l.key] >= args.mu * l.capacity:
            print(f"warning: link {l.u}-{l.v} saturated (flow {flows[l.key]:.6g} >= "
                  f"capacity {args.mu * l.capacity:.6g}); endpoints graded congested",
                  file=sys.stderr)
    kb = None
    if args.kb:
        kb = KnowledgeBase.load(args.kb) if Path(args.kb).exists() else KnowledgeBase()
    res = experiment.route(
        t, gamma, args.source, args.dest, args.mode, _swarm_config(args, t.pnr),
        args.mu, args.delay_threshold, args.util_threshold, kb,
    )
    if args.grades_out and res.subgraph is not None:
        g = experiment.grade(t, gamma, args.mu, args.delay_threshold, args.util_threshold)
        with open(args.grades_out, "w", encoding="utf-8", newline="") as fh:
            grading.write_grade_report(fh, t, g.priorities, g.grades, res.subgraph)
    if kb is not None:
        kb.save(args.kb)

    print(f"mode: {res.mode}")
    print(f"nodes: {res.nodes_used}/{res.nodes_total}")
    if not res.found:
        print(f"no path from {args.source} to {args.dest}")
        return EX_NOPATH
    print(f"path: {'-'.join(map(str, res.path))}")
    print(f"fitness: {res.fitness:.6f}")
    print(f"iterations_to_converge: {res.iterations_to_converge}")
    return EX_OK


def cmd_compare(args) -> int:
    try:
        cfg = ExperimentConfig(
            regions=args.regions, pnr=args.pnr, intra_edge_prob=args.intra_prob,
            inter_edges_per_region_pair=args.inter_edges, demand_density=args.demand_density,
            mu=args.mu, swarm=_swarm_config(args, args.pnr),
            delay_threshold=args.delay_threshold, util_threshold=args.util_threshold,
            trials=args.trials, master_seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = experiment.compare(cfg, workers=args.workers)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            experiment.write_comparison_csv(fh, rows)
    s = experiment.summarize(rows)
    print(f"# delay_threshold={cfg.delay_threshold} util_threshold={cfg.util_threshold} "
          f"perturbation={cfg.swarm.perturbation} master_seed={cfg.master_seed}")
    print(f"{'trial':>5} {'PSO it':>7} {'PSO fit':>9} {'graded it':>9} {'graded fit':>10} {'nodes':>9}")
    for r in rows:
        print(f"{r.trial:>5} {r.ungraded_iterations:>7} {r.ungraded_fitness:>9.6f} "
              f"{r.graded_iterations:>9} {r.graded_fitness:>10.6f} "
              f"{r.nodes_graded:>4}/{r.nodes_total:<4}")
    print(f"median iteration reduction: {s.median_iteration_reduction:g}")
    print(f"fraction graded <= ungraded: {s.fraction_graded_not_slower:.3f}")
    print(f"mean nodes_graded/nodes_total: {s.mean_node_ratio:.3f}")
    return EX_OK


def cmd_report(args) -> int:
    with open(args.input, encoding="utf-8", newline="") as fh:
        rows = experiment.read_comparison_csv(fh)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            experiment.report(rows, fh)
    else:
        experiment.report(rows, sys.stdout)
    return EX_OK


COMMANDS = {
    "generate": cmd_generate,
    "route": cmd_route,
    "compare": cmd_compare,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"grade-route: {exc}", file=sys.stderr)
        return EX_USAGE
    except (TopologyError, experiment.CsvFormatError, ValueError, traffic.RoutingError) as exc:
        print(f"grade-route: {exc}", file=sys.stderr)
        return EX_DATAERR
    except OSError as exc:
        print(f"grade-route: {exc}", file=sys.stderr)
        return EX_IOERR


if __name__ == "__main__":
    sys.exit(main())
