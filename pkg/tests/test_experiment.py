import io

import numpy as np
import pytest

from graderoute.experiment import (
    ComparisonRow,
    CsvFormatError,
    ExperimentConfig,
    comparison_csv,
    compare,
    read_comparison_csv,
    report,
    route,
    summarize,
    trial_seed,
)
from graderoute.kb import KnowledgeBase
from graderoute.pso import SwarmConfig
from graderoute.topology import Topology

SMALL = ExperimentConfig(regions=2, pnr=4, trials=3, swarm=SwarmConfig(iterations=15))


def test_trial_seeds_independent():
    seeds = {trial_seed(0, t, tag) for t in range(5) for tag in ("ungraded", "graded", "topology")}
    assert len(seeds) == 15
    assert trial_seed(7, 2, "graded") == trial_seed(7, 2, "graded")
    assert all(0 <= s < 2**63 for s in seeds)


def test_compare_deterministic():
    a = comparison_csv(compare(SMALL))
    assert a == comparison_csv(compare(SMALL))
    assert a.splitlines()[0] == (
        "trial,ungraded_iterations,ungraded_fitness,graded_iterations,graded_fitness,nodes_total,nodes_graded"
    )


def test_compare_parallel_matches_serial():
    assert compare(SMALL, workers=2) == compare(SMALL)


def test_paired_streams_isolated():
    from dataclasses import replace

    longer = replace(SMALL, swarm=replace(SMALL.swarm, iterations=30))
    # different budgets give different runs, but the trial's topology and endpoints stay put
    d1, d2 = [], []
    compare(SMALL, d1)
    compare(longer, d2)
    for a, b in zip(d1, d2):
        assert a.topology == b.topology and (a.source, a.dest) == (b.source, b.dest)


def test_one_path_topology_equal_fitness(monkeypatch):
    import graderoute.experiment as ex

    chain = Topology.from_edges(4, [(0, 1, 3.0), (1, 2, 1.0), (2, 3, 2.0)], pnr=2)
    monkeypatch.setattr(ex, "generate_topology", lambda *a, **k: chain)
    monkeypatch.setattr(ex, "_pick_endpoints", lambda t, rng: (0, 3))
    cfg = ExperimentConfig(regions=2, pnr=2, trials=2, swarm=SwarmConfig(perturbation=0.0, iterations=20))
    for r in compare(cfg):
        assert r.ungraded_fitness == r.graded_fitness == 0.5


def test_route_modes(triangle):
    gamma = np.zeros((3, 3))
    cfg = SwarmConfig(M=3, perturbation=0.0, iterations=20)
    o = route(triangle, gamma, 0, 2, "oracle", cfg)
    assert o.path == (0, 2) and o.fitness == 1.0
    kb = KnowledgeBase()
    g = route(triangle, gamma, 0, 2, "graded", cfg, kb=kb)
    u = route(triangle, gamma, 0, 2, "ungraded", cfg, kb=kb)
    # all grades are 0 with no traffic, so the filter is the identity
    assert g.nodes_used == u.nodes_used == 3
    assert g.path == u.path
    assert kb.query(0, 2, True) is not None and kb.query(0, 2, False) is not None
    with pytest.raises(ValueError):
        route(triangle, gamma, 0, 2, "fastest", cfg)


def test_summary():
    rows = [
        ComparisonRow(0, 12, 0.8, 10, 0.8, 32, 20),
        ComparisonRow(1, 12, 0.8, 9, 0.85, 32, 24),
        ComparisonRow(2, 5, 0.8, 7, 0.8, 32, 16),
    ]
    s = summarize(rows)
    assert s.median_iteration_reduction == 2
    assert s.fraction_graded_not_slower == pytest.approx(2 / 3)
    assert s.mean_node_ratio == pytest.approx(60 / 96)


def test_csv_round_trip_and_report():
    rows = compare(SMALL)
    back = read_comparison_csv(io.StringIO(comparison_csv(rows)))
    assert back == rows
    out = io.StringIO()
    report(back, out)
    lines = out.getvalue().splitlines()
    assert lines[0] == "trial,nodes_ungraded,nodes_graded,ungraded_iterations,graded_iterations,iteration_reduction"
    for line, r in zip(lines[1:], rows):
        cells = [int(c) for c in line.split(",")]
        assert cells[2] <= cells[1]
        assert cells[5] == r.ungraded_iterations - r.graded_iterations


def test_report_empty_and_single():
    out = io.StringIO()
    report(read_comparison_csv(io.StringIO("")), out)
    assert out.getvalue().count("\n") == 1
    one = [ComparisonRow(0, 12, 0.8, 10, 0.8, 32, 20)]
    out = io.StringIO()
    report(one, out)
    assert out.getvalue().splitlines()[1] == "0,32,20,12,10,2"


def test_malformed_csv_line_number():
    text = comparison_csv([ComparisonRow(0, 1, 0.5, 1, 0.5, 8, 6)]) + "1,2,x,4,5,6,7\n"
    with pytest.raises(CsvFormatError) as err:
        read_comparison_csv(io.StringIO(text))
    assert err.value.lineno == 3
