"""Exit criteria for the package, one test per criterion.

Each test appends a PASS/FAIL line to the terminal summary before asserting,
so a full run shows the status of every criterion at once.
"""
import itertools
import statistics
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from graderoute.experiment import ExperimentConfig, comparison_csv, compare
from graderoute.grading import TOP_PER_REGION, assign_priority
from graderoute.kb import KnowledgeBase, RouteRecord
from graderoute.oracle import best_path_bruteforce
from graderoute.pso import Path, SwarmConfig, decode_path, fitness, run, window_ok
from graderoute.topology import NodeAttributes, Topology, generate_topology, load_topology, save_topology
from graderoute.traffic import NodeDynamics, SaturationError, total_delay


def verdict(name, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return ok


@pytest.fixture(scope="module")
def comparison():
    cfg = ExperimentConfig(regions=4, pnr=8, trials=30, master_seed=0)
    details = []
    start = time.perf_counter()
    rows = compare(cfg, details)
    return cfg, rows, details, time.perf_counter() - start


def oracle_instances(count=50):
    for s in range(count):
        rng = np.random.default_rng(s)
        regions = int(rng.integers(2, 4))
        pnr = int(rng.integers(2, 12 // regions + 1))
        t = generate_topology(regions, pnr, 0.4, 1, seed=s)
        src, dst = (int(v) for v in rng.choice(t.num_nodes, 2, replace=False))
        yield s, t, src, dst


def test_c1_oracle_equivalence():
    start = time.perf_counter()
    equal = greater = 0
    n = 0
    for s, t, src, dst in oracle_instances():
        assert t.num_nodes <= 12
        best = best_path_bruteforce(t, src, dst).best_fitness
        rec, _ = run(SwarmConfig(particle_count=30, iterations=100, M=t.pnr, perturbation=0.0, seed=s),
                     t, src, dst)
        equal += rec.fitness == best
        greater += rec.fitness > best
        n += 1
    elapsed = time.perf_counter() - start
    ok = equal / n >= 0.9 and greater == 0 and elapsed < 10
    verdict("C1 oracle equivalence", ok,
            f"{equal}/{n} equal, {greater} above oracle, {elapsed:.1f}s")
    assert equal / n >= 0.9
    assert greater == 0
    assert elapsed < 10


def test_c2_graded_convergence(comparison):
    _, rows, _, elapsed = comparison
    assert len(rows) >= 30
    frac = sum(r.graded_iterations <= r.ungraded_iterations for r in rows) / len(rows)
    med = statistics.median(r.ungraded_iterations - r.graded_iterations for r in rows)
    ok = frac >= 0.7 and med >= 1 and elapsed < 60
    verdict("C2 graded convergence", ok,
            f"fraction graded<=ungraded {frac:.3f} (need >= 0.7), median reduction {med:g} "
            f"(need >= 1), {elapsed:.1f}s")
    assert elapsed < 60
    assert med >= 1
    assert frac >= 0.7


def test_c3_node_reduction(comparison):
    _, rows, details, _ = comparison
    assert len(details) == len(rows)
    checked = violations = 0
    for d in details:
        t = d.topology
        top = set()
        for r in range(t.region_count):
            ranked = sorted(t.region_nodes(r),
                            key=lambda n: (abs(d.grades[n]), -t.nodes[n].attrs.bandwidth, n))
            top.update(ranked[:TOP_PER_REGION])
        qualifies = any(
            not 0 <= d.grades[n] <= 2 and n not in top and n not in (d.source, d.dest)
            for n in range(t.num_nodes)
        )
        if qualifies:
            checked += 1
            violations += not d.row.nodes_graded < d.row.nodes_total
    verdict("C3 node reduction", violations == 0,
            f"{checked}/{len(details)} trials qualify, {violations} without reduction")
    assert checked > 0
    assert violations == 0


def test_c4_delay():
    t1 = Topology.from_edges(2, [(0, 1, 1.0, 10.0)])
    t2 = Topology.from_edges(3, [(0, 1, 1.0, 4.0), (1, 2, 1.0, 6.0)])
    a = total_delay({(0, 1): 5.0}, 1.0, t1)
    b = total_delay({(0, 1): 2.0, (1, 2): 3.0}, 1.0, t2)
    try:
        total_delay({(0, 1): 10.0}, 1.0, t1)
        saturates = False
    except SaturationError:
        saturates = True
    ok = abs(a - 1.0) <= 1e-12 and abs(b - 2.0) <= 1e-12 and saturates
    verdict("C4 queueing delay", ok, f"{a!r}, {b!r}, saturation raised={saturates}")
    assert abs(a - 1.0) <= 1e-12
    assert abs(b - 2.0) <= 1e-12
    assert saturates


def test_c5_fitness():
    p2 = Path((0, 1, 2), True)
    f1 = fitness(p2, Topology.from_edges(3, [(0, 1, 8.0), (1, 2, 2.0)]))
    f2 = fitness(p2, Topology.from_edges(3, [(0, 1, 4.3), (1, 2, 1.2)]))
    f3 = fitness(Path((0, 1), True), Topology.from_edges(2, [(0, 1, 3.7)]))
    ok = abs(f1 - 0.8) <= 1e-9 and abs(f2 - 0.781818) <= 1e-6 and abs(f2 - 43 / 55) <= 1e-9 and f3 == 1.0
    verdict("C5 path fitness", ok, f"{f1!r}, {f2!r}, single link {f3!r}")
    assert abs(f1 - 0.8) <= 1e-9
    assert abs(f2 - 43 / 55) <= 1e-9
    assert round(f2, 6) == 0.781818
    assert f3 == 1.0


def test_c6_decode_fuzz():
    rng = np.random.default_rng(6)
    repeats = window_breaks = mutated = 0
    cases = 10_000
    for i in range(cases):
        regions, pnr = int(rng.integers(1, 5)), int(rng.integers(2, 7))
        t = generate_topology(regions, pnr, float(rng.uniform(0.1, 0.9)), int(rng.integers(0, 4)), seed=i)
        src, dst = (int(v) for v in rng.integers(0, t.num_nodes, 2))
        x = rng.uniform(-10, 10, t.num_nodes)
        before = x.copy()
        p = decode_path(x, t, src, dst, pnr)
        repeats += len(set(p.nodes)) != len(p.nodes)
        window_breaks += not all(window_ok(a, b, src, dst, pnr) for a, b in p.links())
        mutated += not np.array_equal(x, before)
    ok = repeats == window_breaks == mutated == 0
    verdict("C6 decode loop-freedom", ok,
            f"{cases} cases: {repeats} repeats, {window_breaks} window breaks, {mutated} mutated")
    assert repeats == 0 and window_breaks == 0 and mutated == 0


def _nested(nl, nd, tc, ra, delay):
    if nl:
        if nd < 5:
            if not tc:
                if ra:
                    return 1 if not delay else 2
                return 3
            return 4
        return 5
    return 6


def test_c7_priority_model():
    mismatches = 0
    combos = 0
    for nl, tc, ra, delay in itertools.product([False, True], repeat=4):
        for nd in range(11):
            combos += 1
            got = assign_priority(NodeAttributes(50.0 if nl else 0.0, ra, 1.0), NodeDynamics(delay, tc, nd))
            mismatches += got != _nested(nl, nd, tc, ra, delay)
    examples = [
        assign_priority(NodeAttributes(10.0, True, 1.0), NodeDynamics(False, False, 3)) == 1,
        assign_priority(NodeAttributes(0.0, True, 1.0), NodeDynamics(True, True, 9)) == 6,
        assign_priority(NodeAttributes(10.0, True, 1.0), NodeDynamics(False, False, 7)) == 5,
        assign_priority(NodeAttributes(10.0, True, 1.0), NodeDynamics(False, True, 2)) == 4,
    ]
    ok = mismatches == 0 and all(examples)
    verdict("C7 priority model", ok, f"{combos} combinations, {mismatches} mismatches, examples {examples}")
    assert mismatches == 0 and all(examples)


def test_c8_determinism_and_persistence(comparison, tmp_path):
    cfg, rows, _, _ = comparison
    csv_again = comparison_csv(compare(cfg))
    same_csv = comparison_csv(rows) == csv_again

    t = generate_topology(4, 8, seed=8)
    save_topology(t, tmp_path / "a.topo")
    save_topology(load_topology(tmp_path / "a.topo"), tmp_path / "b.topo")
    topo_ok = (tmp_path / "a.topo").read_bytes() == (tmp_path / "b.topo").read_bytes()

    kb = KnowledgeBase()
    kb.record(RouteRecord(0, 31, (0, 5, 12, 31), 0.781818, 14, True, 123))
    kb.record(RouteRecord(3, 20, (3, 9, 20), 2 / 3, 7, False, 2**40))
    kb.save(tmp_path / "a.kb")
    KnowledgeBase.load(tmp_path / "a.kb").save(tmp_path / "b.kb")
    kb_ok = (tmp_path / "a.kb").read_bytes() == (tmp_path / "b.kb").read_bytes()

    ok = same_csv and topo_ok and kb_ok
    verdict("C8 determinism and persistence", ok,
            f"compare CSV identical={same_csv}, topology={topo_ok}, kb={kb_ok}")
    assert same_csv and topo_ok and kb_ok
