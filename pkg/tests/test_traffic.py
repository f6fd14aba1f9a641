import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graderoute.topology import Topology, generate_topology, link_key
from graderoute.traffic import (
    RoutingError,
    SaturationError,
    TrafficModel,
    compute_flows,
    derive_dynamics,
    loads_traffic,
    dumps_traffic,
    min_hop_path,
    total_delay,
)


def test_zero_traffic(triangle):
    flows = compute_flows(triangle, np.zeros((3, 3)))
    assert set(flows.values()) == {0.0}


def test_line_flow(line3):
    g = np.zeros((3, 3))
    g[0, 2] = 3
    flows = compute_flows(line3, g)
    assert flows[(0, 1)] == 3 and flows[(1, 2)] == 3


def test_triangle_prefers_direct(triangle):
    g = np.zeros((3, 3))
    g[0, 2] = 2
    assert compute_flows(triangle, g) == {(0, 1): 0.0, (0, 2): 2.0, (1, 2): 0.0}


def test_disconnected_demand():
    t = Topology.from_edges(3, [(0, 1, 1.0)])
    g = np.zeros((3, 3))
    g[0, 2] = 1
    with pytest.raises(RoutingError) as err:
        compute_flows(t, g)
    assert err.value.pair == (0, 2)


@pytest.mark.parametrize("seed", range(40))
def test_min_hop_matches_networkx_enumeration(seed):
    t = generate_topology(2, 4, 0.5, 2, seed=seed)
    g = nx.Graph([(l.u, l.v) for l in t.links])
    g.add_nodes_from(range(t.num_nodes))
    rng = np.random.default_rng(seed)
    j, k = rng.choice(t.num_nodes, 2, replace=False)
    expected = min(nx.all_shortest_paths(g, int(j), int(k)))
    assert min_hop_path(t, int(j), int(k)) == expected


@pytest.mark.parametrize("seed", range(20))
def test_flow_conservation(seed):
    t = generate_topology(3, 4, 0.4, 2, seed=seed)
    rng = np.random.default_rng(seed)
    gamma = np.where(rng.random((12, 12)) < 0.3, rng.uniform(0, 1, (12, 12)), 0.0)
    np.fill_diagonal(gamma, 0)
    flows = compute_flows(t, gamma)
    expected = sum(
        gamma[j, k] * (len(min_hop_path(t, j, k)) - 1) for j, k in zip(*np.nonzero(gamma))
    )
    assert sum(flows.values()) == pytest.approx(expected, rel=1e-12)


def test_total_delay_hand_cases():
    t1 = Topology.from_edges(2, [(0, 1, 1.0, 10.0)])
    assert total_delay({(0, 1): 5.0}, 1.0, t1) == pytest.approx(1.0, abs=1e-12)
    t2 = Topology.from_edges(3, [(0, 1, 1.0, 4.0), (1, 2, 1.0, 6.0)])
    assert total_delay({(0, 1): 2.0, (1, 2): 3.0}, 1.0, t2) == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(SaturationError) as err:
        total_delay({(0, 1): 10.0}, 1.0, t1)
    assert err.value.link == (0, 1)


def test_total_delay_subset():
    t = Topology.from_edges(3, [(0, 1, 1.0, 4.0), (1, 2, 1.0, 6.0)])
    flows = {(0, 1): 2.0, (1, 2): 3.0}
    assert total_delay(flows, 1.0, t, [(1, 0)]) == pytest.approx(1.0)


@settings(max_examples=200, deadline=None)
@given(
    lam=st.lists(st.floats(0, 9.0), min_size=1, max_size=5),
    idx=st.integers(0, 4),
    bump=st.floats(1e-3, 0.9),
)
def test_delay_monotone_and_zero(lam, idx, bump):
    n = len(lam) + 1
    t = Topology.from_edges(n, [(i, i + 1, 1.0, 10.0) for i in range(len(lam))])
    flows = {(i, i + 1): x for i, x in enumerate(lam)}
    base = total_delay(flows, 1.0, t)
    assert (base == 0) == all(x == 0 for x in lam)
    i = idx % len(lam)
    bumped = dict(flows)
    bumped[(i, i + 1)] = lam[i] + bump
    assert total_delay(bumped, 1.0, t) > base


def test_dynamics_zero_traffic():
    star = Topology.from_edges(5, [(0, i, 1.0) for i in range(1, 5)])
    model = TrafficModel.build(star, np.zeros((5, 5)))
    dyn = derive_dynamics(star, model)
    assert not any(d.delay_present or d.congestion_present for d in dyn)
    assert [d.density for d in dyn] == [4, 1, 1, 1, 1]


def test_dynamics_congestion_ratio():
    t = Topology.from_edges(2, [(0, 1, 1.0, 10.0)])
    g = np.zeros((2, 2))
    g[0, 1] = 9
    dyn = derive_dynamics(t, TrafficModel.build(t, g), delay_threshold=100, util_threshold=0.8)
    assert dyn[0].congestion_present and dyn[1].congestion_present
    # 9 / (10 - 9) = 9 is under the delay threshold of 100
    assert not dyn[0].delay_present


def test_dynamics_saturation_sets_flags():
    t = Topology.from_edges(2, [(0, 1, 1.0, 1.0)])
    g = np.zeros((2, 2))
    g[0, 1] = 2
    dyn = derive_dynamics(t, TrafficModel.build(t, g))
    assert dyn[0].delay_present and dyn[0].congestion_present


def test_traffic_file_round_trip():
    g = np.zeros((4, 4))
    g[0, 3] = 0.25
    g[2, 1] = 1 / 3
    assert np.array_equal(loads_traffic(dumps_traffic(g), 4), g)


def test_traffic_rejects_bad_matrix(line3):
    with pytest.raises(ValueError):
        compute_flows(line3, np.eye(3))
    with pytest.raises(ValueError):
        compute_flows(line3, np.zeros((2, 2)))
