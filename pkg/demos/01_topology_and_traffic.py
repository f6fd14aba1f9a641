"""
Regions, links and queueing delay
=================================

Build a small region-structured network, push synthetic demands through it
along minimum-hop routes and look at the resulting per-link delay.
"""
import numpy as np

from graderoute import generate_topology, total_delay
from graderoute.topology import dumps_topology, loads_topology
from graderoute.traffic import TrafficModel, derive_dynamics, synthetic_demands

# three regions of five nodes; region r owns ids 5r .. 5r+4
t = generate_topology(3, 5, intra_edge_prob=0.3, inter_edges_per_region_pair=1, seed=11)
print(f"{t.num_nodes} nodes, {len(t.links)} links")
for link in t.links[:6]:
    print(f"  {link.u:2d}-{link.v:<2d} bandwidth {link.bandwidth:6.3f} capacity {link.capacity:6.3f}")

# The text format is exact: saving what we loaded gives the same bytes back.
text = dumps_topology(t)
assert dumps_topology(loads_topology(text)) == text

###############################################################################
# Demands and flows
# -----------------
# Each ordered pair gets a demand with probability 0.15. Flows accumulate on
# the min-hop route between the pair (lowest ids win ties).
rng = np.random.default_rng(11)
gamma = synthetic_demands(t.num_nodes, rng)
model = TrafficModel.build(t, gamma, mu=1.0)
busiest = sorted(model.flows.items(), key=lambda kv: -kv[1])[:3]
print("busiest links:", [(f"{u}-{v}", round(lam, 3)) for (u, v), lam in busiest])
print(f"network delay T = {total_delay(model.flows, model.mu, t):.4f}")

# The textbook case: one link, lam = 5, mu*C = 10 gives 5 / (10 - 5) = 1.
from graderoute.topology import Topology

one = Topology.from_edges(2, [(0, 1, 1.0, 10.0)])
print("single link delay:", total_delay({(0, 1): 5.0}, 1.0, one))

###############################################################################
# Node dynamics feed the grading step: delay flag, congestion flag, density.
dyn = derive_dynamics(t, model)
print("delayed nodes:", [i for i, d in enumerate(dyn) if d.delay_present])
print("congested nodes:", [i for i, d in enumerate(dyn) if d.congestion_present])
print("densities:", [d.density for d in dyn])
