"""
Swarm search against exhaustive enumeration
===========================================

Particles carry one real priority per node. Decoding walks from the source,
always stepping to the unvisited neighbour with the highest priority, so every
position maps to a loop-free path. On small graphs the brute-force oracle
tells us what the best achievable fitness is.
"""
import numpy as np

from graderoute import SwarmConfig, best_path_bruteforce, decode_path, fitness, generate_topology, run
from graderoute.topology import Topology

# Fitness is the first link's bandwidth over the path total: 8 / (8 + 2).
tri = Topology.from_edges(3, [(0, 1, 8.0), (1, 2, 2.0), (0, 2, 5.0)])
p = decode_path(np.array([0.0, 1.0, 0.5]), tri, 0, 2, M=3)
print(p.nodes, fitness(p, tri))

###############################################################################
# Ten small random instances, deterministic fitness (perturbation 0).
hits = 0
for seed in range(10):
    t = generate_topology(3, 4, 0.4, 1, seed=seed)
    src, dst = 0, t.num_nodes - 1
    best = best_path_bruteforce(t, src, dst)
    rec, trace = run(SwarmConfig(M=t.pnr, perturbation=0.0, seed=seed), t, src, dst)
    hits += rec.fitness == best.best_fitness
    print(f"seed {seed}: swarm {rec.fitness:.4f} at it {rec.iterations_to_converge:3d}  "
          f"oracle {best.best_fitness:.4f} over {best.paths_examined} paths")
print(f"{hits}/10 matched the oracle")

###############################################################################
# With random cost change switched on, gBest keeps creeping up on noise.
t = generate_topology(3, 4, 0.4, 1, seed=0)
_, noisy = run(SwarmConfig(M=4, perturbation=0.05, seed=0), t, 0, 11)
print("last improvement with noise:", noisy.iterations_to_converge)
print("gBest every 10 iterations:", np.round(noisy.fitness[::10], 4))
