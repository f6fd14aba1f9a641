"""Graded PSO routing: node grading by quality, then swarm search for the best path."""
from .grading import GradedSubgraph, assign_priority, level1_select, priority_to_grade
from .kb import KnowledgeBase, RouteRecord
from .oracle import best_path_bruteforce, enumerate_simple_paths
from .pso import Path, SwarmConfig, decode_path, fitness, run
from .topology import Topology, generate_topology, load_topology, save_topology
from .traffic import TrafficModel, compute_flows, derive_dynamics, total_delay

__version__ = "0.1.0"
