"""
Graded and ungraded PSO side by side
====================================

Seeded paired trials: same topology, demands and endpoints, each method on
its own random stream. The footer statistics are the ones the comparison
is judged by.
"""
import io

from graderoute.experiment import ExperimentConfig, compare, comparison_csv, report, summarize

cfg = ExperimentConfig(regions=4, pnr=8, trials=10, master_seed=0)
rows = compare(cfg, workers=2)

print(" trial  ungraded  graded  nodes")
for r in rows:
    print(f"{r.trial:6d} {r.ungraded_iterations:9d} {r.graded_iterations:7d}  {r.nodes_graded}/{r.nodes_total}")

s = summarize(rows)
print(f"\nmedian reduction {s.median_iteration_reduction:g}, "
      f"graded not slower in {s.fraction_graded_not_slower:.0%}, "
      f"mean node ratio {s.mean_node_ratio:.2f}")

# With random cost change on, the "last improvement" iteration is mostly a
# record time of noise, so per-trial differences swing widely either way.
# Try swarm=SwarmConfig(perturbation=0.0) for the deterministic picture.

# Same config, same bytes.
assert comparison_csv(compare(cfg)) == comparison_csv(rows)

out = io.StringIO()
report(rows, out)
print(out.getvalue())
