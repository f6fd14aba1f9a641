"""
Grading nodes and shrinking the search space
============================================

Every node gets a priority from a short rule chain (alive? dense? congested?
resourced? delayed?), the priority maps onto a -3..+3 grade, and only
well-graded nodes plus each region's best three survive.
"""
import io

import numpy as np

from graderoute import generate_topology, level1_select
from graderoute.experiment import grade
from graderoute.grading import write_grade_report
from graderoute.traffic import synthetic_demands

t = generate_topology(4, 8, seed=3)
gamma = synthetic_demands(t.num_nodes, np.random.default_rng(3), gamma_range=(0.05, 0.3))
g = grade(t, gamma, mu=1.0)

counts = np.bincount(np.array(g.grades) + 3, minlength=7)
for value, n in zip(range(-3, 4), counts):
    print(f"grade {value:+d}: {'#' * n}")

###############################################################################
# Route from region 0 to region 3. The subgraph keeps the endpoints, grades
# 0..+2 and the top three per region; if that cuts the endpoints apart, just
# enough nodes from the wider -2..+3 band come back to reconnect them.
src, dst = 0, t.num_nodes - 1
sub = level1_select(t, g.grades, src, dst)
print(f"\nkept {len(sub.kept_nodes)} of {t.num_nodes} nodes, connected={sub.connected}")
print(f"links {len(sub.induced_links)} of {len(t.links)}")

buf = io.StringIO()
write_grade_report(buf, t, g.priorities, g.grades, sub)
print("\n".join(buf.getvalue().splitlines()[:10]))
