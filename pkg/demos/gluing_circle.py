"""
Gluing metric spaces: an interval becomes a circle
==================================================

Identifying the two endpoints of a discretized interval and closing the
result under shortest paths yields the arc-length metric of a circle.
"""

import numpy as np

from isumap.metric import FiniteMetricSpace, GluingSpec, glue_metric_spaces

# 101 points on [0, 1]
p = np.linspace(0.0, 1.0, 101)
interval = FiniteMetricSpace(np.abs(p[:, None] - p[None, :]))

# glue point 0 of space 0 to point 100 of space 0
circle = glue_metric_spaces(GluingSpec([interval], [((0, 0), (0, 100))]))
print("points after gluing:", circle.dist.shape[0])

# The class holding 0.1 and the one holding 0.9 are now 0.2 apart,
# going the short way round through the glued endpoint.
cls = {q: i for i, members in enumerate(circle.labels) for _, q in members}
print("d(0.1, 0.9) =", circle.dist[cls[10], cls[90]])

pos = np.array([min(q for _, q in m) for m in circle.labels]) / 100
gap = np.abs(pos[:, None] - pos[None, :])
print("max deviation from arc length:", np.abs(circle.dist - np.minimum(gap, 1 - gap)).max())
