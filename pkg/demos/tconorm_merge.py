"""
Fuzzy graphs and t-conorm merging
=================================

A metric space becomes a fuzzy graph with edge strengths ``exp(-d)``.
Several fuzzy graphs on the same vertices are fused edge by edge with a
t-conorm, and shortest paths over ``-log`` strengths turn the result back
into a metric.
"""

import numpy as np

from isumap._errors import InvalidParameterError
from isumap.fuzzy import BOUNDED_SUM, MAX, PROBSUM, TConorm, merge_fuzzy_graphs, realize_c1, sing1
from isumap.metric import FiniteMetricSpace

for t in (MAX, PROBSUM, BOUNDED_SUM):
    print(f"{t.name:8s} T(0.3, 0.7) = {float(t(0.3, 0.7)):.3f}   T(0.5, 1) = {float(t(0.5, 1.0)):.3f}")

# %%
# Two views of the same four points that disagree about distances.
a = FiniteMetricSpace(np.array([[0, 1, 2, 3], [1, 0, 1, 2], [2, 1, 0, 1], [3, 2, 1, 0]], dtype=float))
b = FiniteMetricSpace(np.array([[0, 2, np.inf, 1], [2, 0, 3, np.inf], [np.inf, 3, 0, 2], [1, np.inf, 2, 0]]),
                      mode="epmet")

for t in (MAX, PROBSUM):
    fused = realize_c1(merge_fuzzy_graphs([sing1(a), sing1(b)], t))
    print(t.name)
    print(np.round(fused.dist, 3))

# %%
# The merged strength does not depend on the order of the inputs, and a
# user-supplied operation is audited before it is accepted.
einstein = TConorm.custom("einstein", lambda x, y: (x + y) / (1 + x * y))
print("einstein T(0.5, 0.5) =", float(einstein(0.5, 0.5)))
try:
    TConorm.custom("average", lambda x, y: (x + y) / 2)
except InvalidParameterError as exc:
    print("rejected:", exc)
