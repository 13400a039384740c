"""
The max t-conorm with unit scales is Isomap
===========================================

With no offset, unit scales and the max t-conorm, combining the local star
metrics of a k-nearest-neighbour graph gives exactly the Isomap geodesic
distance.  The script checks this on the swiss roll with a hole and embeds
it with classical MDS.
"""

from pathlib import Path

import numpy as np
from scipy.sparse.csgraph import shortest_path

from isumap.datasets import swiss_hole
from isumap.embed import classical_mds
from isumap.fuzzy import MAX
from isumap.geodesic import t_combine
from isumap.metric import knn_graph, local_metrics
from isumap.plots import scatter_svg

x, t = swiss_hole(1000, seed=0)
nb = knn_graph(x, 12)
D = t_combine(local_metrics(nb, "zero", "one"), MAX).dist

# %%
# Reference: the kNN graph, symmetrized with the minimum, closed by scipy.
W = np.full((len(x), len(x)), np.inf)
rows = np.repeat(np.arange(len(x)), 12)
W[rows, nb.indices.ravel()] = nb.distances.ravel()
W = np.minimum(W, W.T)
ref = shortest_path(np.where(np.isfinite(W), W, 0), directed=False)
print("max abs difference to the reference:", np.abs(D - ref).max())

emb = classical_mds(D, 2)
out = Path("demo_out")
out.mkdir(exist_ok=True)
scatter_svg(out / "swiss_hole_isomap.svg", emb.coords, t, title="Swiss roll with hole")
print("wrote", out / "swiss_hole_isomap.svg")
