"""
Uniformizing a non-uniform sample
=================================

The hemisphere sample is denser near the pole.  Scaling every local metric
by the distance to its k-th neighbour makes all neighbourhoods the same
size, so the embedded k-th-neighbour radii spread less than with unit
scales.
"""

from isumap.datasets import hemisphere
from isumap.metric import knn_graph
from isumap.pipeline import PipelineConfig, embed_points

x, theta = hemisphere(1000, seed=0)

for sigma in ("one", "knn"):
    res = embed_points(x, PipelineConfig(generate="hemisphere", k=10, sigma=sigma))
    kth = knn_graph(res.embedding.coords, 10).distances[:, -1]
    print(f"sigma={sigma:4s} relative spread of k-th neighbour radius: {kth.var() / kth.mean() ** 2:.3f}")
