"""Independent brute-force oracles used to check the library.

Nothing here imports the code paths under test.
"""

import itertools

import numpy as np


def brute_knn(points, k):
    """Sort all pairwise Euclidean distances; ties by lower index."""
    x = np.asarray(points, dtype=float)
    n = x.shape[0]
    idx = np.empty((n, k), dtype=int)
    dist = np.empty((n, k))
    for i in range(n):
        d = np.sqrt(((x - x[i]) ** 2).sum(axis=1))
        cand = [(d[j], j) for j in range(n) if j != i]
        cand.sort()
        idx[i] = [j for _, j in cand[:k]]
        dist[i] = [v for v, _ in cand[:k]]
    return idx, dist


def floyd_warshall(table):
    d = np.array(table, dtype=float, copy=True)
    n = d.shape[0]
    for k in range(n):
        d = np.minimum(d, d[:, k, None] + d[None, k, :])
    return d


def isomap_distances(points, k):
    """kNN graph, min-symmetrized, closed by Floyd-Warshall."""
    idx, dist = brute_knn(points, k)
    n = len(points)
    w = np.full((n, n), np.inf)
    np.fill_diagonal(w, 0.0)
    for i in range(n):
        for j, d in zip(idx[i], dist[i]):
            w[i, j] = min(w[i, j], d)
            w[j, i] = min(w[j, i], d)
    return floyd_warshall(w)


def dense_cmds(D, m):
    """Classical MDS through a full dense eigendecomposition."""
    D = np.asarray(D, dtype=float)
    n = D.shape[0]
    J = np.eye(n) - np.ones((n, n)) / n
    B = -0.5 * J @ (D**2) @ J
    w, V = np.linalg.eigh((B + B.T) / 2)
    order = np.argsort(w)[::-1][:m]
    w, V = w[order], V[:, order]
    idx = np.argmax(np.abs(V), axis=0)
    V = V * np.sign(V[idx, np.arange(m)])
    return V * np.sqrt(np.maximum(w, 0.0))


def central_difference(f, x, h):
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in np.ndindex(x.shape):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def extreme_points(points):
    """Indices of points that are strict vertices of the convex hull (O(n^3))."""
    p = np.unique(np.asarray(points, dtype=float), axis=0)
    n = len(p)
    keep = []
    for i in range(n):
        # i is extreme iff it is not in the triangle / segment of any others.
        inside = False
        for a, b, c in itertools.combinations([j for j in range(n) if j != i], 3):
            if _in_triangle(p[i], p[a], p[b], p[c]):
                inside = True
                break
        if not inside:
            for a, b in itertools.combinations([j for j in range(n) if j != i], 2):
                if _on_segment(p[i], p[a], p[b]):
                    inside = True
                    break
        if not inside:
            keep.append(tuple(p[i]))
    return set(keep)


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _in_triangle(p, a, b, c):
    if _cross(a, b, c) == 0:
        return False  # degenerate; covered by the segment test
    d1, d2, d3 = _cross(a, b, p), _cross(b, c, p), _cross(c, a, p)
    neg = d1 < 0 or d2 < 0 or d3 < 0
    pos = d1 > 0 or d2 > 0 or d3 > 0
    return not (neg and pos)


def _on_segment(p, a, b):
    if _cross(a, b, p) != 0:
        return False
    return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])


def polygon_overlap_area(h1, h2):
    from shapely.geometry import Polygon

    return Polygon(h1).buffer(0).intersection(Polygon(h2).buffer(0)).area


def dendrogram_labels(D, c, method):
    """Reference agglomerative clustering via scipy."""
    from scipy.cluster.hierarchy import fcluster, linkage
    from scipy.spatial.distance import squareform

    Z = linkage(squareform(np.asarray(D), checks=False), method=method)
    return fcluster(Z, c, criterion="maxclust")


def same_partition(a, b):
    a, b = np.asarray(a), np.asarray(b)
    pairs = {}
    for x, y in zip(a, b):
        if pairs.setdefault(x, y) != y:
            return False
    return len(set(pairs.values())) == len(pairs)


def random_metric(rng, n, scale=1.0, sparse=0.0):
    """Triangle-closed random metric: shortest paths over random weights.

    ``sparse`` is the fraction of direct links removed before closing, which
    produces metrics whose geodesics hop through several points.
    """
    w = rng.uniform(0.05, 2.0, (n, n)) * scale
    if sparse:
        w[rng.random((n, n)) < sparse] = np.inf
    w = np.minimum(w, w.T)
    np.fill_diagonal(w, 0.0)
    d = floyd_warshall(w)
    return np.minimum(d, d.T)
