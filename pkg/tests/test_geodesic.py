import math

import numpy as np
import pytest
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from isumap._errors import InvalidInputError
from isumap.fuzzy import BOUNDED_SUM, MAX, PROBSUM, TConorm, merge_fuzzy_graphs, realize_c1, sing1
from isumap.geodesic import combined_edges, t_combine
from isumap.metric import LocalMetricFamily, Mode, knn_graph, local_metrics, triangle_violations
from isumap.shortest_paths import SparseWeightedGraph, all_pairs_shortest, worker_count
from oracles import floyd_warshall, isomap_distances

BUILTINS = [MAX, PROBSUM, BOUNDED_SUM]


def _random_graph(rng, n, k):
    x = rng.random((n, 2))
    nb = knn_graph(x, k)
    rows = np.repeat(np.arange(n), k)
    return SparseWeightedGraph.from_edges(n, rows, nb.indices.ravel(), nb.distances.ravel())


# --- all_pairs_shortest ------------------------------------------------------------


def test_path_graph():
    g = SparseWeightedGraph.from_edges(3, [0, 1], [1, 2], [1.0, 1.0])
    d = all_pairs_shortest(g)
    assert d[0, 2] == 2.0
    np.testing.assert_array_equal(np.diag(d), 0.0)


def test_disconnected_pair():
    g = SparseWeightedGraph.from_edges(2, [], [], [])
    assert all_pairs_shortest(g)[0, 1] == math.inf


def test_matches_floyd_warshall_200(rng):
    g = _random_graph(rng, 200, 8)
    np.testing.assert_allclose(all_pairs_shortest(g), floyd_warshall(g.to_dense()), rtol=0, atol=1e-12)


def test_matches_scipy_dijkstra(rng):
    g = _random_graph(rng, 300, 5)
    m = csr_matrix((g.lengths, g.indices, g.indptr), shape=(g.n, g.n))
    np.testing.assert_array_equal(all_pairs_shortest(g), dijkstra(m, directed=True))


def test_zero_length_edges():
    g = SparseWeightedGraph.from_edges(4, [0, 1, 2], [1, 2, 3], [0.0, 1.0, 0.0])
    d = all_pairs_shortest(g)
    assert d[0, 3] == 1.0 and d[0, 1] == 0.0


def test_source_subset_and_threads(rng):
    g = _random_graph(rng, 150, 4)
    full = all_pairs_shortest(g, threads=1)
    np.testing.assert_array_equal(all_pairs_shortest(g, [5, 0, 149], threads=2), full[[5, 0, 149]])
    for t in (2, 3, 4, 7):
        np.testing.assert_array_equal(all_pairs_shortest(g, threads=t), full)
    with pytest.raises(InvalidInputError):
        all_pairs_shortest(g, [150])


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("ISUMAP_THREADS", "3")
    assert worker_count() == 3
    assert worker_count(5) == 5
    monkeypatch.delenv("ISUMAP_THREADS")
    assert worker_count() >= 1


def test_graph_structure_checks():
    g = SparseWeightedGraph.from_edges(3, [0, 0, 1, 2], [1, 1, 1, 0], [2.0, 1.5, 3.0, 0.5])
    assert g.n_edges == 2  # duplicate kept at its minimum, self-loop dropped
    assert g.to_dense()[0, 1] == 1.5
    with pytest.raises(InvalidInputError):
        SparseWeightedGraph.from_edges(2, [0], [1], [-1.0])
    with pytest.raises(InvalidInputError):
        SparseWeightedGraph.from_edges(2, [0], [2], [1.0])
    bad = SparseWeightedGraph(2, np.array([0, 1, 1]), np.array([1]), np.array([1.0]))
    with pytest.raises(InvalidInputError):
        bad.validate()


# --- t_combine ------------------------------------------------------------------


def _family(rng, n=40, k=5, rho="nn", sigma="smooth", fill="none"):
    x = rng.standard_normal((n, 3))
    return local_metrics(knn_graph(x, k), rho, sigma, fill, points=x)


def test_isomap_collinear_example():
    x = np.arange(5.0)[:, None]
    fam = local_metrics(knn_graph(x, 2), "zero", "one")
    d = t_combine(fam, MAX).dist
    assert d[0, 4] == pytest.approx(4.0, abs=1e-12)
    np.testing.assert_allclose(d, isomap_distances(x, 2), atol=1e-12)


def test_max_edge_is_min_of_local_distances(rng):
    fam = _family(rng, sigma="knn")
    r, c, w = combined_edges(fam, MAX)
    direct = np.full((fam.n, fam.n), math.inf)
    for i in range(fam.n):
        for j, d in zip(fam.neighbors[i], fam.center[i]):
            a, b = min(i, j), max(i, j)
            direct[a, b] = min(direct[a, b], d)
    np.testing.assert_array_equal(w, direct[r, c])
    assert np.isfinite(direct).sum() == r.size


def test_single_contributing_space():
    # Only star 0 holds edges; the result is the closure of that star alone.
    nb = knn_graph(np.array([[0.0], [1.0], [3.0], [7.0]]), 3)
    fam = local_metrics(nb, "zero", "one", "sum")
    keep = LocalMetricFamily(fam.neighbors, np.where(np.arange(4)[:, None] == 0, fam.center, np.inf),
                             fam.rho, fam.sigma, fam.fill,
                             np.where(np.arange(4)[:, None, None] == 0, fam.between, np.inf))
    star = np.full((4, 4), np.inf)
    t = fam.star_table(0)
    nodes = np.r_[0, fam.neighbors[0]]
    star[np.ix_(nodes, nodes)] = t
    for tc in BUILTINS:
        np.testing.assert_allclose(t_combine(keep, tc).dist, floyd_warshall(star), atol=1e-12)


def test_empty_family():
    fam = LocalMetricFamily(np.zeros((0, 1), dtype=int), np.zeros((0, 1)), np.zeros(0), np.zeros(0))
    with pytest.raises(InvalidInputError):
        t_combine(fam, MAX)


@pytest.mark.parametrize("t", BUILTINS, ids=lambda t: t.name)
@pytest.mark.parametrize("mode", [Mode.UM, Mode.EPMET])
@pytest.mark.parametrize("fill", ["none", "sum"])
def test_factorization_through_fuzzy_graphs(rng, t, mode, fill):
    for _ in range(3):
        fam = _family(rng, n=int(rng.integers(10, 41)), k=4, fill=fill)
        direct = t_combine(fam, t, mode).dist
        merged = merge_fuzzy_graphs([sing1(s) for s in fam.to_spaces()], t)
        via = realize_c1(merged, mode).dist
        np.testing.assert_allclose(direct, via, atol=1e-12, rtol=0)


def test_factorization_n100(rng):
    fam = _family(rng, n=100, k=6, rho="zero", sigma="knn")
    via = realize_c1(merge_fuzzy_graphs([sing1(s) for s in fam.to_spaces()], PROBSUM)).dist
    np.testing.assert_allclose(t_combine(fam, PROBSUM).dist, via, atol=1e-12, rtol=0)


def test_generic_fold_matches_log_domain_fold(rng):
    fam = _family(rng, fill="sum-sqrt2")
    plain = TConorm("probsum-plain", PROBSUM.apply)
    np.testing.assert_allclose(t_combine(fam, plain).dist, t_combine(fam, PROBSUM).dist, atol=1e-12, rtol=0)


@pytest.mark.parametrize("t", BUILTINS, ids=lambda t: t.name)
def test_order_invariance(rng, t):
    fam = _family(rng, n=60, k=6, fill="sum")
    ref = t_combine(fam, t).dist
    perm = rng.permutation(fam.n)
    inv = np.argsort(perm)
    pf = LocalMetricFamily(inv[fam.neighbors[perm]], fam.center[perm], fam.rho[perm], fam.sigma[perm],
                           fam.fill, fam.between[perm])
    out = t_combine(pf, t).dist
    np.testing.assert_allclose(out, ref[np.ix_(perm, perm)], atol=1e-12, rtol=0)


@pytest.mark.parametrize("t", BUILTINS, ids=lambda t: t.name)
def test_um_output_is_metric(rng, t):
    fam = _family(rng, n=200, k=5)
    d = t_combine(fam, t).dist
    np.testing.assert_array_equal(d, d.T)
    np.testing.assert_array_equal(np.diag(d), 0.0)
    assert triangle_violations(d, Mode.UM, tol=1e-12) == 0


@pytest.mark.parametrize("t", BUILTINS, ids=lambda t: t.name)
def test_epmet_bound(rng, t):
    fam = _family(rng, n=80, k=6)
    r, c, w = combined_edges(fam, t)
    d = t_combine(fam, t, Mode.EPMET).dist
    assert np.all(d[r, c] <= w + 1e-15)
    mask = np.ones_like(d, dtype=bool)
    mask[r, c] = mask[c, r] = False
    np.fill_diagonal(mask, False)
    assert np.all(np.isinf(d[mask]))


def test_monotone_in_tconorm(rng):
    # bounded sum >= probabilistic sum >= max pointwise
    for _ in range(5):
        fam = _family(rng, n=60, k=7, fill="sum")
        dm = t_combine(fam, MAX).dist
        dp = t_combine(fam, PROBSUM).dist
        db = t_combine(fam, BOUNDED_SUM).dist
        assert np.all(dp <= dm + 1e-12)
        assert np.all(db <= dp + 1e-12)


def test_isomap_equivalence_random(rng):
    for _ in range(5):
        x = rng.random((int(rng.integers(20, 80)), 3))
        k = int(rng.integers(2, 8))
        d = t_combine(local_metrics(knn_graph(x, k), "zero", "one"), MAX).dist
        np.testing.assert_allclose(d, isomap_distances(x, k), atol=1e-12, rtol=0)


def test_far_apart_lengths_do_not_underflow():
    # Lengths beyond about 745 turn exp(-d) into 0; the log-domain fold keeps them.
    x = np.array([[0.0], [1000.0], [2000.0]])
    fam = local_metrics(knn_graph(x, 1), "zero", "one")
    # Edge 0-1 lies in both end stars, so the sums strengthen it by a factor 2.
    assert t_combine(fam, MAX).dist[0, 2] == 2000.0
    for t in (PROBSUM, BOUNDED_SUM):
        assert t_combine(fam, t).dist[0, 2] == pytest.approx(2000.0 - math.log(2.0), abs=1e-9)
