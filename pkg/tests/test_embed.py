import numpy as np
import pytest
from scipy.spatial.distance import pdist, squareform

from isumap._errors import InfiniteDistanceWarning, InvalidInputError, InvalidParameterError
from isumap.embed import (
    Embedding,
    Provenance,
    classical_mds,
    metric_mds_sgd,
    raw_stress,
    repair_infinite,
    stress_gradient,
    top_eigenpairs,
)
from isumap.metric import FiniteMetricSpace
from oracles import central_difference, dense_cmds


def _dist(x):
    return squareform(pdist(x))


# --- classical MDS ---------------------------------------------------------------


def test_cmds_collinear():
    D = _dist(np.array([[0.0], [1.0], [3.0]]))
    y = classical_mds(D, 1).coords
    np.testing.assert_allclose(_dist(y), D, atol=1e-12)
    np.testing.assert_allclose(np.abs(y), np.abs(dense_cmds(D, 1)), atol=1e-12)


def test_cmds_2d_configuration(rng):
    x = rng.standard_normal((50, 2))
    D = _dist(x)
    emb = classical_mds(FiniteMetricSpace(D), 2)
    assert emb.provenance is Provenance.CMDS
    np.testing.assert_allclose(_dist(emb.coords), D, atol=1e-8)
    np.testing.assert_allclose(emb.coords, dense_cmds(D, 2), atol=1e-8)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_cmds_recovers_random_configurations(rng, m):
    for _ in range(5):
        n = int(rng.integers(m + 2, 101))
        x = rng.standard_normal((n, m)) * rng.uniform(0.1, 10.0)
        D = _dist(x)
        y = classical_mds(D, m).coords
        err = np.abs(_dist(y) - D)
        assert np.all(err <= 1e-6 * np.maximum(D, D.max() * 1e-3))
        np.testing.assert_allclose(y.mean(axis=0), 0.0, atol=1e-10)


def test_cmds_all_zero():
    y = classical_mds(np.zeros((5, 5)), 2).coords
    np.testing.assert_array_equal(y, 0.0)


def test_cmds_non_euclidean_clamps():
    # The graph metric of a 5-cycle has two negative Gram eigenvalues.
    i = np.arange(5)
    D = np.minimum(np.abs(i[:, None] - i), 5 - np.abs(i[:, None] - i)).astype(float)
    emb = classical_mds(D, 4)
    ref = np.sort(np.linalg.eigvalsh(-0.5 * (np.eye(5) - 0.2) @ D**2 @ (np.eye(5) - 0.2)))[::-1]
    assert emb.diagnostics["clamped_negative"] == pytest.approx(-ref[3], abs=1e-9)
    assert np.all(np.isfinite(emb.coords))
    np.testing.assert_allclose(_dist(emb.coords), _dist(dense_cmds(D, 4)), atol=1e-8)


def test_cmds_deterministic(rng):
    D = _dist(rng.random((40, 3)))
    a = classical_mds(D, 2).coords
    b = classical_mds(D, 2).coords
    np.testing.assert_array_equal(a, b)


def test_cmds_errors():
    with pytest.raises(InvalidParameterError):
        classical_mds(np.zeros((3, 3)), 3)
    D = _dist(np.arange(3.0)[:, None])
    D[0, 2] = D[2, 0] = np.inf
    with pytest.raises(InvalidInputError):
        classical_mds(D, 1)


def test_top_eigenpairs_vs_eigh(rng):
    A = rng.standard_normal((30, 30))
    B = A + A.T
    w, V = top_eigenpairs(B, 4)
    ref = np.sort(np.linalg.eigvalsh(B))[::-1][:4]
    np.testing.assert_allclose(w, ref, atol=1e-8)
    np.testing.assert_allclose(np.abs(V.T @ V), np.eye(4), atol=1e-10)


def test_repair_infinite():
    D = np.array([[0, 1, np.inf], [1, 0, 2], [np.inf, 2, 0]])
    with pytest.warns(InfiniteDistanceWarning):
        out, count = repair_infinite(D)
    assert count == 2
    assert out[0, 2] == 3.0
    clean, none = repair_infinite(np.zeros((2, 2)))
    assert none == 0


# --- metric MDS ---------------------------------------------------------------


def test_sgd_exact_init_unchanged(rng):
    x = rng.standard_normal((30, 2))
    out = metric_mds_sgd(_dist(x), x, epochs=20, seed=3)
    np.testing.assert_allclose(out.coords, x, atol=1e-9)
    assert out.provenance is Provenance.MMDS


def test_sgd_two_points():
    D = np.array([[0.0, 2.0], [2.0, 0.0]])
    out = metric_mds_sgd(D, np.array([[0.0], [1.0]]), epochs=100, learning_rate=0.5)
    assert abs(abs(out.coords[1, 0] - out.coords[0, 0]) - 2.0) < 1e-3


def test_sgd_history_non_increasing(rng):
    x = rng.standard_normal((60, 5))
    D = _dist(x)
    init = classical_mds(D, 2)
    out = metric_mds_sgd(D, init, epochs=30, batch_size=64, learning_rate=1.5, seed=1)
    h = np.array(out.diagnostics["stress_history"])
    assert np.all(np.diff(h) <= 0)
    assert raw_stress(D, out) <= raw_stress(D, init)
    assert h[0] == raw_stress(D, init) and h[-1] == raw_stress(D, out)
    assert out.diagnostics["stress"] == "raw"


def test_sgd_deterministic_per_seed(rng):
    D = _dist(rng.standard_normal((40, 4)))
    init = classical_mds(D, 2)
    a = metric_mds_sgd(D, init, epochs=10, seed=5).coords
    b = metric_mds_sgd(D, init, epochs=10, seed=5).coords
    np.testing.assert_array_equal(a, b)


def test_sgd_coincident_points():
    D = np.array([[0.0, 1.0], [1.0, 0.0]])
    out = metric_mds_sgd(D, np.zeros((2, 2)), epochs=60)
    assert np.all(np.isfinite(out.coords))
    assert np.linalg.norm(out.coords[0] - out.coords[1]) == pytest.approx(1.0, abs=1e-6)


def test_sgd_errors():
    with pytest.raises(InvalidInputError):
        metric_mds_sgd(np.zeros((3, 3)), np.zeros((2, 2)))
    with pytest.raises(InvalidParameterError):
        metric_mds_sgd(np.zeros((2, 2)), np.zeros((2, 2)), learning_rate=0)


def test_stress_gradient_finite_differences(rng):
    for _ in range(50):
        n = int(rng.integers(3, 15))
        D = _dist(rng.standard_normal((n, 3)))
        y = rng.standard_normal((n, 2))
        g = stress_gradient(D, y)
        fd = central_difference(lambda z: raw_stress(D, z), y, 1e-5)
        assert np.linalg.norm(g - fd) <= 1e-4 * np.linalg.norm(fd)


def test_embedding_rejects_non_finite():
    with pytest.raises(InvalidInputError):
        Embedding(np.array([[np.nan, 0.0]]), Provenance.CMDS)
