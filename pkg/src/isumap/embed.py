"""Classical and metric multidimensional scaling."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.spatial.distance import pdist, squareform

from ._errors import InfiniteDistanceWarning, InvalidInputError, InvalidParameterError

__all__ = [
    "Provenance",
    "Embedding",
    "repair_infinite",
    "top_eigenpairs",
    "classical_mds",
    "raw_stress",
    "stress_gradient",
    "metric_mds_sgd",
]


class Provenance(str, Enum):
    CMDS = "cmds"
    MMDS = "mmds"
    SEPARATED = "separated"


@dataclass
class Embedding:
    """Coordinates of ``n`` points in ``R^m`` plus diagnostics."""

    coords: np.ndarray
    provenance: Provenance = Provenance.CMDS
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=np.float64)
        if c.ndim != 2:
            raise InvalidInputError("embedding coordinates must be an (n, m) table")
        if not np.all(np.isfinite(c)):
            raise InvalidInputError("embedding coordinates must be finite")
        self.coords = c
        self.provenance = Provenance(self.provenance)

    @property
    def n(self):
        return self.coords.shape[0]

    @property
    def m(self):
        return self.coords.shape[1]


def _table(D):
    return np.asarray(getattr(D, "dist", D), dtype=np.float64)


def repair_infinite(D, factor=1.5):
    """Replace infinite distances by ``factor`` times the largest finite one.

    Returns the repaired table and the number of replaced entries.  A
    disconnected neighbourhood graph cannot be embedded otherwise.
    """
    d = np.array(_table(D), copy=True)
    inf = ~np.isfinite(d)
    count = int(inf.sum())
    if count:
        finite = d[~inf]
        big = finite.max() if finite.size else 1.0
        d[inf] = factor * (big if big > 0 else 1.0)
        warnings.warn(
            f"replaced {count} infinite distances by {factor} x {big:g}",
            InfiniteDistanceWarning,
            stacklevel=2,
        )
    return d, count


def _power_estimate(B, v, iters):
    # Rayleigh quotient after a few power steps: rough dominant eigenvalue.
    for _ in range(iters):
        w = B @ v
        nrm = np.linalg.norm(w)
        if nrm == 0:
            return 0.0
        v = w / nrm
    return float(v @ (B @ v))


def spectral_shift(B, *, iters=60, seed=0):
    """Rough non-negative bound on ``-lambda_min(B)``.

    The dominant eigenvalue is estimated by power iteration; if it is
    positive, a second run on ``B - mu I`` finds the bottom of the spectrum.
    The estimate is inflated by 10 percent since power iteration
    underestimates magnitudes.
    """
    rng = np.random.default_rng(seed)
    n = B.shape[0]
    mu = _power_estimate(B, rng.standard_normal(n), iters)
    low = mu if mu < 0 else mu + _power_estimate(B - mu * np.eye(n), rng.standard_normal(n), iters)
    return 1.1 * max(0.0, -low)


def top_eigenpairs(B, m, *, tol=1e-10, max_iter=10_000, oversample=8, seed=0):
    """Largest algebraic eigenpairs of a symmetric matrix by subspace iteration.

    The matrix is shifted by :func:`spectral_shift` so that the wanted
    eigenvalues dominate in magnitude, which makes the power iteration
    converge to the algebraically (not absolutely) largest ones.  A block of
    ``m + oversample`` vectors is iterated with re-orthonormalization and a
    Rayleigh-Ritz step until every wanted residual satisfies
    ``|B v - lambda v| <= tol * |B|``, then refined by two more sweeps.

    Returns
    -------
    values : (m,) descending
    vectors : (n, m) orthonormal columns, sign fixed so that the entry of
        largest magnitude is positive.
    """
    B = np.asarray(B, dtype=np.float64)
    n = B.shape[0]
    p = min(n, m + oversample)
    if not np.any(B):
        return np.zeros(m), np.eye(n)[:, :m]
    shift = spectral_shift(B, seed=seed)
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, p)))
    values = vectors = None
    extra = 2
    for _ in range(max_iter):
        Z = B @ Q + shift * Q
        Q, _ = np.linalg.qr(Z)
        H = Q.T @ (B @ Q)
        H = (H + H.T) / 2
        w, U = np.linalg.eigh(H)
        order = np.argsort(w)[::-1]
        w, U = w[order], U[:, order]
        Q = Q @ U
        values, vectors = w[:m], Q[:, :m]
        resid = np.linalg.norm(B @ vectors - vectors * values, axis=0)
        if np.all(resid <= tol * max(np.abs(w).max(), shift)):
            extra -= 1
            if extra < 0:
                break
    else:
        warnings.warn("eigensolver reached the iteration cap", RuntimeWarning, stacklevel=2)
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(m)])
    signs[signs == 0] = 1.0
    return values, vectors * signs


def classical_mds(D, m=2, *, tol=1e-10, max_iter=10_000, seed=0) -> Embedding:
    """Torgerson embedding of a finite distance table into ``R^m``.

    The double-centred Gram matrix ``B = -J D^2 J / 2`` is diagonalized for
    its ``m`` largest eigenvalues; coordinates are the eigenvectors scaled by
    ``sqrt(max(lambda, 0))``.  Negative eigenvalues are clamped and their sum
    reported in ``diagnostics``.
    """
    d = _table(D)
    n = d.shape[0]
    if not (1 <= m < n):
        raise InvalidParameterError(f"target dimension must satisfy 1 <= m < n (m={m}, n={n})")
    if not np.all(np.isfinite(d)):
        raise InvalidInputError("classical MDS needs a finite distance table")
    sq = d**2
    B = -0.5 * (sq - sq.mean(axis=0)[None, :] - sq.mean(axis=1)[:, None] + sq.mean())
    B = (B + B.T) / 2
    values, vectors = top_eigenpairs(B, m, tol=tol, max_iter=max_iter, seed=seed)
    coords = vectors * np.sqrt(np.maximum(values, 0.0))
    coords -= coords.mean(axis=0)
    trace = float(np.trace(B))
    diag = {
        "eigenvalues": values.tolist(),
        "clamped_negative": float(-values[values < 0].sum()),
        "trace": trace,
    }
    return Embedding(coords, Provenance.CMDS, diag)


def _pairwise(y):
    diff = y[:, None, :] - y[None, :, :]
    return diff, np.sqrt((diff**2).sum(axis=2))


def raw_stress(D, Y) -> float:
    """``sum_{i<j} (D_ij - |y_i - y_j|)^2``."""
    d = _table(D)
    y = np.asarray(getattr(Y, "coords", Y), dtype=np.float64)
    return float(((squareform(d, checks=False) - pdist(y)) ** 2).sum())


def stress_gradient(D, Y, eps=1e-12):
    """Gradient of :func:`raw_stress` with respect to the coordinates."""
    d = _table(D)
    y = np.asarray(getattr(Y, "coords", Y), dtype=np.float64)
    diff, r = _pairwise(y)
    np.fill_diagonal(r, 1.0)
    coef = -2.0 * (d - r) / np.maximum(r, eps)
    np.fill_diagonal(coef, 0.0)
    return (coef[:, :, None] * diff).sum(axis=1)


def _pair_step(y, i, j, dij, lr, eps):
    # Each pair moves both endpoints by lr/4 of the pair gradient, which for
    # lr = 1 restores the target distance exactly.
    diff = y[i] - y[j]
    r = np.sqrt((diff**2).sum(axis=1))
    tiny = r < eps
    if np.any(tiny):
        # Coincident points have no gradient direction; push them apart
        # along the first axis.
        diff[tiny] = 0.0
        diff[tiny, 0] = 1.0
        r = np.where(tiny, 1.0, r)
        r_eff = np.where(tiny, 0.0, r)
    else:
        r_eff = r
    move = (lr / 2.0) * ((r_eff - dij) / r)[:, None] * diff
    delta = np.zeros_like(y)
    np.add.at(delta, i, -move)
    np.add.at(delta, j, move)
    y += delta


def metric_mds_sgd(
    D,
    init,
    epochs=50,
    batch_size=256,
    learning_rate=0.5,
    seed=0,
    *,
    eps=1e-12,
    min_learning_rate=1e-12,
) -> Embedding:
    """Minimize raw stress by mini-batch stochastic gradient descent.

    Every epoch visits all pairs once in a seeded random order, in batches
    of ``batch_size``.  The full stress is evaluated at the end of the
    epoch; if it went up, the epoch is undone and the step halved.  The
    recorded stress history is therefore non-increasing.
    """
    d = _table(D)
    y0 = np.asarray(getattr(init, "coords", init), dtype=np.float64)
    n = d.shape[0]
    if y0.shape[0] != n:
        raise InvalidInputError("initial embedding does not match the distance table")
    if not np.all(np.isfinite(d)):
        raise InvalidInputError("metric MDS needs a finite distance table")
    if epochs < 0 or batch_size < 1 or learning_rate <= 0:
        raise InvalidParameterError("epochs >= 0, batch_size >= 1 and learning_rate > 0 required")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, 1)
    y = y0.copy()
    current = raw_stress(d, y)
    history = [current]
    lr = float(learning_rate)
    rejected = 0
    for _ in range(epochs):
        if current == 0.0 or lr < min_learning_rate:
            history.append(current)
            continue
        trial = y.copy()
        order = rng.permutation(iu.size)
        for s in range(0, order.size, batch_size):
            sel = order[s:s + batch_size]
            i, j = iu[sel], ju[sel]
            _pair_step(trial, i, j, d[i, j], lr, eps)
        value = raw_stress(d, trial)
        if value <= current and np.all(np.isfinite(trial)):
            y, current = trial, value
        else:
            lr /= 2.0
            rejected += 1
        history.append(current)
    diag = {"stress_history": history, "stress": "raw", "final_learning_rate": lr, "rejected_epochs": rejected}
    return Embedding(y, Provenance.MMDS, diag)
