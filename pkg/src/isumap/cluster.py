"""Linkage clustering, medoids and convex-hull cluster separation.

After an embedding squeezes clusters of the geodesic space into each other,
``separate_clusters`` moves every cluster rigidly so that no point of one
cluster sits inside, or closer than a target margin to, the convex hull of
another.  Target margins grow monotonically with the distance between the
clusters' medoids in the original geodesic space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np

from ._errors import InvalidInputError, InvalidParameterError
from .embed import Embedding, Provenance

__all__ = [
    "Linkage",
    "linkage_clusters",
    "ClusterModel",
    "medoids",
    "convex_hull_2d",
    "point_hull_distance",
    "hull_distances",
    "SeparationConfig",
    "SeparationState",
    "transform_clusters",
    "separation_loss",
    "separate_clusters",
]


class Linkage(str, Enum):
    SINGLE = "single"
    AVERAGE = "average"
    COMPLETE = "complete"


def linkage_clusters(D, c: int, linkage=Linkage.AVERAGE) -> np.ndarray:
    """Agglomerative clustering cut at ``c`` clusters.

    Clusters are identified by their smallest member index.  At each step
    the closest pair of clusters is merged; exact ties go to the
    lexicographically smallest pair of identifiers.  Labels are numbered
    ``0..c-1`` in order of each cluster's smallest member.
    """
    d = np.array(getattr(D, "dist", D), dtype=np.float64, copy=True)
    n = d.shape[0]
    linkage = Linkage(linkage)
    if not (1 <= c <= n):
        raise InvalidParameterError(f"cluster count must satisfy 1 <= c <= n (c={c}, n={n})")
    size = np.ones(n)
    owner = np.arange(n)
    active = np.ones(n, dtype=bool)
    d[np.tril_indices(n)] = np.inf
    full = np.array(getattr(D, "dist", D), dtype=np.float64, copy=True)
    np.fill_diagonal(full, np.inf)
    for _ in range(n - c):
        flat = int(np.argmin(d))
        i, j = divmod(flat, n)
        if not np.isfinite(d[i, j]):
            # Only infinite links remain; fall back to the smallest active pair.
            act = np.flatnonzero(active)
            i, j = int(act[0]), int(act[1])
        a, b = full[i], full[j]
        if linkage is Linkage.SINGLE:
            new = np.minimum(a, b)
        elif linkage is Linkage.COMPLETE:
            new = np.maximum(a, b)
        else:
            with np.errstate(invalid="ignore"):
                new = (size[i] * a + size[j] * b) / (size[i] + size[j])
        size[i] += size[j]
        active[j] = False
        owner[owner == j] = i
        new[~active] = np.inf
        new[i] = np.inf
        full[i, :] = full[:, i] = new
        full[j, :] = full[:, j] = np.inf
        # d keeps only the upper triangle of active pairs.
        d[j, :] = d[:, j] = np.inf
        d[i, i + 1:] = new[i + 1:]
        d[:i, i] = new[:i]
    _, labels = np.unique(owner, return_inverse=True)
    return labels.astype(np.int64)


@dataclass(frozen=True)
class ClusterModel:
    """Cluster labels, medoids and medoid-to-medoid geodesic distances."""

    labels: np.ndarray
    medoids: np.ndarray
    D: np.ndarray

    @property
    def c(self) -> int:
        return self.medoids.size

    def members(self, j) -> np.ndarray:
        return np.flatnonzero(self.labels == j)


def medoids(D, labels) -> ClusterModel:
    """Medoid of every cluster, with ties going to the lowest point index."""
    d = np.asarray(getattr(D, "dist", D), dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64).ravel()
    if labels.shape[0] != d.shape[0]:
        raise InvalidInputError("labels must match the distance table")
    uniq = np.unique(labels)
    if uniq[0] < 0 or not np.array_equal(uniq, np.arange(uniq.size)):
        raise InvalidInputError("labels must be 0..c-1 with no empty cluster")
    med = np.empty(uniq.size, dtype=np.int64)
    for j in uniq:
        idx = np.flatnonzero(labels == j)
        med[j] = idx[int(np.argmin(d[np.ix_(idx, idx)].sum(axis=1)))]
    return ClusterModel(labels, med, d[np.ix_(med, med)].copy())


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull_2d(points) -> np.ndarray:
    """Counter-clockwise convex hull by Andrew's monotone chain.

    Collinear boundary points are dropped.  Degenerate inputs give a
    two-vertex segment or a single vertex.
    """
    p = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if p.shape[0] == 0:
        raise InvalidInputError("convex hull of an empty point set")
    pts = np.unique(p, axis=0)  # lexicographic (x, then y)
    if pts.shape[0] <= 2:
        return pts
    pts = [tuple(q) for q in pts]
    lower: List[tuple] = []
    for q in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], q) <= 0:
            lower.pop()
        lower.append(q)
    upper: List[tuple] = []
    for q in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], q) <= 0:
            upper.pop()
        upper.append(q)
    hull = lower[:-1] + upper[:-1]
    return np.array(hull, dtype=np.float64)


def hull_distances(points, hull):
    """Vectorized :func:`point_hull_distance`.

    Returns
    -------
    inside : (m,) bool
    dist : (m,) distance to the hull boundary
    closest : (m, 2) closest boundary point
    """
    p = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    v = np.asarray(hull, dtype=np.float64).reshape(-1, 2)
    h = v.shape[0]
    if h == 1:
        closest = np.broadcast_to(v[0], p.shape).copy()
        dist = np.linalg.norm(p - v[0], axis=1)
        return dist == 0, dist, closest
    a = v if h > 2 else v[:1]
    b = np.roll(v, -1, axis=0) if h > 2 else v[1:]
    ab = b - a  # (e, 2)
    ap = p[:, None, :] - a[None, :, :]  # (m, e, 2)
    denom = (ab**2).sum(axis=1)
    t = np.clip((ap * ab[None]).sum(axis=2) / denom[None], 0.0, 1.0)
    proj = a[None] + t[..., None] * ab[None]
    dd = np.linalg.norm(p[:, None, :] - proj, axis=2)
    e = np.argmin(dd, axis=1)
    rows = np.arange(p.shape[0])
    dist = dd[rows, e]
    closest = proj[rows, e]
    if h > 2:
        cross = ab[None, :, 0] * ap[..., 1] - ab[None, :, 1] * ap[..., 0]
        inside = np.all(cross >= 0, axis=1) | (dist == 0)
    else:
        inside = dist == 0
    return inside, dist, closest


def point_hull_distance(p, hull):
    """``(inside, d)``: whether ``p`` lies in the polygon and its boundary distance."""
    inside, dist, _ = hull_distances(np.asarray(p, dtype=np.float64)[None, :], hull)
    return bool(inside[0]), float(dist[0])


def _rot(phi):
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, -s], [s, c]])


@dataclass
class SeparationConfig:
    iterations: int = 200
    learning_rate: float = 0.05
    alpha: float = 1.0
    beta: float = 0.0
    sample_fraction: float = 1.0
    use_rotation: bool = False
    seed: int = 0
    hull_every: int = 1
    target_scale: Optional[float] = None
    target_tau: Optional[float] = None
    length_scale: Optional[float] = None
    literal_branches: bool = False


@dataclass
class SeparationState:
    """Per-cluster transform parameters and the optimization trace.

    ``theta[j] = (tx, ty, phi)``; cluster ``j`` is mapped by
    ``x -> R(phi) (x - centroid_j) + centroid_j + (tx, ty)``.
    """

    theta: np.ndarray
    alpha: float
    beta: float
    targets: np.ndarray
    length_scale: float
    centroids: np.ndarray
    hulls: list = field(default_factory=list)
    trace: list = field(default_factory=list)
    literal_branches: bool = False


def transform_clusters(coords, labels, theta, centroids):
    out = np.array(coords, dtype=np.float64, copy=True)
    for j in range(theta.shape[0]):
        idx = labels == j
        x = coords[idx] - centroids[j]
        if theta[j, 2] != 0.0:
            x = x @ _rot(theta[j, 2]).T
        out[idx] = x + centroids[j] + theta[j, :2]
    return out


def default_targets(model: ClusterModel, coords, scale=None, tau=None):
    """Target margins ``scale * tanh(D_ij / tau)``.

    Defaults: ``scale`` is the diameter of the embedding, ``tau`` the median
    off-diagonal medoid distance.
    """
    D = model.D
    if scale is None:
        lo, hi = coords.min(axis=0), coords.max(axis=0)
        scale = float(np.linalg.norm(hi - lo))
    if tau is None:
        off = D[~np.eye(D.shape[0], dtype=bool)]
        off = off[np.isfinite(off)]
        tau = float(np.median(off)) if off.size else 1.0
    tau = tau if tau > 0 else 1.0
    t = scale * np.tanh(D / tau)
    np.fill_diagonal(t, 0.0)
    return t


def separation_loss(state: SeparationState, model: ClusterModel, embedding, *, subset=None, hulls=None):
    """Loss and gradient of the hull-repulsion objective.

    For a point of cluster ``j`` at boundary distance ``d`` from the hull of
    cluster ``i`` the penalty is ``t_ij + d`` if the point is inside and
    ``max(0, t_ij - d)`` otherwise.  The loss is
    ``alpha * sum tanh(penalty / length_scale) + beta * |theta|^2``.

    ``subset`` optionally restricts the sum to the given point indices
    (stochastic estimate).  ``hulls`` supplies hulls of the transformed
    clusters; by default they are recomputed from the transformed points.

    Returns
    -------
    loss : float
    grad : (c, 3) array, derivatives with respect to ``theta``
    """
    coords = np.asarray(getattr(embedding, "coords", embedding), dtype=np.float64)
    if coords.shape[1] != 2:
        raise InvalidInputError("cluster separation works on 2-D embeddings")
    theta, labels, c = state.theta, model.labels, model.c
    y = transform_clusters(coords, labels, theta, state.centroids)
    if hulls is None:
        hulls = [convex_hull_2d(y[labels == j]) for j in range(c)]
    s = state.length_scale
    total = 0.0
    grad = np.zeros_like(theta)
    J = np.array([[0.0, -1.0], [1.0, 0.0]])
    for j in range(c):
        idx = np.flatnonzero(labels == j)
        if subset is not None:
            idx = np.intersect1d(idx, subset, assume_unique=False)
        if idx.size == 0:
            continue
        p = y[idx]
        for i in range(c):
            if i == j:
                continue
            inside, d, q = hull_distances(p, hulls[i])
            t = state.targets[i, j]
            if state.literal_branches:
                pen = np.where(inside, np.maximum(0.0, t - d), t + d)
                dpen = np.where(inside, np.where(d < t, -1.0, 0.0), 1.0)
            else:
                pen = np.where(inside, t + d, np.maximum(0.0, t - d))
                dpen = np.where(inside, 1.0, np.where(d < t, -1.0, 0.0))
            th = np.tanh(pen / s)
            total += float(th.sum())
            w = state.alpha * (1.0 - th**2) / s * dpen  # dL/dd per point
            diff = p - q
            norm = np.linalg.norm(diff, axis=1)
            nvec = np.divide(diff, norm[:, None], out=np.zeros_like(diff), where=norm[:, None] > 0)
            # d depends on p - (hull of i); p moves with theta_j, the hull with theta_i.
            g = w[:, None] * nvec
            grad[j, :2] += g.sum(axis=0)
            grad[i, :2] -= g.sum(axis=0)
            if theta.shape[1] > 2:
                lever_p = (p - state.centroids[j] - theta[j, :2]) @ J.T
                lever_q = (q - state.centroids[i] - theta[i, :2]) @ J.T
                grad[j, 2] += float((g * lever_p).sum())
                grad[i, 2] -= float((g * lever_q).sum())
    loss = state.alpha * total + state.beta * float((theta**2).sum())
    grad += 2.0 * state.beta * theta
    return loss, grad


def _record(state, model, coords, loss, iteration):
    y_med = transform_clusters(coords, model.labels, state.theta, state.centroids)[model.medoids]
    state.trace.append(
        {
            "iteration": int(iteration),
            "loss": float(loss),
            "theta": state.theta.tolist(),
            "medoids": y_med.tolist(),
        }
    )


def separate_clusters(embedding: Embedding, model: ClusterModel, config: Optional[SeparationConfig] = None, **overrides):
    """Pull overlapping cluster hulls apart by gradient descent on rigid motions.

    Each iteration estimates the gradient on a random ``sample_fraction`` of
    the points, takes a step whose largest component equals the current step
    size, and keeps it only if the full loss did not increase; otherwise the
    step size is halved.  The trace holds the initial state plus one record
    per iteration.

    Returns
    -------
    (Embedding, SeparationState)
    """
    cfg = config or SeparationConfig()
    for key, val in overrides.items():
        if not hasattr(cfg, key):
            raise InvalidParameterError(f"unknown separation option {key!r}")
        setattr(cfg, key, val)
    coords = np.asarray(getattr(embedding, "coords", embedding), dtype=np.float64)
    if coords.shape[1] != 2:
        raise InvalidInputError("cluster separation works on 2-D embeddings")
    labels = model.labels
    if labels.shape[0] != coords.shape[0]:
        raise InvalidInputError("cluster labels do not match the embedding")
    c = model.c
    if not (0.0 < cfg.sample_fraction <= 1.0):
        raise InvalidParameterError("sample_fraction must lie in (0, 1]")
    centroids = np.array([coords[labels == j].mean(axis=0) for j in range(c)])
    targets = default_targets(model, coords, cfg.target_scale, cfg.target_tau)
    span = float(np.linalg.norm(coords.max(axis=0) - coords.min(axis=0))) or 1.0
    length_scale = cfg.length_scale or (cfg.target_scale or span)
    state = SeparationState(
        theta=np.zeros((c, 3)),
        alpha=cfg.alpha,
        beta=cfg.beta,
        targets=targets,
        length_scale=length_scale,
        centroids=centroids,
        literal_branches=cfg.literal_branches,
    )
    if c == 1:
        state.hulls = [convex_hull_2d(coords)]
        return Embedding(coords.copy(), Provenance.SEPARATED), state

    radius = np.array(
        [max(np.sqrt(((coords[labels == j] - centroids[j]) ** 2).sum(axis=1).mean()), 1e-12) for j in range(c)]
    )
    rng = np.random.default_rng(cfg.seed)
    loss, _ = separation_loss(state, model, coords)
    _record(state, model, coords, loss, 0)
    step0 = cfg.learning_rate * span
    step = step0
    hulls = None
    for it in range(1, cfg.iterations + 1):
        if cfg.hull_every > 1 and (it - 1) % cfg.hull_every:
            base = hulls
        else:
            y = transform_clusters(coords, labels, state.theta, centroids)
            base = hulls = [convex_hull_2d(y[labels == j]) for j in range(c)]
        subset = None
        if cfg.sample_fraction < 1.0:
            subset = np.flatnonzero(rng.random(coords.shape[0]) < cfg.sample_fraction)
        _, g = separation_loss(state, model, coords, subset=subset, hulls=base)
        if not cfg.use_rotation:
            g[:, 2] = 0.0
        # Rotation is measured as arc length at the cluster radius.
        u = g.copy()
        u[:, 2] /= radius
        gmax = np.abs(u).max()
        if gmax > 0 and step > 0:
            delta = -step * u / gmax
            delta[:, 2] /= radius
            trial = SeparationState(**{**state.__dict__, "theta": state.theta + delta, "trace": state.trace})
            new_loss, _ = separation_loss(trial, model, coords)
            if new_loss <= loss:
                state.theta, loss = trial.theta, new_loss
                step = min(step * 1.2, step0)
            else:
                step /= 2.0
        _record(state, model, coords, loss, it)
    y = transform_clusters(coords, labels, state.theta, centroids)
    state.hulls = [convex_hull_2d(y[labels == j]) for j in range(c)]
    return Embedding(y, Provenance.SEPARATED, {"length_scale": length_scale}), state
