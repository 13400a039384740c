"""Finite metric spaces, k-nearest-neighbour stars and metric gluing.

Distances live in ``[0, inf]``.  ``inf`` is IEEE infinity, which already
obeys ``inf + x = inf`` and ``min(inf, x) = x``, so no separate sentinel is
needed.  Two flavours are supported:

* ``Mode.UM`` (uber metric spaces): the triangle inequality always holds.
* ``Mode.EPMET`` (extended pseudo-metric spaces): the triangle inequality
  may fail only when the left-hand side is infinite.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from ._errors import DegenerateScaleWarning, InvalidInputError, InvalidParameterError
from .shortest_paths import INF, SparseWeightedGraph, all_pairs_shortest

__all__ = [
    "Mode",
    "RhoMode",
    "SigmaMode",
    "Fill",
    "FiniteMetricSpace",
    "NeighborLists",
    "LocalMetricFamily",
    "GluingSpec",
    "knn_graph",
    "local_metrics",
    "solve_sigma",
    "glue_metric_spaces",
    "triangle_violations",
]


class Mode(str, Enum):
    UM = "um"
    EPMET = "epmet"


class RhoMode(str, Enum):
    ZERO = "zero"
    NN = "nn"


class SigmaMode(str, Enum):
    ONE = "one"
    KNN = "knn"
    SMOOTH = "smooth"


class Fill(str, Enum):
    NONE = "none"
    SUM = "sum"
    SUM_SQRT2 = "sum-sqrt2"
    AMBIENT = "ambient"


def triangle_violations(dist, mode=Mode.UM, tol=1e-12):
    """Number of ordered triples ``(i, j, k)`` breaking the triangle inequality.

    In EPMet mode a triple only counts when ``dist[i, k]`` is finite.
    """
    dist = np.asarray(dist, dtype=np.float64)
    bad = 0
    for j in range(dist.shape[0]):
        via = dist[:, j, None] + dist[None, j, :]
        viol = dist > via + tol * np.maximum(1.0, np.where(np.isfinite(via), via, 0.0))
        if Mode(mode) is Mode.EPMET:
            viol &= np.isfinite(dist)
        bad += int(np.count_nonzero(viol))
    return bad


@dataclass(frozen=True)
class FiniteMetricSpace:
    """Points with a symmetric ``[0, inf]``-valued distance table.

    The table is validated (zero diagonal, symmetry, non-negativity) on
    construction and stored read-only.  The triangle inequality is *not*
    scanned here since that costs O(n^3); see :meth:`check_triangle`.
    """

    dist: np.ndarray
    mode: Mode = Mode.UM
    labels: Optional[Sequence] = None

    def __post_init__(self):
        d = np.array(self.dist, dtype=np.float64, copy=True)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise InvalidInputError(f"distance table must be square, got shape {d.shape}")
        if np.any(np.isnan(d)):
            raise InvalidInputError("distance table contains NaN")
        if np.any(d < 0):
            raise InvalidInputError("distances must be non-negative")
        if np.any(np.diag(d) != 0):
            raise InvalidInputError("distance table must have a zero diagonal")
        if not np.array_equal(d, d.T):
            raise InvalidInputError("distance table must be symmetric")
        if self.labels is not None and len(self.labels) != d.shape[0]:
            raise InvalidInputError("labels must match the number of points")
        d.setflags(write=False)
        object.__setattr__(self, "dist", d)
        object.__setattr__(self, "mode", Mode(self.mode))

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    def check_triangle(self, tol=1e-12) -> bool:
        return triangle_violations(self.dist, self.mode, tol) == 0

    def __len__(self):
        return self.n


@dataclass(frozen=True)
class NeighborLists:
    """Exact k-nearest neighbours, ordered by (distance, index)."""

    indices: np.ndarray  # (n, k) int
    distances: np.ndarray  # (n, k) float, rows non-decreasing

    @property
    def n(self) -> int:
        return self.indices.shape[0]

    @property
    def k(self) -> int:
        return self.indices.shape[1]


_MINKOWSKI_P = {"euclidean": 2.0, "manhattan": 1.0, "cityblock": 1.0, "chebyshev": np.inf}


def knn_graph(points, k: int, metric: str = "euclidean") -> NeighborLists:
    """Exact k nearest neighbours of every point, excluding the point itself.

    A kd-tree supplies candidates; lists are then ordered by distance with
    ties going to the lower index.  Rows whose k-th distance is tied with
    the last candidate are re-queried with a wider candidate set so the tie
    rule is honoured exactly.

    Parameters
    ----------
    points : (n, D) array
    k : int
        Number of neighbours, ``1 <= k < n``.
    metric : {"euclidean", "manhattan", "chebyshev"}
    """
    x = np.asarray(points, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise InvalidInputError("points must be a 2-D coordinate table")
    n = x.shape[0]
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("coordinates must be finite")
    if not isinstance(k, (int, np.integer)) or k < 1 or k >= n:
        raise InvalidParameterError(f"k must satisfy 1 <= k < n (k={k}, n={n})")
    try:
        p = _MINKOWSKI_P[metric]
    except KeyError:
        raise InvalidParameterError(f"unknown metric {metric!r}") from None

    tree = cKDTree(x)
    idx_out = np.empty((n, k), dtype=np.int64)
    dist_out = np.empty((n, k), dtype=np.float64)
    pending = np.arange(n)
    width = min(n, k + 2)
    while pending.size:
        dd, ii = tree.query(x[pending], k=width, p=p)
        dd = np.atleast_2d(dd)
        ii = np.atleast_2d(ii)
        redo = []
        for row, q in enumerate(pending):
            d_row, i_row = dd[row], ii[row]
            m = i_row != q
            d_row, i_row = d_row[m], i_row[m]
            order = np.lexsort((i_row, d_row))
            d_row, i_row = d_row[order], i_row[order]
            # The candidate set is complete unless the k-th distance ties the
            # largest returned distance and more points could share it.
            if width < n and d_row[k - 1] >= dd[row, -1]:
                redo.append(q)
                continue
            idx_out[q] = i_row[:k]
            dist_out[q] = d_row[:k]
        pending = np.asarray(redo, dtype=np.int64)
        width = min(n, 2 * width)
    return NeighborLists(idx_out, dist_out)


def solve_sigma(offset_distances, target=None, *, lo=1e-12, hi=1e12, tol=1e-6):
    """Scale ``sigma`` with ``sum_j exp(-d_j / sigma) = target``.

    The default target is ``log2(k)`` for ``k`` distances.  The left-hand
    side increases monotonically in ``sigma``, so the root is unique and is
    found by geometric bisection.  The bracket starts at the mean positive
    distance and is widened by factors of two up to ``[lo, hi]``.  If no sign
    change is found there, the nearer end is returned with a
    :class:`DegenerateScaleWarning`.
    """
    d = np.asarray(offset_distances, dtype=np.float64).ravel()
    k = d.size
    if k < 2:
        raise InvalidParameterError("solve_sigma needs at least two distances")
    if np.any(d < 0) or not np.all(np.isfinite(d)):
        raise InvalidInputError("offset distances must be finite and non-negative")
    if not np.any(d > 0):
        raise InvalidInputError("at least one offset distance must be positive")
    if target is None:
        target = math.log2(k)

    def resid(s):
        return float(np.exp(-d / s).sum()) - target

    a = b = float(d[d > 0].mean())
    while resid(a) > 0 and a > lo:
        a = max(a / 2.0, lo)
    while resid(b) < 0 and b < hi:
        b = min(b * 2.0, hi)
    ra, rb = resid(a), resid(b)
    if ra > 0 or rb < 0:
        end = a if ra > 0 else b
        warnings.warn(
            f"no root of the sigma equation in [{lo:g}, {hi:g}]; clamped to {end:g}",
            DegenerateScaleWarning,
            stacklevel=2,
        )
        return end
    if a == b:
        return a
    while b / a - 1.0 > 4e-16:
        mid = math.sqrt(a * b)
        if not (a < mid < b):
            break
        if resid(mid) < 0:
            a = mid
        else:
            b = mid
    s = a if abs(resid(a)) <= abs(resid(b)) else b
    if abs(resid(s)) >= tol:  # pragma: no cover - bisection converges to machine precision
        warnings.warn(f"sigma residual {resid(s):.3g} above {tol:g}", DegenerateScaleWarning, stacklevel=2)
    return s


@dataclass(frozen=True)
class LocalMetricFamily:
    """One star-shaped local metric space per data point.

    Space ``i`` has finite distances only between its centre ``i`` and its
    neighbours ``neighbors[i]`` (``center[i, j]``) and, when a fill is
    selected, between pairs of neighbours (``between[i, j, l]``).  All
    other distances in space ``i`` are infinite.
    """

    neighbors: np.ndarray  # (n, k) int
    center: np.ndarray  # (n, k) normalized centre-to-neighbour distances
    rho: np.ndarray  # (n,)
    sigma: np.ndarray  # (n,)
    fill: Fill = Fill.NONE
    between: Optional[np.ndarray] = None  # (n, k, k) or None

    @property
    def n(self) -> int:
        return self.neighbors.shape[0]

    @property
    def k(self) -> int:
        return self.neighbors.shape[1]

    def __len__(self):
        return self.n

    def star_table(self, i):
        """Dense ``(k+1, k+1)`` table of space ``i``; row 0 is the centre."""
        k = self.k
        t = np.zeros((k + 1, k + 1))
        t[0, 1:] = t[1:, 0] = self.center[i]
        if self.between is not None:
            t[1:, 1:] = self.between[i]
        else:
            t[1:, 1:] = INF
            np.fill_diagonal(t, 0.0)
        return t

    def entries(self):
        """All finite off-diagonal entries as ``(space, a, b, length)`` arrays with ``a < b``.

        Duplicate neighbour indices inside one star (impossible for kNN
        output but allowed for hand-built families) are kept; the caller
        folds them like any other repeated pair.
        """
        n, k = self.neighbors.shape
        space = np.repeat(np.arange(n), k)
        a = space.copy()
        b = self.neighbors.ravel()
        w = self.center.ravel()
        parts = [(space, a, b, w)]
        if self.between is not None:
            jj, ll = np.triu_indices(k, 1)
            sp = np.repeat(np.arange(n), jj.size)
            pa = self.neighbors[:, jj].ravel()
            pb = self.neighbors[:, ll].ravel()
            pw = self.between[:, jj, ll].ravel()
            parts.append((sp, pa, pb, pw))
        space, a, b, w = (np.concatenate(c) for c in zip(*parts))
        keep = (a != b) & np.isfinite(w)
        space, a, b, w = space[keep], a[keep], b[keep], w[keep]
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        return space, lo, hi, w

    def to_spaces(self):
        """Materialize every local space as a dense :class:`FiniteMetricSpace`.

        Quadratic memory per space; intended for small families and checks.
        """
        n = self.n
        out = []
        for i in range(n):
            d = np.full((n, n), INF)
            np.fill_diagonal(d, 0.0)
            nb = np.concatenate([[i], self.neighbors[i]])
            t = self.star_table(i)
            for r, a in enumerate(nb):
                for c, b in enumerate(nb):
                    if a != b:
                        d[a, b] = min(d[a, b], t[r, c])
            out.append(FiniteMetricSpace(d, Mode.EPMET if self.fill is Fill.NONE else Mode.UM))
        return out


def local_metrics(
    nb: NeighborLists,
    rho_mode=RhoMode.ZERO,
    sigma_mode=SigmaMode.KNN,
    fill=Fill.NONE,
    points=None,
) -> LocalMetricFamily:
    """Normalized local star metrics around every point.

    Centre-to-neighbour distances are ``(d(x_i, x_ij) - rho_i) / sigma_i``.
    With a fill, neighbour-to-neighbour distances ``f(d_j, d_l)`` are added:

    ``SUM``        ``d_j + d_l``
    ``SUM_SQRT2``  ``(d_j + d_l) / sqrt(2)``
    ``AMBIENT``    ``|u_j d_j - u_l d_l|`` with ``u`` the unit direction from
                   the centre to the neighbour in ambient coordinates.

    Every fill is floored at ``|d_j - d_l|``.  This is a no-op for ``SUM``
    and ``AMBIENT`` and makes ``SUM_SQRT2`` respect the triangle inequality
    through the centre when the two radii differ by a large factor.
    """
    rho_mode, sigma_mode, fill = RhoMode(rho_mode), SigmaMode(sigma_mode), Fill(fill)
    raw = nb.distances
    n, k = raw.shape
    if sigma_mode is SigmaMode.SMOOTH and k < 2:
        raise InvalidParameterError("smooth sigma requires k >= 2")
    if fill is Fill.AMBIENT and points is None:
        raise InvalidParameterError("ambient fill requires coordinates")

    rho = raw[:, 0].copy() if rho_mode is RhoMode.NN else np.zeros(n)
    offset = np.maximum(raw - rho[:, None], 0.0)

    if sigma_mode is SigmaMode.ONE:
        sigma = np.ones(n)
    elif sigma_mode is SigmaMode.KNN:
        sigma = raw[:, -1].copy()
        sigma = _repair_scales(sigma, raw)
    else:
        sigma = np.empty(n)
        for i in range(n):
            if np.any(offset[i] > 0):
                sigma[i] = solve_sigma(offset[i])
            else:
                sigma[i] = 0.0
        sigma = _repair_scales(sigma, raw)

    center = offset / sigma[:, None]
    between = None
    if fill is not Fill.NONE:
        dj = center[:, :, None]
        dl = center[:, None, :]
        if fill is Fill.SUM:
            between = dj + dl
        elif fill is Fill.SUM_SQRT2:
            between = (dj + dl) / math.sqrt(2.0)
        else:
            x = np.asarray(points, dtype=np.float64)
            if x.ndim == 1:
                x = x[:, None]
            if x.shape[0] != n:
                raise InvalidInputError("coordinates do not match the neighbour lists")
            diff = x[nb.indices] - x[:, None, :]  # (n, k, D)
            norm = np.linalg.norm(diff, axis=2, keepdims=True)
            unit = np.divide(diff, norm, out=np.zeros_like(diff), where=norm > 0)
            scaled = unit * center[:, :, None]
            between = np.linalg.norm(scaled[:, :, None, :] - scaled[:, None, :, :], axis=3)
        between = np.maximum(between, np.abs(dj - dl))
        idx = np.arange(k)
        between[:, idx, idx] = 0.0
    return LocalMetricFamily(nb.indices.copy(), center, rho, sigma, fill, between)


def _repair_scales(sigma, raw):
    # Duplicate points can make the scale vanish: fall back to the smallest
    # positive neighbour distance, else 1.
    bad = ~(sigma > 0) | ~np.isfinite(sigma)
    if np.any(bad):
        warnings.warn(
            f"{int(bad.sum())} point(s) have a degenerate local scale; using a fallback",
            DegenerateScaleWarning,
            stacklevel=3,
        )
        for i in np.flatnonzero(bad):
            pos = raw[i][raw[i] > 0]
            sigma[i] = pos.min() if pos.size else 1.0
    return sigma


@dataclass(frozen=True)
class GluingSpec:
    """Metric spaces to glue and the point pairs to identify.

    ``identify`` holds pairs ``((space_a, point_p), (space_b, point_q))``.
    The identification is closed transitively before gluing.
    """

    spaces: Sequence[FiniteMetricSpace]
    identify: Sequence = field(default_factory=tuple)


def glue_metric_spaces(spec: GluingSpec, *, threads=None) -> FiniteMetricSpace:
    """Colimit of metric spaces glued along identified points.

    The result lives on the disjoint union modulo the identification.  Each
    class inherits every finite distance of its representatives; the glued
    distance is the shortest chain through the quotient graph.  In EPMet mode
    a pair of classes stays at infinity unless some component holds a
    representative of each with finite distance between them.

    The returned space carries ``labels``: for every class the sorted list of
    ``(space, point)`` members.
    """
    spaces = list(spec.spaces)
    if not spaces:
        raise InvalidInputError("gluing needs at least one space")
    mode = spaces[0].mode
    if any(s.mode is not mode for s in spaces):
        raise InvalidInputError("all glued spaces must share the same mode")
    offsets = np.cumsum([0] + [s.n for s in spaces])
    total = int(offsets[-1])

    parent = list(range(total))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for pair in spec.identify:
        (sa, p), (sb, q) = pair
        for s, pt in ((sa, p), (sb, q)):
            if not (0 <= s < len(spaces)) or not (0 <= pt < spaces[s].n):
                raise InvalidInputError(f"identification {pair!r} out of range")
        ra, rb = find(int(offsets[sa] + p)), find(int(offsets[sb] + q))
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    roots = np.array([find(a) for a in range(total)])
    uniq, cls = np.unique(roots, return_inverse=True)
    m = uniq.size

    direct = np.full((m, m), INF)
    for s, sp in enumerate(spaces):
        c = cls[offsets[s]:offsets[s + 1]]
        r, q = np.nonzero(np.isfinite(sp.dist))
        ca, cb = c[r], c[q]
        np.minimum.at(direct, (ca, cb), sp.dist[r, q])
    np.fill_diagonal(direct, 0.0)

    graph = SparseWeightedGraph.from_dense(direct)
    dist = all_pairs_shortest(graph, threads=threads)
    dist = np.minimum(dist, dist.T)
    if mode is Mode.EPMET:
        dist[~np.isfinite(direct)] = INF
    np.fill_diagonal(dist, 0.0)

    members = [[] for _ in range(m)]
    for s in range(len(spaces)):
        for p in range(spaces[s].n):
            members[cls[offsets[s] + p]].append((s, p))
    return FiniteMetricSpace(dist, mode, labels=members)
