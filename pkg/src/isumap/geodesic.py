"""T-combination of a local metric family into one geodesic metric space."""

from __future__ import annotations

import numpy as np

from ._errors import InvalidInputError
from .fuzzy import TConorm, _group_starts, get_tconorm
from .metric import FiniteMetricSpace, LocalMetricFamily, Mode
from .shortest_paths import INF, SparseWeightedGraph, all_pairs_shortest

__all__ = ["combined_edges", "combined_graph", "t_combine", "all_pairs_shortest", "SparseWeightedGraph"]


def combined_edges(family: LocalMetricFamily, t):
    """Fused edge lengths ``-log T1(a, b)`` over the sparse support.

    Only pairs with a finite distance in at least one local space are
    visited; spaces where a pair is at infinity contribute strength 0 and
    drop out of the fold since 0 is the t-conorm identity.

    Returns
    -------
    rows, cols, lengths : arrays with ``rows < cols``
    """
    t = get_tconorm(t)
    _, a, b, w = family.entries()
    if a.size == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty, np.empty(0)
    n = family.n
    key = a * n + b
    order = np.lexsort((w, key))
    key, w = key[order], w[order]
    starts = _group_starts(key)
    if t.reduce_lengths is not None:
        lengths = t.reduce_lengths(w, starts)
    else:
        lengths = _fold_generic(t, w, starts)
    uniq = key[starts]
    keep = np.isfinite(lengths)
    uniq, lengths = uniq[keep], np.maximum(lengths[keep], 0.0)
    return uniq // n, uniq % n, lengths


def _fold_generic(t: TConorm, w, starts):
    ends = np.r_[starts[1:], w.size]
    strength = np.exp(-w)
    out = np.empty(starts.size)
    for g, (s, e) in enumerate(zip(starts, ends)):
        acc = strength[e - 1]
        for v in strength[s:e - 1][::-1]:
            acc = t.apply(v, acc)
        out[g] = acc
    with np.errstate(divide="ignore"):
        return -np.log(np.clip(out, 0.0, 1.0))


def combined_graph(family: LocalMetricFamily, t) -> SparseWeightedGraph:
    r, c, w = combined_edges(family, t)
    return SparseWeightedGraph.from_edges(family.n, r, c, w, check_symmetric=False)


def t_combine(family: LocalMetricFamily, t, mode=Mode.UM, *, threads=None) -> FiniteMetricSpace:
    """Merge a family of local metric spaces into a single metric space.

    Edge strengths of all local spaces are fused with the t-conorm ``t``,
    turned back into lengths by ``-log`` and closed under shortest paths.
    In EPMet mode every pair without a fused edge stays at infinity.

    With ``t = MAX`` the fused length is the minimum of the local distances,
    so zero offsets and unit scales reproduce Isomap's geodesic distance.
    """
    if family.n == 0:
        raise InvalidInputError("empty local metric family")
    mode = Mode(mode)
    r, c, w = combined_edges(family, t)
    g = SparseWeightedGraph.from_edges(family.n, r, c, w, check_symmetric=False)
    dist = all_pairs_shortest(g, threads=threads)
    dist = np.minimum(dist, dist.T)
    if mode is Mode.EPMET:
        mask = np.ones(dist.shape, dtype=bool)
        mask[r, c] = False
        mask[c, r] = False
        dist[mask] = INF
    np.fill_diagonal(dist, 0.0)
    return FiniteMetricSpace(dist, mode)
