"""t-conorms and fuzzy 1-skeleta of metric spaces.

A metric space is turned into a fuzzy graph by ``sing1`` (edge strength
``exp(-d)``), several fuzzy graphs on one vertex set are fused edgewise with
a t-conorm by ``merge_fuzzy_graphs``, and ``realize_c1`` turns a fuzzy graph
back into a metric space through shortest paths over lengths ``-log``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ._errors import InvalidInputError, InvalidParameterError
from .metric import FiniteMetricSpace, Mode
from .shortest_paths import INF, SparseWeightedGraph, all_pairs_shortest

__all__ = [
    "TConorm",
    "MAX",
    "PROBSUM",
    "BOUNDED_SUM",
    "get_tconorm",
    "tconorm_apply",
    "audit_tconorm",
    "FuzzyGraph",
    "sing1",
    "merge_fuzzy_graphs",
    "realize_c1",
]


def _group_starts(key):
    starts = np.flatnonzero(np.r_[True, key[1:] != key[:-1]])
    return starts


def _max_lengths(lengths, starts):
    return np.minimum.reduceat(lengths, starts)


def _probsum_lengths(lengths, starts):
    # 1 - T1 = prod(1 - exp(-l)); accumulate log(1 - exp(-l)) to avoid
    # cancellation when strengths are small.
    with np.errstate(divide="ignore"):
        s = np.add.reduceat(np.log1p(-np.exp(-lengths)), starts)
        out = -np.log(-np.expm1(s))
    under = ~np.isfinite(out)
    if np.any(under):
        # All strengths underflow: T1 equals their sum to double precision.
        lse = -np.logaddexp.reduceat(-lengths, starts)
        out[under] = lse[under]
    return out


def _bounded_sum_lengths(lengths, starts):
    return np.maximum(-np.logaddexp.reduceat(-lengths, starts), 0.0)


@dataclass(frozen=True)
class TConorm:
    """A binary operation on ``[0, 1]`` obeying the t-conorm axioms.

    ``apply`` works elementwise on arrays.  ``reduce_lengths`` is an
    optional log-domain fold used by :func:`isumap.geodesic.t_combine`; it
    receives sorted per-pair lengths ``l = -log(strength)`` and group start
    offsets and returns ``-log`` of the folded strength per group.
    """

    name: str
    apply: Callable[[np.ndarray, np.ndarray], np.ndarray]
    reduce_lengths: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None

    def __call__(self, a, b):
        return self.apply(a, b)

    @classmethod
    def custom(cls, name, fn, *, n_triples=1000, tol=1e-9, seed=0):
        """Register a user-supplied t-conorm after a randomized axiom audit."""
        t = cls(name, fn)
        bad = audit_tconorm(t, n_triples=n_triples, tol=tol, seed=seed)
        if bad:
            raise InvalidParameterError(f"{name!r} is not a t-conorm: fails {', '.join(bad)}")
        return t


MAX = TConorm("max", np.maximum, _max_lengths)
def _probsum(a, b):
    # a + b - ab, but exactly 1 when either argument is 1
    return np.where(np.maximum(a, b) >= 1.0, 1.0, a + b - a * b)


PROBSUM = TConorm("probsum", _probsum, _probsum_lengths)
BOUNDED_SUM = TConorm("bsum", lambda a, b: np.minimum(1.0, a + b), _bounded_sum_lengths)

_BUILTIN = {
    "max": MAX,
    "probsum": PROBSUM,
    "bsum": BOUNDED_SUM,
    "bounded_sum": BOUNDED_SUM,
}


def get_tconorm(name) -> TConorm:
    if isinstance(name, TConorm):
        return name
    try:
        return _BUILTIN[str(name).lower()]
    except KeyError:
        raise InvalidParameterError(f"unknown t-conorm {name!r}") from None


def audit_tconorm(t: TConorm, n_triples=1000, tol=1e-9, seed=0):
    """Names of the axioms ``t`` violates on random triples (empty if none)."""
    rng = np.random.default_rng(seed)
    a, b, c = rng.random((3, n_triples))
    # Include the endpoints, where misbehaving operations usually break.
    a[:4], b[:4] = [0.0, 1.0, 0.0, 1.0], [0.0, 0.0, 1.0, 1.0]
    f = lambda x, y: np.asarray(t.apply(x, y), dtype=np.float64)  # noqa: E731
    failures = []
    ab = f(a, b)
    if np.any(ab < -tol) or np.any(ab > 1 + tol):
        failures.append("range")
    if np.any(np.abs(ab - f(b, a)) > tol):
        failures.append("commutativity")
    if np.any(np.abs(f(a, f(b, c)) - f(ab, c)) > tol):
        failures.append("associativity")
    if np.any(np.abs(f(a, np.zeros_like(a)) - a) > tol):
        failures.append("identity")
    lo, hi = np.minimum(a, c), np.maximum(a, c)
    if np.any(f(lo, b) > f(hi, b) + tol):
        failures.append("monotonicity")
    if np.any(np.abs(f(a, np.ones_like(a)) - 1.0) > tol):
        failures.append("annihilator")
    return failures


def tconorm_apply(t, a, b) -> float:
    """Evaluate a t-conorm on two strengths in ``[0, 1]``."""
    t = get_tconorm(t)
    a, b = float(a), float(b)
    if not (0.0 <= a <= 1.0 and 0.0 <= b <= 1.0):
        raise InvalidInputError(f"t-conorm arguments must lie in [0, 1], got ({a}, {b})")
    return float(min(1.0, max(0.0, t.apply(np.float64(a), np.float64(b)))))


@dataclass(frozen=True)
class FuzzyGraph:
    """Vertex strengths ``xi0`` and sparse symmetric edge strengths.

    Edges are stored once with ``rows < cols``; absent edges have strength 0
    and self-loops are implicitly 1.
    """

    n: int
    xi0: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    strengths: np.ndarray

    def __post_init__(self):
        xi0 = np.asarray(self.xi0, dtype=np.float64)
        r = np.asarray(self.rows, dtype=np.int64)
        c = np.asarray(self.cols, dtype=np.int64)
        s = np.asarray(self.strengths, dtype=np.float64)
        if xi0.shape != (self.n,) or np.any(xi0 < 0) or np.any(xi0 > 1):
            raise InvalidInputError("vertex strengths must be n values in [0, 1]")
        if not (r.shape == c.shape == s.shape):
            raise InvalidInputError("edge arrays must have equal length")
        if r.size:
            if r.min() < 0 or c.max() >= self.n or np.any(r >= c):
                raise InvalidInputError("edges must satisfy 0 <= i < j < n")
            key = r * self.n + c
            if np.unique(key).size != key.size:
                raise InvalidInputError("duplicate edge")
            if np.any(s <= 0) or np.any(s > 1) or np.any(np.isnan(s)):
                raise InvalidInputError("edge strengths must lie in (0, 1]")
            if np.any(s > np.minimum(xi0[r], xi0[c]) + 1e-15):
                raise InvalidInputError("edge strength exceeds an endpoint's strength")
        for name, arr in (("xi0", xi0), ("rows", r), ("cols", c), ("strengths", s)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_dense(cls, strengths, xi0=None):
        s = np.asarray(strengths, dtype=np.float64)
        n = s.shape[0]
        r, c = np.triu_indices(n, 1)
        w = s[r, c]
        keep = w > 0
        return cls(n, np.ones(n) if xi0 is None else xi0, r[keep], c[keep], w[keep])

    def to_dense(self):
        out = np.zeros((self.n, self.n))
        out[self.rows, self.cols] = self.strengths
        out[self.cols, self.rows] = self.strengths
        np.fill_diagonal(out, 1.0)
        return out

    def to_json(self) -> str:
        edges = [[int(i), int(j), float(w)] for i, j, w in zip(self.rows, self.cols, self.strengths)]
        return json.dumps({"n": self.n, "xi0": [float(v) for v in self.xi0], "edges": edges})

    @classmethod
    def from_json(cls, text):
        obj = json.loads(text)
        edges = obj.get("edges", [])
        r = np.array([e[0] for e in edges], dtype=np.int64)
        c = np.array([e[1] for e in edges], dtype=np.int64)
        w = np.array([e[2] for e in edges], dtype=np.float64)
        return cls(int(obj["n"]), np.asarray(obj["xi0"], dtype=np.float64), r, c, w)


def sing1(space: FiniteMetricSpace) -> FuzzyGraph:
    """Fuzzy 1-skeleton of a metric space: ``xi1(i, j) = exp(-d(i, j))``."""
    d = space.dist
    r, c = np.triu_indices(space.n, 1)
    w = np.exp(-d[r, c])
    keep = w > 0
    return FuzzyGraph(space.n, np.ones(space.n), r[keep], c[keep], w[keep])


def merge_fuzzy_graphs(graphs, t) -> FuzzyGraph:
    """Edgewise t-conorm fusion of fuzzy graphs on one vertex set.

    The fold is the right-nested ``T(xi_1, T(xi_2, ... T(xi_{N-1}, xi_N)))``
    over the union of edge supports.  Vertex strengths are folded the same
    way; they must agree across inputs.
    """
    graphs = list(graphs)
    if not graphs:
        raise InvalidInputError("nothing to merge")
    t = get_tconorm(t)
    n = graphs[0].n
    for g in graphs[1:]:
        if g.n != n:
            raise InvalidInputError("graphs must share the vertex set")
        if not np.array_equal(g.xi0, graphs[0].xi0):
            raise InvalidInputError("graphs must share vertex strengths")

    keys = np.unique(np.concatenate([g.rows * n + g.cols for g in graphs]))
    acc = None
    acc0 = None
    for g in reversed(graphs):
        x = np.zeros(keys.size)
        pos = np.searchsorted(keys, g.rows * n + g.cols)
        x[pos] = g.strengths
        if acc is None:
            acc, acc0 = x, g.xi0.astype(np.float64).copy()
        else:
            acc = np.clip(t.apply(x, acc), 0.0, 1.0)
            acc0 = np.clip(t.apply(g.xi0, acc0), 0.0, 1.0)
    keep = acc > 0
    keys = keys[keep]
    return FuzzyGraph(n, acc0, keys // n, keys % n, acc[keep])


def realize_c1(graph: FuzzyGraph, mode=Mode.UM, *, threads=None) -> FiniteMetricSpace:
    """Metric realization of a fuzzy graph.

    Edge lengths are ``-log(xi1)``; distances are shortest-path lengths.  In
    EPMet mode pairs without a direct edge are set to infinity.
    """
    mode = Mode(mode)
    with np.errstate(divide="ignore"):
        lengths = -np.log(graph.strengths)
    lengths = np.maximum(lengths, 0.0)
    g = SparseWeightedGraph.from_edges(graph.n, graph.rows, graph.cols, lengths, check_symmetric=False)
    dist = all_pairs_shortest(g, threads=threads)
    dist = np.minimum(dist, dist.T)
    if mode is Mode.EPMET:
        mask = np.ones((graph.n, graph.n), dtype=bool)
        mask[graph.rows, graph.cols] = False
        mask[graph.cols, graph.rows] = False
        dist[mask] = INF
    np.fill_diagonal(dist, 0.0)
    return FiniteMetricSpace(dist, mode)
