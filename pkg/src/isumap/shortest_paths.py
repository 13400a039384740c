"""Parallel all-pairs Dijkstra on sparse symmetric graphs.

The graph is held in compressed sparse row form.  Every source is an
independent Dijkstra run that writes a single row of the output table, so
rows can be distributed over worker threads without any coordination.  The
inner loop is compiled with numba in ``nogil`` mode so plain Python threads
run it truly concurrently.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np

from ._errors import InvalidInputError

INF = math.inf

__all__ = [
    "INF",
    "SparseWeightedGraph",
    "all_pairs_shortest",
    "worker_count",
]


@dataclass(frozen=True)
class SparseWeightedGraph:
    """Symmetric weighted graph in CSR layout.

    Lengths must be finite and non-negative.  Zero lengths are admitted
    because subtracting the nearest-neighbour offset legitimately produces
    them; Dijkstra stays exact for non-negative weights.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    lengths: np.ndarray

    @classmethod
    def from_edges(cls, n, rows, cols, lengths, *, check_symmetric=True):
        """Build a graph from an undirected edge list.

        Each ``(rows[e], cols[e])`` pair is inserted in both directions.  When
        an edge appears several times the shortest length wins.  Self-loops
        are dropped.
        """
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        lengths = np.asarray(lengths, dtype=np.float64).ravel()
        if not (rows.shape == cols.shape == lengths.shape):
            raise InvalidInputError("rows, cols and lengths must have equal length")
        if rows.size and (rows.min() < 0 or cols.min() < 0 or rows.max() >= n or cols.max() >= n):
            raise InvalidInputError("edge endpoint out of range")
        if np.any(np.isnan(lengths)) or np.any(lengths < 0):
            raise InvalidInputError("edge lengths must be non-negative")
        keep = (rows != cols) & np.isfinite(lengths)
        rows, cols, lengths = rows[keep], cols[keep], lengths[keep]

        src = np.concatenate([rows, cols])
        dst = np.concatenate([cols, rows])
        w = np.concatenate([lengths, lengths])
        # Deduplicate (src, dst) keeping the minimum length.
        order = np.lexsort((w, dst, src))
        src, dst, w = src[order], dst[order], w[order]
        if src.size:
            first = np.ones(src.size, dtype=bool)
            first[1:] = (src[1:] != src[:-1]) | (dst[1:] != dst[:-1])
            src, dst, w = src[first], dst[first], w[first]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        graph = cls(n, indptr, dst.astype(np.int64), w.astype(np.float64))
        if check_symmetric:
            graph.validate()
        return graph

    @classmethod
    def from_dense(cls, table):
        """Graph whose edges are the finite off-diagonal entries of ``table``."""
        table = np.asarray(table, dtype=np.float64)
        n = table.shape[0]
        r, c = np.nonzero(np.isfinite(table) & ~np.eye(n, dtype=bool))
        return cls.from_edges(n, r, c, table[r, c])

    @property
    def n_edges(self):
        return int(self.indices.size // 2)

    def validate(self):
        if self.indptr.shape != (self.n + 1,) or self.indptr[-1] != self.indices.size:
            raise InvalidInputError("malformed CSR structure")
        if np.any(self.lengths < 0) or not np.all(np.isfinite(self.lengths)):
            raise InvalidInputError("edge lengths must be finite and non-negative")
        rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
        if np.any(rows == self.indices):
            raise InvalidInputError("self-loops are not allowed")
        fwd = np.lexsort((self.indices, rows))
        bwd = np.lexsort((rows, self.indices))
        if not (
            np.array_equal(rows[fwd], self.indices[bwd])
            and np.array_equal(self.indices[fwd], rows[bwd])
            and np.array_equal(self.lengths[fwd], self.lengths[bwd])
        ):
            raise InvalidInputError("graph is not symmetric")

    def to_dense(self):
        """Direct-edge length table with ``inf`` for absent edges."""
        out = np.full((self.n, self.n), INF)
        rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
        out[rows, self.indices] = self.lengths
        np.fill_diagonal(out, 0.0)
        return out


@numba.njit(nogil=True, cache=True)
def _dijkstra_block(indptr, indices, lengths, sources, out):
    n = indptr.shape[0] - 1
    cap = indices.shape[0] + 1
    heap_key = np.empty(cap, dtype=np.float64)
    heap_node = np.empty(cap, dtype=np.int64)
    done = np.zeros(n, dtype=np.bool_)
    for r in range(sources.shape[0]):
        s = sources[r]
        dist = out[r]
        for v in range(n):
            dist[v] = np.inf
            done[v] = False
        dist[s] = 0.0
        heap_key[0] = 0.0
        heap_node[0] = s
        size = 1
        while size > 0:
            d = heap_key[0]
            u = heap_node[0]
            # pop: move last to root and sift down
            size -= 1
            if size > 0:
                k = heap_key[size]
                node = heap_node[size]
                i = 0
                while True:
                    c = 2 * i + 1
                    if c >= size:
                        break
                    if c + 1 < size and heap_key[c + 1] < heap_key[c]:
                        c += 1
                    if heap_key[c] < k:
                        heap_key[i] = heap_key[c]
                        heap_node[i] = heap_node[c]
                        i = c
                    else:
                        break
                heap_key[i] = k
                heap_node[i] = node
            if done[u]:
                continue
            done[u] = True
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                if done[v]:
                    continue
                nd = d + lengths[e]
                if nd < dist[v]:
                    dist[v] = nd
                    # push with sift up
                    i = size
                    size += 1
                    while i > 0:
                        p = (i - 1) // 2
                        if heap_key[p] > nd:
                            heap_key[i] = heap_key[p]
                            heap_node[i] = heap_node[p]
                            i = p
                        else:
                            break
                    heap_key[i] = nd
                    heap_node[i] = v


def worker_count(threads=None):
    """Resolve the number of worker threads.

    An explicit ``threads`` wins; otherwise ``ISUMAP_THREADS`` caps the
    count, defaulting to the machine's CPU count.
    """
    if threads is None:
        env = os.environ.get("ISUMAP_THREADS")
        threads = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(threads))


def all_pairs_shortest(graph: SparseWeightedGraph, sources=None, *, threads=None) -> np.ndarray:
    """Exact shortest-path distances from each source to every vertex.

    Parameters
    ----------
    graph : SparseWeightedGraph
    sources : sequence of int, optional
        Source vertices; all vertices when omitted.
    threads : int, optional
        Worker threads; see :func:`worker_count`.

    Returns
    -------
    (len(sources), n) float array, ``inf`` where unreachable.
    """
    if sources is None:
        sources = np.arange(graph.n, dtype=np.int64)
    else:
        sources = np.asarray(sources, dtype=np.int64).ravel()
        if sources.size and (sources.min() < 0 or sources.max() >= graph.n):
            raise InvalidInputError("source index out of range")
    out = np.empty((sources.size, graph.n), dtype=np.float64)
    if sources.size == 0:
        return out
    nthreads = min(worker_count(threads), sources.size)
    args = (graph.indptr, graph.indices, graph.lengths)
    if nthreads == 1:
        _dijkstra_block(*args, sources, out)
        return out
    # A few blocks per worker keeps load balanced; each block owns its rows.
    nblocks = min(sources.size, nthreads * 8)
    bounds = np.linspace(0, sources.size, nblocks + 1).astype(np.int64)
    with ThreadPoolExecutor(max_workers=nthreads) as pool:
        futures = [
            pool.submit(_dijkstra_block, *args, sources[a:b], out[a:b])
            for a, b in zip(bounds[:-1], bounds[1:])
            if b > a
        ]
        for f in futures:
            f.result()
    return out

