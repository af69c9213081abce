"""Reference solver: build the explicit disk graph and run textbook Dijkstra.

Quadratic in time and memory by design, so it refuses instances above a cap.
Predecessors follow the same tie rule as the fast solvers: among equal
candidate distances the smallest predecessor id wins.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .core import DiskInstance, SsspResult

DEFAULT_CAP = 20_000


class OracleRefused(RuntimeError):
    pass


@dataclass
class ExplicitGraph:
    n: int
    indptr: np.ndarray
    nbr: np.ndarray
    weight: np.ndarray

    @property
    def m(self) -> int:
        return len(self.nbr) // 2

    def neighbors(self, u: int) -> tuple[np.ndarray, np.ndarray]:
        a, b = self.indptr[u], self.indptr[u + 1]
        return self.nbr[a:b], self.weight[a:b]


def materialize(inst: DiskInstance, cap: int = DEFAULT_CAP) -> ExplicitGraph:
    n = inst.n
    if n > cap:
        raise OracleRefused(f"refusing to materialize {n} vertices (cap {cap})")
    rows, cols, ws = [], [], []
    step = max(1, (1 << 22) // n)
    for a in range(0, n, step):
        i = np.arange(a, min(n, a + step))
        dx = inst.xs[i][:, None] - inst.xs[None, :]
        dy = inst.ys[i][:, None] - inst.ys[None, :]
        w = np.sqrt(dx * dx + dy * dy)
        adj = w <= inst.rs[i][:, None] + inst.rs[None, :]
        adj[np.arange(len(i)), i] = False
        r, c = np.nonzero(adj)
        rows.append(i[r])
        cols.append(c)
        ws.append(w[r, c])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    ws = np.concatenate(ws)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, rows + 1, 1)
    return ExplicitGraph(n, np.cumsum(indptr), cols.astype(np.int64), ws)


def dijkstra(g: ExplicitGraph, s: int) -> SsspResult:
    res = SsspResult.empty(g.n, s)
    dist, prev = res.dist, res.prev
    done = np.zeros(g.n, dtype=bool)
    heap = [(0.0, s)]
    while heap:
        d, u = heapq.heappop(heap)
        if done[u] or d != dist[u]:
            continue
        done[u] = True
        nbr, w = g.neighbors(u)
        for v, wv in zip(nbr.tolist(), w.tolist()):
            if done[v]:
                continue
            nd = d + wv
            if nd < dist[v]:
                dist[v] = nd
                prev[v] = u
                heapq.heappush(heap, (nd, v))
            elif nd == dist[v] and u < prev[v]:
                prev[v] = u
    return res


def solve_oracle(inst: DiskInstance, cap: int = DEFAULT_CAP) -> SsspResult:
    g = materialize(inst, cap)
    res = dijkstra(g, inst.source)
    res.stats = {"edges": g.m}
    return res


def distances(inst: DiskInstance, cap: int = DEFAULT_CAP) -> np.ndarray:
    return solve_oracle(inst, cap).dist


def tree_edges(res: SsspResult) -> list[tuple[int, int]]:
    """(parent, child) pairs of the shortest path tree."""
    return [(int(p), v) for v, p in enumerate(res.prev.tolist()) if p >= 0]


def is_leaf(res: SsspResult) -> np.ndarray:
    has_child = np.zeros(len(res.prev), dtype=bool)
    p = res.prev[res.prev >= 0]
    has_child[p] = True
    return ~has_child & np.isfinite(res.dist)

