"""Exact SSSP for disk graphs whose radius ratio is bounded.

Rounds repeatedly take the smallest key among unprocessed tentative
distances and cell alarms.

* A vertex ``v`` with the smallest distance settles all of ``P_mid(c_v)``:
  relax from the mid vertices around ``c_v`` into the cell, relax from the
  cell into the mid and small vertices around it, arm ``alarm(c) = dist(v) +
  2|c|`` for every cell of ``L(c_v)`` that is not armed yet, then drop the
  cell's vertices from the unprocessed set.
* An alarm of cell ``c`` relaxes from the small vertices around ``c`` into
  ``P_mid(c)`` and disarms.

Edges into bigger disks are thus relaxed lazily in batches; each cell fires
a bounded number of times because small neighbours of one cell have
distances within ``65|c|`` of each other.

On equal keys an alarm fires before a vertex round.
"""
from __future__ import annotations

import heapq
import math
from collections import Counter

import numpy as np

from .core import DiskInstance, SsspResult, tolerance
from .grid import GridIndex, build_grid
from .update import update

INF = math.inf


class BoundedSolver:
    """Step-able solver state; ``run`` drives it to completion."""

    def __init__(
        self,
        inst: DiskInstance,
        *,
        method: str = "auto",
        oracle_dist=None,
        grid: GridIndex | None = None,
        use_ref: bool = True,
    ):
        self.inst = inst
        self.method = method
        self.ref = (inst.xs[inst.source], inst.ys[inst.source]) if use_ref else None
        self.grid = grid if grid is not None else build_grid(inst)
        n = inst.n
        self.res = SsspResult.empty(n, inst.source)
        self.dist = self.res.dist
        self.prev = self.res.prev
        self.in_R = np.ones(n, dtype=bool)
        self.remaining = n
        self.alarm = np.full(len(self.grid.cells), INF)
        self.vheap: list[tuple[float, int]] = []
        self.aheap: list[tuple[float, int]] = []
        self.keys: list[float] = []
        self.firings: Counter = Counter()
        self.rounds = 0
        self.oracle_dist = oracle_dist
        self._preprocess()

    def _preprocess(self) -> None:
        inst, s = self.inst, self.inst.source
        dx = inst.xs - inst.xs[s]
        dy = inst.ys - inst.ys[s]
        w = np.sqrt(dx * dx + dy * dy)
        nb = np.flatnonzero(w <= inst.rs + inst.rs[s])
        nb = nb[nb != s]
        self.dist[nb] = w[nb]
        self.prev[nb] = s
        for v in np.r_[s, nb].tolist():
            self.vheap.append((float(self.dist[v]), v))
        heapq.heapify(self.vheap)

    # ---------------------------------------------------------- queues

    def _top_vertex(self) -> tuple[float, int]:
        h = self.vheap
        while h:
            d, v = h[0]
            if self.in_R[v] and d == self.dist[v]:
                return d, v
            heapq.heappop(h)
        return INF, -1

    def _top_alarm(self) -> tuple[float, int]:
        h = self.aheap
        while h:
            a, c = h[0]
            if a == self.alarm[c]:
                return a, c
            heapq.heappop(h)
        return INF, -1

    def _push(self, changed: np.ndarray) -> None:
        for v in changed.tolist():
            if self.in_R[v]:
                heapq.heappush(self.vheap, (float(self.dist[v]), v))

    def _relax(self, U, V) -> None:
        V = V[self.in_R[V]]
        self._push(update(self.inst, self.dist, self.prev, U, V, method=self.method, ref=self.ref))

    # ---------------------------------------------------------- rounds

    def step(self) -> bool:
        """Run one round; False once nothing reachable is left."""
        if self.remaining == 0:
            return False
        kv, v = self._top_vertex()
        ka, c = self._top_alarm()
        if kv == INF and ka == INF:
            return False
        self.rounds += 1
        if ka <= kv:
            self.keys.append(ka)
            self.round_case2(c)
        else:
            self.keys.append(kv)
            self.round_case1(v)
        return True

    def run(self) -> SsspResult:
        while self.step():
            pass
        self.res.stats = self.stats()
        return self.res

    def round_case1(self, v: int) -> None:
        g = self.grid
        c = int(g.cell_of[v])
        own = g.members[c]
        if self.oracle_dist is not None:
            _check(self.oracle_dist, self.dist, [v], "selected vertex")
        self._relax(g.box_mid(c), own)
        if self.oracle_dist is not None:
            _check(self.oracle_dist, self.dist, own, "settled cell")
        self._relax(own, g.box_all(c))
        dv = float(self.dist[v])
        for d in g.L[c].tolist():
            if self.alarm[d] == INF:
                self.alarm[d] = dv + 2.0 * g.diameter(d)
                heapq.heappush(self.aheap, (float(self.alarm[d]), d))
        self.in_R[own] = False
        self.remaining -= len(own)

    def round_case2(self, c: int) -> None:
        g = self.grid
        self.firings[c] += 1
        self._relax(g.box_small(c), g.members[c])
        self.alarm[c] = INF

    def stats(self) -> dict:
        return {
            "rounds": self.rounds,
            "cells": len(self.grid.cells),
            "max_firings": max(self.firings.values(), default=0),
            "alarm_firings": sum(self.firings.values()),
        }


def _check(oracle_dist, dist, ids, what: str) -> None:
    for v in np.atleast_1d(ids).tolist():
        if abs(dist[v] - oracle_dist[v]) > tolerance(oracle_dist[v]):
            raise AssertionError(f"{what} {v}: dist {dist[v]!r} but true distance {oracle_dist[v]!r}")


def solve_bounded(inst: DiskInstance, **kw) -> SsspResult:
    return BoundedSolver(inst, **kw).run()
