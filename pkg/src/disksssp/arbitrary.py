"""Exact SSSP for disk graphs with arbitrary radius ratios.

Rounds take the smallest key among unprocessed tentative distances and two
alarms per (canonical path, cone) pair ``lam``:

* vertex ``v``: relax from the mid vertices around ``c_v`` into the cell and
  back out to the unprocessed mid vertices around it.  Every cell member
  ``x`` with a large neighbour in ``lam`` pulls ``alarm_up(lam)`` down to
  ``dist(x) + r/4`` (``r`` the radius of its smallest large neighbour), and
  every member ``u`` with a small neighbour in ``lam`` enters ``Q(lam)``
  with priority ``dist(u) + r_u - 6|c|`` and the incremental structure.
* ``alarm_up``: relax from the processed small members with distances since
  the previous firing into the large members whose radius lies between the
  smallest large neighbours of two distance windows.
* ``alarm_down``: pop the first large vertex ``u`` of ``Q(lam)`` and relax
  from every inserted large vertex into the small members whose smallest
  large neighbour is at most as big as ``u`` and that were not queried yet.

Afterwards every small member is relaxed once from the large disks that
swallow its cell (edges into such disks only ever end at leaves).

Ties: alarm-down, then alarm-up, then vertex rounds; among alarms the
smaller pair id first.
"""
from __future__ import annotations

import bisect
import heapq
import math

import numpy as np

from .core import DiskInstance, SsspResult, tolerance
from .oracle import is_leaf
from .quadtree import ArbitraryIndex, build_index
from .update import IncrementalUpdateStructure, update

INF = math.inf
DOWN, UP = 0, 1


class ArbitrarySolver:
    """Step-able solver state; ``run`` drives it to completion."""

    def __init__(
        self,
        inst: DiskInstance,
        *,
        method: str = "auto",
        oracle: SsspResult | None = None,
        index: ArbitraryIndex | None = None,
        use_ref: bool = True,
    ):
        self.inst = inst
        self.method = method
        self.ref = (inst.xs[inst.source], inst.ys[inst.source]) if use_ref else None
        self.index = index if index is not None else build_index(inst)
        n = inst.n
        self.res = SsspResult.empty(n, inst.source)
        self.dist = self.res.dist
        self.prev = self.res.prev
        self.in_R = np.ones(n, dtype=bool)
        self.remaining = n
        self.vheap: list[tuple[float, int]] = []
        self.aheap: list[tuple[float, int, int]] = []
        self.keys: list[float] = []
        self.counts = {"case1": 0, "case2": 0, "case3": 0}
        self.oracle = oracle
        self.leaf = is_leaf(oracle) if oracle is not None else None
        self._init_pairs()
        self._preprocess()

    def _init_pairs(self) -> None:
        idx, rs = self.index, self.inst.rs
        m = len(idx.lambdas)
        self.alarm = np.full((2, m), INF)
        # alarm-up bookkeeping
        self.fired: list[list[float]] = [[] for _ in range(m)]
        self.done_small: list[list[tuple[float, int, float]]] = [[] for _ in range(m)]
        self.cut = [-INF] * m  # k'' of the latest firing
        self.cut_min = [INF] * m  # min v(lam) radius over processed members at or below the cut
        self.by_radius = []
        self.vl_radius = []
        for lam in idx.lambdas:
            L = lam.large
            order = np.lexsort((L, rs[L]))
            self.by_radius.append((L[order], rs[L][order]))
            vl = idx.vlam[lam.id]
            self.vl_radius.append(np.where(vl >= 0, rs[np.maximum(vl, 0)], INF))
        # alarm-down bookkeeping
        self.Q: list[list[tuple[float, int]]] = [[] for _ in range(m)]
        self.inc: list[IncrementalUpdateStructure | None] = [None] * m
        self.down_order = []
        for lam in idx.lambdas:
            S = idx.small[lam.path]
            r = self.vl_radius[lam.id]
            order = np.argsort(r, kind="stable")
            order = order[np.isfinite(r[order])]
            self.down_order.append((S[order], r[order]))
        self.cursor = [0] * m

    def _preprocess(self) -> None:
        inst, s = self.inst, self.inst.source
        dx = inst.xs - inst.xs[s]
        dy = inst.ys - inst.ys[s]
        w = np.sqrt(dx * dx + dy * dy)
        nb = np.flatnonzero(w <= inst.rs + inst.rs[s])
        nb = nb[nb != s]
        self.dist[nb] = w[nb]
        self.prev[nb] = s
        self.vheap = [(float(self.dist[v]), v) for v in np.r_[s, nb].tolist()]
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

    def _top_alarm(self) -> tuple[float, int, int]:
        h = self.aheap
        while h:
            a, kind, lam = h[0]
            if a == self.alarm[kind, lam]:
                return a, kind, lam
            heapq.heappop(h)
        return INF, -1, -1

    def _set_alarm(self, kind: int, lam: int, value: float) -> None:
        self.alarm[kind, lam] = value
        if value < INF:
            heapq.heappush(self.aheap, (value, kind, lam))

    def _relax(self, U, V) -> None:
        changed = update(self.inst, self.dist, self.prev, U, V, method=self.method, ref=self.ref)
        self._push(changed)

    def _push(self, changed: np.ndarray) -> None:
        for v in changed.tolist():
            if self.in_R[v]:
                heapq.heappush(self.vheap, (float(self.dist[v]), v))

    # ---------------------------------------------------------- rounds

    def step(self) -> bool:
        """Run one round; False once nothing reachable is left."""
        if self.remaining == 0:
            return False
        kv, v = self._top_vertex()
        ka, kind, lam = self._top_alarm()
        if kv == INF and ka == INF:
            return False
        if ka <= kv:
            self.keys.append(ka)
            if kind == DOWN:
                self.round_case3(lam, ka)
            else:
                self.round_case2(lam, ka)
        else:
            self.keys.append(kv)
            self.round_case1(v)
        return True

    def run(self) -> SsspResult:
        while self.step():
            pass
        self.post_process()
        self.res.stats = self.stats()
        return self.res

    def round_case1(self, v: int) -> None:
        idx, rs = self.index, self.inst.rs
        self.counts["case1"] += 1
        k = float(self.dist[v])
        c = int(idx.mid_node[v])
        own = idx.members[c]
        box = idx.box_mid(c)
        if self.oracle is not None and not self.leaf[v]:
            _check(self.oracle.dist, self.dist, [v], "selected vertex")
        self._relax(box, own)
        if self.oracle is not None:
            _check(self.oracle.dist, self.dist, own[~self.leaf[own]], "settled cell")
        self._relax(own, box[self.in_R[box]])
        for x in own.tolist():
            dx = float(self.dist[x])
            for lam in idx.L1[x]:
                pos = int(np.searchsorted(idx.small_of(lam), x))
                r = float(self.vl_radius[lam][pos])
                self._note_small(lam, dx, x, r)
                a = max(k, dx + 0.25 * r)
                if a < self.alarm[UP, lam]:
                    self._set_alarm(UP, lam, a)
            for lam in idx.L2[x]:
                pr = max(k, dx + float(rs[x]) - 6.0 * idx.cell_diameter(lam))
                heapq.heappush(self.Q[lam], (pr, x))
                if self.inc[lam] is None:
                    self.inc[lam] = IncrementalUpdateStructure(self.inst, ref=self.ref)
                self.inc[lam].insert(x, dx)
                top = self.Q[lam][0][0]
                if top != self.alarm[DOWN, lam]:
                    self._set_alarm(DOWN, lam, top)
        self.in_R[own] = False
        self.remaining -= len(own)

    def _note_small(self, lam: int, d: float, x: int, r: float) -> None:
        bisect.insort(self.done_small[lam], (d, x, r))
        if d <= self.cut[lam] and r < self.cut_min[lam]:
            self.cut_min[lam] = r

    def _advance_cut(self, lam: int, cut: float) -> None:
        rows = self.done_small[lam]
        a = bisect.bisect_right(rows, (self.cut[lam], math.inf, math.inf))
        b = bisect.bisect_right(rows, (cut, math.inf, math.inf))
        m = self.cut_min[lam]
        for _, _, r in rows[a:b]:
            if r < m:
                m = r
        self.cut[lam] = cut
        self.cut_min[lam] = m

    def round_case2(self, lam: int, k: float) -> None:
        self.counts["case2"] += 1
        hist = self.fired[lam]
        k1 = hist[-1] if hist else -INF
        if len(hist) >= 2:
            self._advance_cut(lam, hist[-2])
            r2 = self.cut_min[lam]
        else:
            r2 = INF
        rows = self.done_small[lam]
        a = bisect.bisect_left(rows, (k1, -1, -INF))
        b = bisect.bisect_right(rows, (k, math.inf, math.inf))
        window = rows[a:b]
        if window:
            U = np.array([x for _, x, _ in window], dtype=np.int64)
            r1 = min(r for _, _, r in window)
            lo, hi = min(r1, r2), max(r1, r2)
            ids, radii = self.by_radius[lam]
            i = int(np.searchsorted(radii, lo, side="left"))
            j = int(np.searchsorted(radii, hi, side="right"))
            self._relax(U, ids[i:j])
        self.alarm[UP, lam] = INF
        hist.append(k)
        if self.oracle is not None:
            self._check_case2(lam, k)

    def round_case3(self, lam: int, k: float) -> None:
        self.counts["case3"] += 1
        rs = self.inst.rs
        _, u = self.Q[lam][0]
        ru = float(rs[u])
        S, r = self.down_order[lam]
        a = self.cursor[lam]
        b = int(np.searchsorted(r, ru, side="right"))
        if b > a:
            self.cursor[lam] = b
            self._push(self.inc[lam].query(self.dist, self.prev, S[a:b]))
        if self.oracle is not None:
            self._check_case3(lam, ru)
        heapq.heappop(self.Q[lam])
        nxt = self.Q[lam][0][0] if self.Q[lam] else INF
        self._set_alarm(DOWN, lam, nxt)

    def post_process(self) -> None:
        idx = self.index
        for lam in idx.lambdas:
            if len(lam.post):
                update(self.inst, self.dist, self.prev, lam.post, idx.small[lam.path], method=self.method, ref=self.ref)

    # ---------------------------------------------------- instrumentation

    def _check_case2(self, lam: int, k: float) -> None:
        o = self.oracle
        S = self.index.small_of(lam)
        for u in self.index.lambdas[lam].large.tolist():
            w = int(o.prev[u])
            if w >= 0 and o.dist[w] < k and _member(S, w):
                _check(o.dist, self.dist, [u], f"large vertex after alarm-up of pair {lam}")

    def _check_case3(self, lam: int, ru: float) -> None:
        o, rs = self.oracle, self.inst.rs
        large = self.index.lambdas[lam].large
        S, r = self.down_order[lam]
        for v in S[: self.cursor[lam]].tolist():
            w = int(o.prev[v])
            if w >= 0 and rs[w] <= ru and _member(large, w):
                _check(o.dist, self.dist, [v], f"small vertex after alarm-down of pair {lam}")

    def stats(self) -> dict:
        out = dict(self.counts)
        out["rounds"] = len(self.keys)
        out.update(self.index.counters())
        return out


def _member(sorted_ids: np.ndarray, v: int) -> bool:
    i = int(np.searchsorted(sorted_ids, v))
    return i < len(sorted_ids) and sorted_ids[i] == v


def _check(oracle_dist, dist, ids, what: str) -> None:
    for v in np.atleast_1d(ids).tolist():
        if abs(dist[v] - oracle_dist[v]) > tolerance(oracle_dist[v]):
            raise AssertionError(f"{what} {v}: dist {dist[v]!r} but true distance {oracle_dist[v]!r}")


def solve_arbitrary(inst: DiskInstance, **kw) -> SsspResult:
    return ArbitrarySolver(inst, **kw).run()
