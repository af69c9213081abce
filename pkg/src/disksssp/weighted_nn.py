"""Exact additively weighted nearest-neighbour queries over a fixed site set.

``nearest(q)`` returns the site minimising ``|q s| + w(s)`` (ties: smallest
site id).  The ``"tree"`` strategy is a best-first kd search that prunes a
subtree when box distance plus the subtree's minimum weight exceeds the
incumbent; ``"linear"`` scans every site and is the reference answer.
Weights may be negative.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels as K


@dataclass(frozen=True)
class Site:
    id: int
    x: float
    y: float
    w: float


class WeightedSiteSet:
    def __init__(self, ids, xs, ys, ws, strategy: str = "tree"):
        if strategy not in ("tree", "linear"):
            raise ValueError(f"unknown strategy {strategy!r}")
        self.ids = np.ascontiguousarray(ids, dtype=np.int64)
        self.xs = np.ascontiguousarray(xs, dtype=np.float64)
        self.ys = np.ascontiguousarray(ys, dtype=np.float64)
        self.ws = np.ascontiguousarray(ws, dtype=np.float64)
        if len(self.ids) == 0:
            raise ValueError("site set must be nonempty")
        self.strategy = strategy
        self._layers = None
        if strategy == "tree":
            X, Y, W1, W2, G, BX0, BX1, BY0, BY1, M1, M2 = K.build_layers(
                self.xs, self.ys, self.ws, self.ws, self.ids
            )
            # depth 0 is the whole set; deeper rows are unused here
            self._layers = (X[:1].copy(), Y[:1].copy(), W2[:1].copy(), G[:1].copy(),
                            BX0[:1].copy(), BX1[:1].copy(), BY0[:1].copy(), BY1[:1].copy(), M2[:1].copy())

    @classmethod
    def build(cls, sites: Sequence[Site | tuple], strategy: str = "tree") -> "WeightedSiteSet":
        rows = [(s.id, s.x, s.y, s.w) if isinstance(s, Site) else tuple(s) for s in sites]
        if not rows:
            raise ValueError("site set must be nonempty")
        ids, xs, ys, ws = zip(*rows)
        return cls(ids, xs, ys, ws, strategy)

    def __len__(self) -> int:
        return len(self.ids)

    def nearest(self, qx: float, qy: float) -> tuple[int, float]:
        ids, vals = self.nearest_many(np.array([qx], dtype=np.float64), np.array([qy], dtype=np.float64))
        return int(ids[0]), float(vals[0])

    def nearest_many(self, qx: np.ndarray, qy: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        qx = np.ascontiguousarray(qx, dtype=np.float64)
        qy = np.ascontiguousarray(qy, dtype=np.float64)
        if self.strategy == "linear":
            return linear_nearest(self.ids, self.xs, self.ys, self.ws, qx, qy)
        X, Y, W, G, BX0, BX1, BY0, BY1, M = self._layers
        vals, ids = K.nearest_batch(X, Y, W, G, BX0, BX1, BY0, BY1, M, len(self.ids), qx, qy)
        return ids, vals

    def nearest_debug(self, qx: float, qy: float) -> tuple[int, float, int]:
        """Pure-Python replay of the tree search that re-scans every pruned
        subtree and asserts its true minimum is above the incumbent.

        Returns ``(id, value, pruned subtree count)``.
        """
        if self.strategy != "tree":
            raise ValueError("debug search needs the tree strategy")
        X, Y, W, G, BX0, BX1, BY0, BY1, M = (a[0] for a in self._layers)
        best, best_id = math.inf, K.BIG_ID
        pruned = 0
        stack = [(0, len(self.ids))]
        while stack:
            a, b = stack.pop()
            if b - a <= K.LEAF:
                for i in range(a, b):
                    dx, dy = qx - X[i], qy - Y[i]
                    val = math.sqrt(dx * dx + dy * dy) + W[i]
                    if val < best or (val == best and G[i] < best_id):
                        best, best_id = val, int(G[i])
                continue
            mid = (a + b) // 2
            lb = _box_dist(qx, qy, BX0[mid], BX1[mid], BY0[mid], BY1[mid]) + M[mid]
            if lb > best:
                pruned += 1
                dx, dy = qx - X[a:b], qy - Y[a:b]
                true_min = float(np.min(np.sqrt(dx * dx + dy * dy) + W[a:b]))
                assert true_min > best, "pruned a subtree holding a better site"
                assert lb <= true_min, "lower bound exceeds subtree minimum"
                continue
            stack.append((a, mid))
            stack.append((mid, b))
        return best_id, best, pruned


def _box_dist(qx, qy, x0, x1, y0, y1) -> float:
    dx = x0 - qx if qx < x0 else (qx - x1 if qx > x1 else 0.0)
    dy = y0 - qy if qy < y0 else (qy - y1 if qy > y1 else 0.0)
    return math.sqrt(dx * dx + dy * dy)


def linear_nearest(ids, xs, ys, ws, qx, qy) -> tuple[np.ndarray, np.ndarray]:
    """Reference scan: per query the (value, id)-lexicographic minimum."""
    qx = np.atleast_1d(qx)
    qy = np.atleast_1d(qy)
    out_ids = np.empty(len(qx), dtype=np.int64)
    out_vals = np.empty(len(qx))
    order = np.argsort(ids, kind="stable")
    ids, xs, ys, ws = ids[order], xs[order], ys[order], ws[order]
    for j in range(len(qx)):
        dx = qx[j] - xs
        dy = qy[j] - ys
        vals = np.sqrt(dx * dx + dy * dy) + ws
        k = int(np.argmin(vals))  # first occurrence = smallest id among ties
        out_ids[j] = ids[k]
        out_vals[j] = vals[k]
    return out_ids, out_vals
