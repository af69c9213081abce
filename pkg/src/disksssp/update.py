"""Batched relaxation ``Update(U, V)`` and its insert-only incremental variant.

For every ``v`` in ``V`` the new tentative distance is the minimum of its
current one and ``dist(u) + |uv|`` over ``u`` in ``U`` adjacent to ``v``.
``prev(v)`` changes only on a strict decrease; among equal candidates the
smallest ``u`` id wins.  Distances of ``U`` are read once, before any write.

The tree implementation sorts ``U`` by ``dist(u) + r_u``.  A query first finds
the leftmost leaf adjacent to ``v`` (per-node index with weight ``-r``), then
takes the weighted minimum of ``dist(u) + |uv|`` over the suffix starting at
that leaf (per-node index with weight ``dist``).  Any non-adjacent ``u`` in
that suffix satisfies ``dist(u) + |uv| > dist(u) + r_u + r_v >= dist(p) + |pv|``
for the leftmost adjacent ``p``, so the suffix minimum is adjacent.  The
kernel still re-checks adjacency and falls back to a scan if floating point
rounding ever disagrees.

Passing ``ref`` (a point, in practice the source) adds a second pruning
bound, ``min(dist(u) - |ref u|) + min over the box of |ref p| + |p v|``.  It
is tight when distances are straight-line distances from ``ref`` (e.g. every
vertex one hop from the source) but is only exact up to a few ulps, so it is
opt-in: the solvers use it, plain ``update`` calls stay bit-exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .core import DiskInstance

# measured costs in microseconds: one (u, v) pair of the double loop, one
# site of a tree build, one tree query
PAIR_COST = 0.0028
BUILD_COST = 4.5
QUERY_COST = 1.7


@dataclass(frozen=True)
class LabeledVertex:
    id: int
    x: float
    y: float
    r: float
    dist: float

    @property
    def k1(self) -> float:
        return self.dist + self.r

    @property
    def k2(self) -> float:
        return -self.r

    @property
    def k3(self) -> float:
        return self.dist


class UpdateTree:
    """Static segment tree over sites sorted by ``key`` (ties by id).

    ``key`` defaults to ``dist + r``; passing the radii instead gives a tree
    whose leftmost adjacent leaf is the smallest adjacent disk.
    """

    def __init__(self, ids, xs, ys, rs, dists, key=None, ref=None):
        ids = np.asarray(ids, dtype=np.int64)
        if len(ids) == 0:
            raise ValueError("update tree needs at least one site")
        xs = np.asarray(xs, dtype=np.float64)
        ys = np.asarray(ys, dtype=np.float64)
        rs = np.asarray(rs, dtype=np.float64)
        dists = np.asarray(dists, dtype=np.float64)
        if not np.all(np.isfinite(dists)):
            raise ValueError("update tree sites need finite dist values")
        if key is None:
            key = dists + rs
        order = np.lexsort((ids, np.asarray(key, dtype=np.float64)))
        self.ids = np.ascontiguousarray(ids[order])
        self.xs = np.ascontiguousarray(xs[order])
        self.ys = np.ascontiguousarray(ys[order])
        self.rs = np.ascontiguousarray(rs[order])
        self.dists = np.ascontiguousarray(dists[order])
        self.layers = K.build_layers(self.xs, self.ys, -self.rs, self.dists, self.ids)
        self.ref = None if ref is None else (float(ref[0]), float(ref[1]))
        if self.ref is None:
            self.excess = self.layers[10]  # placeholder, never read
        else:
            X, Y, _, W2 = self.layers[:4]
            self.excess = K.build_excess(X, Y, W2, len(self.ids), self.ref[0], self.ref[1])

    @classmethod
    def from_instance(cls, inst: DiskInstance, members, dist, key=None, ref=None) -> "UpdateTree":
        members = np.asarray(members, dtype=np.int64)
        k = None if key is None else np.asarray(key, dtype=np.float64)[members]
        return cls(members, inst.xs[members], inst.ys[members], inst.rs[members], dist[members], k, ref)

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def leaf_ids(self) -> list[int]:
        return self.ids.tolist()

    def relax(self, qx, qy, qr, bound) -> tuple[np.ndarray, np.ndarray, int]:
        """Best improving ``(value, id)`` per query; id -1 when nothing beats ``bound``."""
        X, Y, W1, W2, G, BX0, BX1, BY0, BY1, M1, M2 = self.layers
        rx, ry = self.ref if self.ref is not None else (0.0, 0.0)
        return K.relax_batch(
            X, Y, W1, W2, G, BX0, BX1, BY0, BY1, M1, M2, self.excess, self.ref is not None, rx, ry,
            self.xs, self.ys, self.rs, self.dists, self.ids,
            _f64(qx), _f64(qy), _f64(qr), _f64(bound),
        )

    def first_adjacent(self, qx, qy, qr) -> np.ndarray:
        """Id of the lowest-key site adjacent to each query disk, or -1."""
        X, Y, W1, W2, G, BX0, BX1, BY0, BY1, M1, M2 = self.layers
        pos = K.first_adjacent_batch(X, Y, W1, BX0, BX1, BY0, BY1, M1, len(self.ids), _f64(qx), _f64(qy), _f64(qr))
        return np.where(pos >= 0, self.ids[np.maximum(pos, 0)], -1)


def _f64(a) -> np.ndarray:
    return np.ascontiguousarray(np.atleast_1d(a), dtype=np.float64)


def build_update_tree(U: list[LabeledVertex]) -> UpdateTree:
    return UpdateTree([u.id for u in U], [u.x for u in U], [u.y for u in U], [u.r for u in U], [u.dist for u in U])


def relax_one(T: UpdateTree, v, current_dist_v: float):
    """Return ``(new_dist, predecessor id)`` if some adjacent site improves ``v``, else None."""
    vals, ids, _ = T.relax([v.x], [v.y], [v.r], [current_dist_v])
    if ids[0] < 0:
        return None
    return float(vals[0]), int(ids[0])


def update(
    inst: DiskInstance, dist: np.ndarray, prev: np.ndarray, U, V, method: str = "auto", ref=None
) -> np.ndarray:
    """Apply ``Update(U, V)`` in place; return the ids of ``V`` whose dist decreased.

    ``method`` is ``"tree"``, ``"brute"`` (compiled double loop) or ``"auto"``.
    Sites of ``U`` with infinite dist are ignored.  ``ref`` enables the
    reference-point bound of the tree method.
    """
    U = np.asarray(U, dtype=np.int64)
    V = np.asarray(V, dtype=np.int64)
    if len(V) == 0 or len(U) == 0:
        return np.empty(0, dtype=np.int64)
    U = U[np.isfinite(dist[U])]
    if len(U) == 0:
        return np.empty(0, dtype=np.int64)
    if method == "auto":
        method = choose_method(len(U), len(V))
    qx, qy, qr = inst.xs[V], inst.ys[V], inst.rs[V]
    bound = np.ascontiguousarray(dist[V])
    if method == "tree":
        tree = UpdateTree.from_instance(inst, U, dist, ref=ref)
        vals, ids, _ = tree.relax(qx, qy, qr, bound)
    elif method == "brute":
        ud = np.ascontiguousarray(dist[U])
        vals, ids = K.brute_relax(inst.xs[U], inst.ys[U], inst.rs[U], ud, U, qx, qy, qr, bound)
    else:
        raise ValueError(f"unknown update method {method!r}")
    return _apply(dist, prev, V, vals, ids)


def choose_method(nu: int, nv: int) -> str:
    """``"brute"`` unless building a tree over ``nu`` sites pays for itself."""
    if nu * nv * PAIR_COST <= nu * BUILD_COST + nv * QUERY_COST:
        return "brute"
    return "tree"


def _apply(dist, prev, V, vals, ids) -> np.ndarray:
    hit = ids >= 0
    changed = V[hit]
    # V may repeat an id; keep the lexicographically smallest candidate
    if len(changed) != len(np.unique(changed)):
        order = np.lexsort((ids[hit], vals[hit], changed))
        changed, cv, ci = changed[order], vals[hit][order], ids[hit][order]
        first = np.r_[True, changed[1:] != changed[:-1]]
        changed, cv, ci = changed[first], cv[first], ci[first]
    else:
        cv, ci = vals[hit], ids[hit]
    dist[changed] = cv
    prev[changed] = ci
    return changed


def naive_update(inst: DiskInstance, dist: np.ndarray, prev: np.ndarray, U, V) -> list[int]:
    """Plain double loop over ``V x U``; the reference semantics for ``update``."""
    snap = {int(u): float(dist[u]) for u in U}
    changed = []
    for v in V:
        v = int(v)
        best, arg = float(dist[v]), -1
        for u, du in snap.items():
            if du == math.inf:
                continue
            w = inst.dist(u, v)
            if w <= inst.rs[u] + inst.rs[v]:
                val = du + w
                if val < best or (val == best and arg >= 0 and u < arg):
                    best, arg = val, u
        if arg >= 0 and best < dist[v]:
            dist[v] = best
            prev[v] = arg
            changed.append(v)
    return changed


class IncrementalUpdateStructure:
    """Insert-only ``Update`` structure: a binary counter of update trees.

    Slot ``i`` holds either nothing or a tree over exactly ``2**i`` inserted
    sites.  Inserting carries like binary addition, rebuilding the merged tree
    from the stored (id, x, y, r, dist) rows.
    """

    def __init__(self, inst: DiskInstance, ref=None):
        self.inst = inst
        self.ref = ref
        self.slots: list[tuple[np.ndarray, np.ndarray, UpdateTree] | None] = []
        self.inserted: set[int] = set()
        self.rebuilt_leaves = 0

    def __len__(self) -> int:
        return len(self.inserted)

    def insert(self, v: int, d: float) -> None:
        v = int(v)
        if v in self.inserted:
            raise ValueError(f"vertex {v} already inserted")
        if not math.isfinite(d):
            raise ValueError("inserted dist must be finite")
        self.inserted.add(v)
        ids = np.array([v], dtype=np.int64)
        ds = np.array([d], dtype=np.float64)
        i = 0
        while i < len(self.slots) and self.slots[i] is not None:
            oid, od, _ = self.slots[i]
            ids = np.concatenate((oid, ids))
            ds = np.concatenate((od, ds))
            self.slots[i] = None
            i += 1
        if i == len(self.slots):
            self.slots.append(None)
        inst = self.inst
        self.slots[i] = (ids, ds, UpdateTree(ids, inst.xs[ids], inst.ys[ids], inst.rs[ids], ds, ref=self.ref))
        if len(ids) > 1:
            self.rebuilt_leaves += len(ids)

    def sizes(self) -> list[int]:
        return sorted((len(s[0]) for s in self.slots if s is not None), reverse=True)

    def query(self, dist: np.ndarray, prev: np.ndarray, V) -> np.ndarray:
        """``Update(inserted, V)`` in place; returns the ids whose dist decreased."""
        V = np.asarray(V, dtype=np.int64)
        if len(V) == 0 or not self.inserted:
            return np.empty(0, dtype=np.int64)
        inst = self.inst
        qx, qy, qr = inst.xs[V], inst.ys[V], inst.rs[V]
        bound = np.ascontiguousarray(dist[V], dtype=np.float64)
        best = bound.copy()
        arg = np.full(len(V), -1, dtype=np.int64)
        for slot in self.slots:
            if slot is None:
                continue
            # every tree is asked against the original bound so that equal
            # values from different trees still resolve to the smallest id
            vals, ids, _ = slot[2].relax(qx, qy, qr, bound)
            better = (ids >= 0) & ((vals < best) | ((vals == best) & ((arg < 0) | (ids < arg))))
            best = np.where(better, vals, best)
            arg = np.where(better, ids, arg)
        return _apply(dist, prev, V, best, arg)


def inc_insert(S: IncrementalUpdateStructure, v: int, d: float) -> None:
    S.insert(v, d)


def inc_query(S: IncrementalUpdateStructure, dist: np.ndarray, prev: np.ndarray, V) -> np.ndarray:
    return S.query(dist, prev, V)
