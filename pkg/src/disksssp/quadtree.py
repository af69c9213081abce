"""Compressed quadtree, heavy paths and canonical paths for arbitrary radius ratios.

Cells use the same diagonal convention as the bounded grid (a level-``i``
cell has diameter ``2**i``), but the grid is anchored at the lower-left
corner of the bounding box so that one cell contains every point.  Cell
indices are Python ints, so levels and coordinates never overflow.

``c_v`` is the cell of ``v`` at the level with ``h|c| <= r_v < 2h|c|`` and
``cbar_v`` its ancestor ``h`` times larger.  The tree holds every ``c_v``,
every ``cbar_v``, the root and the branching cells needed to connect them.

Heavy paths follow the child with the largest subtree.  Each heavy path is
cut into canonical paths by a weight-balanced search tree (weight of a path
node = its subtree size minus that of its heavy child): the canonical path of
a search-tree node is the node together with its left subtree.  A prefix of
a heavy path is then a disjoint union of at most ``depth + 1`` canonical
paths, and summed over the heavy paths of a root-to-node path this telescopes
to at most ``2 log2(N) + 1`` pieces.

A canonical path covers every grid level from its lowest cell up to just
below the parent of its topmost cell (the levels skipped by a compressed
edge belong to the path below the edge).  Its *top level* is that upper end;
for the path holding the root it is the root level.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import DiskInstance, InstanceError

H = 1024
LOG_H = 10
ALPHA = 629  # smallest integer above 2 pi / asin(1/100)
SQRT_HALF = math.sqrt(0.5)
MAX_INDEX_BITS = 60

Cell = tuple[int, int, int]


def side(level: int) -> float:
    return math.ldexp(SQRT_HALF, level)


def mid_level(r) -> np.ndarray:
    """Level ``i`` with ``h 2**i <= r < 2h 2**i``."""
    _, e = np.frexp(np.asarray(r, dtype=np.float64) / H)
    return (e - 1).astype(np.int64)


def ancestor(cell: Cell, level: int) -> Cell:
    l, x, y = cell
    d = level - l
    return (level, x >> d, y >> d)


def is_ancestor(a: Cell, b: Cell) -> bool:
    """True if ``a`` contains ``b`` (a cell contains itself)."""
    return a[0] >= b[0] and ancestor(b, a[0]) == a


def lca(a: Cell, b: Cell) -> Cell:
    top = max(a[0], b[0])
    a, b = ancestor(a, top), ancestor(b, top)
    d = max((a[1] ^ b[1]).bit_length(), (a[2] ^ b[2]).bit_length())
    return ancestor(a, top + d)


def _zorder_key(cell: Cell, base: int) -> tuple[int, int]:
    """Preorder key: Morton code of the lower-left corner at level ``base``,
    then larger cells first."""
    l, x, y = cell
    d = l - base
    x <<= d
    y <<= d
    code = 0
    bit = 0
    while x or y:
        code |= ((x & 1) << (2 * bit)) | ((y & 1) << (2 * bit + 1))
        x >>= 1
        y >>= 1
        bit += 1
    return code, -l


@dataclass
class Quadtree:
    """Compressed quadtree over the required cells; node ids are preorder."""

    cells: list[Cell]
    parent: list[int]
    children: list[list[int]]
    node_of: dict[Cell, int]
    size: list[int] = field(default_factory=list)
    heavy: list[int] = field(default_factory=list)

    @property
    def root(self) -> int:
        return 0

    def __len__(self) -> int:
        return len(self.cells)

    def level(self, node: int) -> int:
        return self.cells[node][0]

    def diameter(self, node: int) -> float:
        return math.ldexp(1.0, self.cells[node][0])

    def path_to_root(self, node: int) -> list[int]:
        out = []
        while node >= 0:
            out.append(node)
            node = self.parent[node]
        return out


def build_tree(required) -> Quadtree:
    """Compressed quadtree whose nodes are ``required`` closed under pairwise LCA."""
    cells = set(required)
    if not cells:
        raise ValueError("quadtree needs at least one cell")
    base = min(c[0] for c in cells)
    order = sorted(cells, key=lambda c: _zorder_key(c, base))
    # LCAs of preorder neighbours close the set under LCA
    for a, b in zip(order, order[1:]):
        cells.add(lca(a, b))
    order = sorted(cells, key=lambda c: _zorder_key(c, base))
    node_of = {c: k for k, c in enumerate(order)}
    parent = [-1] * len(order)
    children: list[list[int]] = [[] for _ in order]
    stack: list[int] = []
    for k, c in enumerate(order):
        while stack and not is_ancestor(order[stack[-1]], c):
            stack.pop()
        if stack:
            parent[k] = stack[-1]
            children[stack[-1]].append(k)
        elif k:
            raise AssertionError("quadtree cells do not share a root")
        stack.append(k)
    tree = Quadtree(order, parent, children, node_of)
    _heavy_children(tree)
    return tree


def _heavy_children(tree: Quadtree) -> None:
    n = len(tree)
    size = [1] * n
    for k in range(n - 1, 0, -1):  # preorder: children come after parents
        size[tree.parent[k]] += size[k]
    heavy = [-1] * n
    for k in range(n):
        best = -1
        for c in tree.children[k]:
            if best < 0 or size[c] > size[best]:
                best = c
        heavy[k] = best
    tree.size = size
    tree.heavy = heavy


@dataclass
class CanonicalPaths:
    """Canonical paths: ``nodes[p]`` runs top to bottom along one heavy path."""

    nodes: list[list[int]]
    low: list[int]  # lowest node c_pi
    top_level: list[int]  # highest grid level covered
    containing: list[list[int]]  # tree node -> canonical paths through it
    heavy_path: list[int]  # tree node -> id of its heavy path
    position: list[int]  # tree node -> index along that heavy path
    ending: list[int]  # tree node -> canonical path whose lowest node it is
    bst_parent: list[int]  # tree node -> parent in its heavy path's search tree
    heads: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.nodes)

    def cover(self, tree: Quadtree, node: int) -> list[int]:
        """Disjoint canonical paths whose union is the root-to-``node`` path,
        listed from the bottom up."""
        out = []
        while node >= 0:
            # climb the search tree; ancestors entered from the right end a piece
            t = node
            pos = self.position[node]
            while t >= 0:
                if self.position[t] <= pos:
                    out.append(self.ending[t])
                t = self.bst_parent[t]
            node = tree.parent[self.heads[self.heavy_path[node]]]
        return out


def build_paths(tree: Quadtree) -> CanonicalPaths:
    n = len(tree)
    heavy_path = [-1] * n
    position = [-1] * n
    heads: list[int] = []
    for k in range(n):
        if heavy_path[k] >= 0:
            continue
        hp = len(heads)
        heads.append(k)
        node, pos = k, 0
        while node >= 0:
            heavy_path[node] = hp
            position[node] = pos
            node = tree.heavy[node]
            pos += 1
    nodes: list[list[int]] = []
    low: list[int] = []
    top_level: list[int] = []
    containing: list[list[int]] = [[] for _ in range(n)]
    ending = [-1] * n
    bst_parent = [-1] * n
    for head in heads:
        chain = [head]
        while tree.heavy[chain[-1]] >= 0:
            chain.append(tree.heavy[chain[-1]])
        w = [tree.size[c] - (tree.size[tree.heavy[c]] if tree.heavy[c] >= 0 else 0) for c in chain]
        prefix = np.concatenate(([0], np.cumsum(w)))
        # iterative weight-balanced split: (lo, hi, search-tree parent)
        stack = [(0, len(chain), -1)]
        while stack:
            lo, hi, par = stack.pop()
            if lo >= hi:
                continue
            half = (prefix[lo] + prefix[hi]) / 2.0
            m = int(np.searchsorted(prefix, half, side="left")) - 1
            m = min(max(m, lo), hi - 1)
            node = chain[m]
            bst_parent[node] = par
            piece = chain[lo:m + 1]
            p = len(nodes)
            nodes.append(piece)
            low.append(node)
            above = tree.parent[piece[0]]
            top_level.append(tree.level(above) - 1 if above >= 0 else tree.level(piece[0]))
            ending[node] = p
            for c in piece:
                containing[c].append(p)
            stack.append((lo, m, node))
            stack.append((m + 1, hi, node))
    return CanonicalPaths(nodes, low, top_level, containing, heavy_path, position, ending, bst_parent, heads)


# --------------------------------------------------------------- vertex side

BOX_HALF = 4 * H * H  # half-side of the neighbourhood square, in cells of c
CONE_SLACK = 4 * H + 4  # crossing cells within this many steps can hold a cone apex


def cone_index(dx: float, dy: float) -> int:
    """Half-open angular sector of the vector (dx, dy); the apex itself is sector 0."""
    if dx == 0.0 and dy == 0.0:
        return 0
    a = math.atan2(dy, dx)
    if a < 0.0:
        a += 2.0 * math.pi
    return min(int(a * ALPHA / (2.0 * math.pi)), ALPHA - 1)


def first_by_radius(inst: DiskInstance, queries: np.ndarray, sites: np.ndarray) -> np.ndarray:
    """For every query vertex the adjacent site with the smallest (radius, id), or -1."""
    from .update import UpdateTree

    queries = np.asarray(queries, dtype=np.int64)
    sites = np.asarray(sites, dtype=np.int64)
    if len(queries) == 0 or len(sites) == 0:
        return np.full(len(queries), -1, dtype=np.int64)
    if len(queries) * len(sites) <= 1 << 16:
        order = sites[np.lexsort((sites, inst.rs[sites]))]
        dx = inst.xs[queries][:, None] - inst.xs[order][None, :]
        dy = inst.ys[queries][:, None] - inst.ys[order][None, :]
        adj = np.sqrt(dx * dx + dy * dy) <= inst.rs[queries][:, None] + inst.rs[order][None, :]
        first = np.argmax(adj, axis=1)
        return np.where(adj[np.arange(len(queries)), first], order[first], -1)
    tree = UpdateTree.from_instance(inst, sites, np.zeros(inst.n), key=inst.rs)
    return tree.first_adjacent(inst.xs[queries], inst.ys[queries], inst.rs[queries])


@dataclass
class LambdaPair:
    """A (canonical path, cone) pair with its large and post members."""

    id: int
    path: int
    sector: int
    level: int  # level of the lowest cell c
    large: np.ndarray
    post: np.ndarray


@dataclass
class ArbitraryIndex:
    inst: DiskInstance
    x0: float
    y0: float
    tx: np.ndarray  # coordinates relative to the grid anchor
    ty: np.ndarray
    lev: np.ndarray  # level of c_v
    cell: list[Cell]  # c_v
    cx: np.ndarray  # index of c_v, as int64
    cy: np.ndarray
    tree: Quadtree
    paths: CanonicalPaths
    mid_node: np.ndarray  # tree node of c_v
    cbar_node: np.ndarray  # tree node of cbar_v
    members: dict[int, np.ndarray]  # tree node -> P_mid, ascending ids
    pi: list[list[int]]  # Pi_v, canonical paths from cbar_v upwards
    small: list[np.ndarray]  # canonical path -> P_small, ascending ids
    lambdas: list[LambdaPair] = field(default_factory=list)
    lam_of: dict[tuple[int, int], int] = field(default_factory=dict)
    L1: list[list[int]] = field(default_factory=list)
    L2: list[list[int]] = field(default_factory=list)
    vlam: list[np.ndarray] = field(default_factory=list)  # lambda -> v(lambda) per small member, -1 if none
    _level_trees: dict = field(default_factory=dict, repr=False)

    # ------------------------------------------------------------ geometry

    def center(self, node: int) -> tuple[float, float]:
        l, ix, iy = self.tree.cells[node]
        s = side(l)
        return (ix + 0.5) * s, (iy + 0.5) * s

    def small_of(self, lam: int) -> np.ndarray:
        return self.small[self.lambdas[lam].path]

    def cell_diameter(self, lam: int) -> float:
        return math.ldexp(1.0, self.lambdas[lam].level)

    def cone_radius(self, lam: int) -> float:
        return 3.0 * H * math.ldexp(1.0, self.paths.top_level[self.lambdas[lam].path])

    def _vertex_tree(self):
        if "all" not in self._level_trees:
            from scipy.spatial import cKDTree

            self._level_trees["all"] = cKDTree(np.column_stack((self.tx, self.ty)))
        return self._level_trees["all"]

    def _covers_all(self, px: float, py: float, reach: float) -> bool:
        if "span" not in self._level_trees:
            self._level_trees["span"] = (float(self.tx.max()), float(self.ty.max()))
        sx, sy = self._level_trees["span"]
        return px - reach <= 0.0 and py - reach <= 0.0 and px + reach >= sx and py + reach >= sy

    def box_mid(self, node: int) -> np.ndarray:
        """Union of P_mid(c') over cells c' of levels ``i-10 .. i+10`` inside
        the square of half-side ``4 h^2`` cells around ``node``."""
        i, ix, iy = self.tree.cells[node]
        px, py = self.center(node)
        reach = BOX_HALF * side(i) + side(i + LOG_H)
        if self._covers_all(px, py, reach):
            cand = np.arange(self.inst.n, dtype=np.int64)
        else:
            cand = np.asarray(self._vertex_tree().query_ball_point((px, py), r=reach, p=np.inf), dtype=np.int64)
        j = self.lev[cand]
        cand = cand[(j >= i - LOG_H) & (j <= i + LOG_H)]
        j = self.lev[cand]
        # compare at level m = min(i - 1, j): the square spans
        # [2 ix + 1 - 2B, 2 ix + 1 + 2B] in level-(i - 1) cells
        m = np.minimum(i - 1, j)
        a = i - 1 - m
        b = j - m
        gx = self.cx[cand]
        gy = self.cy[cand]
        inside = (
            ((gx << b) >= ((2 * ix + 1 - 2 * BOX_HALF) << a))
            & (((gx + 1) << b) <= ((2 * ix + 1 + 2 * BOX_HALF) << a))
            & ((gy << b) >= ((2 * iy + 1 - 2 * BOX_HALF) << a))
            & (((gy + 1) << b) <= ((2 * iy + 1 + 2 * BOX_HALF) << a))
        )
        return np.sort(cand[inside])

    # --------------------------------------------------------- membership

    def classify_vertex(self, v: int) -> tuple[list[int], list[tuple[int, str]]]:
        """(Pi_v, [(lambda, "small" | "large" | "post")]) for one vertex."""
        out = []
        on_path = set(self.pi[v])
        for lam in self.lambdas:
            if lam.path in on_path:
                out.append((lam.id, "small"))
            if v in set(lam.large.tolist()):
                out.append((lam.id, "large"))
            if v in set(lam.post.tolist()):
                out.append((lam.id, "post"))
        return list(self.pi[v]), out

    def counters(self) -> dict:
        return {
            "nodes": len(self.tree),
            "paths": len(self.paths),
            "lambdas": len(self.lambdas),
            "small_sum": int(sum(len(self.small[l.path]) for l in self.lambdas)),
            "large_sum": int(sum(len(l.large) + len(l.post) for l in self.lambdas)),
        }


# ------------------------------------------------------------------ builders

def build_quadtree(inst: DiskInstance) -> ArbitraryIndex:
    """Anchor the grid, place every vertex in ``c_v`` and build the tree with
    its canonical paths, ``Pi_v`` and the per-path small sets."""
    x0 = float(inst.xs.min())
    y0 = float(inst.ys.min())
    tx = inst.xs - x0
    ty = inst.ys - y0
    lev = mid_level(inst.rs)
    span = max(float(tx.max()), float(ty.max()), 1.0)
    if span / side(int(lev.min()) - 1) >= 2.0 ** 50:
        raise InstanceError("coordinate spread too large relative to the smallest radius")
    cx = np.empty(inst.n, dtype=np.int64)
    cy = np.empty(inst.n, dtype=np.int64)
    for i in np.unique(lev).tolist():
        sel = lev == i
        cx[sel] = np.floor(tx[sel] / side(i)).astype(np.int64)
        cy[sel] = np.floor(ty[sel] / side(i)).astype(np.int64)
    cell = [(int(l), int(a), int(b)) for l, a, b in zip(lev.tolist(), cx.tolist(), cy.tolist())]
    cbar = [ancestor(c, c[0] + LOG_H) for c in cell]
    tree = build_tree(cell + cbar)
    paths = build_paths(tree)
    mid_node = np.array([tree.node_of[c] for c in cell], dtype=np.int64)
    cbar_node = np.array([tree.node_of[c] for c in cbar], dtype=np.int64)
    order = np.argsort(mid_node, kind="stable")
    starts = np.flatnonzero(np.r_[True, mid_node[order][1:] != mid_node[order][:-1]])
    members = {
        int(mid_node[order[a]]): np.sort(order[a:b])
        for a, b in zip(starts.tolist(), np.r_[starts[1:], inst.n].tolist())
    }
    cover_cache: dict[int, list[int]] = {}
    pi = []
    buckets: list[list[int]] = [[] for _ in range(len(paths))]
    for v in range(inst.n):
        node = int(cbar_node[v])
        cov = cover_cache.get(node)
        if cov is None:
            cov = paths.cover(tree, node)
            cover_cache[node] = cov
        pi.append(cov)
        for p in cov:
            buckets[p].append(v)
    small = [np.array(b, dtype=np.int64) for b in buckets]
    return ArbitraryIndex(inst, x0, y0, tx, ty, lev, cell, cx, cy, tree, paths, mid_node, cbar_node, members, pi, small)


def _crossings(index: ArbitraryIndex, levels: list[int]) -> dict[int, tuple[list[list[int]], np.ndarray]]:
    """Per level L: the tree nodes whose root chain passes level L at them
    (node level <= L < parent level), as the canonical paths through each
    node that can pair with a level-L vertex, and the level-L ancestor cells.

    A path can pair with a level-L vertex only if its small set is nonempty
    and its lowest level <= L <= its top level; nodes without such a path
    are dropped.
    """
    tree, paths = index.tree, index.paths
    usable = [
        (len(index.small[p]) > 0, tree.level(paths.low[p]), paths.top_level[p]) for p in range(len(paths))
    ]
    out: dict[int, tuple[list, list]] = {L: ([], []) for L in levels}
    for node in range(len(tree)):
        l = tree.level(node)
        par = tree.parent[node]
        top = tree.level(par) - 1 if par >= 0 else l
        through = [p for p in paths.containing[node] if usable[p][0]]
        if not through:
            continue
        for L in levels:
            if l <= L <= top:
                ok = [p for p in through if usable[p][1] <= L <= usable[p][2]]
                if ok:
                    groups, cells = out[L]
                    groups.append(ok)
                    cells.append(ancestor(tree.cells[node], L)[1:])
    return {L: (groups, np.array(cells, dtype=np.float64).reshape(-1, 2)) for L, (groups, cells) in out.items()}


def build_lambdas(index: ArbitraryIndex) -> None:
    """Materialise every (canonical path, cone) pair that has both a small
    side and a large or post member, filling ``index.lambdas``."""
    from scipy.spatial import cKDTree

    inst, tree, paths = index.inst, index.tree, index.paths
    levels = sorted(set(index.lev.tolist()))
    found: dict[tuple[int, int], tuple[list[int], list[int]]] = {}
    for L, (groups, cells) in _crossings(index, levels).items():
        if not groups:
            continue
        kd = cKDTree(cells)
        us = np.flatnonzero(index.lev == L)
        pts = np.column_stack((index.cx[us], index.cy[us])).astype(np.float64)
        hits = kd.query_ball_point(pts, r=CONE_SLACK, p=np.inf)
        for u, hit in zip(us.tolist(), hits):
            ru = float(inst.rs[u])
            ux, uy = float(index.tx[u]), float(index.ty[u])
            for k in hit:
                for p in groups[k]:
                    c = paths.low[p]
                    lc = tree.level(c)
                    top = paths.top_level[p]
                    dc = math.ldexp(1.0, lc)
                    if not (math.ldexp(H, lc) <= ru < math.ldexp(2 * H, top)):
                        continue
                    px, py = index.center(c)
                    dx, dy = ux - px, uy - py
                    d = math.sqrt(dx * dx + dy * dy)
                    if d > 3.0 * H * math.ldexp(1.0, top):
                        continue
                    if abs(ru - d) < 5.0 * dc:
                        kind = 0
                    elif 5.0 * dc <= ru - d:
                        kind = 1
                    else:
                        continue
                    key = (p, cone_index(dx, dy))
                    found.setdefault(key, ([], []))[kind].append(u)
    index.lambdas = []
    index.lam_of = {}
    for (p, sector) in sorted(found):
        large, post = found[(p, sector)]
        lam = LambdaPair(
            len(index.lambdas), p, sector, tree.level(paths.low[p]),
            np.array(sorted(large), dtype=np.int64), np.array(sorted(post), dtype=np.int64),
        )
        index.lam_of[(p, sector)] = lam.id
        index.lambdas.append(lam)


def compute_adjacency_tables(index: ArbitraryIndex) -> None:
    """``L1``, ``L2`` and ``v(lambda)`` (smallest adjacent large disk of every
    small member, aligned with ``index.small_of(lambda)``)."""
    inst = index.inst
    index.L1 = [[] for _ in range(inst.n)]
    index.L2 = [[] for _ in range(inst.n)]
    index.vlam = []
    for lam in index.lambdas:
        S = index.small[lam.path]
        vl = first_by_radius(inst, S, lam.large)
        index.vlam.append(vl)
        for v in S[vl >= 0].tolist():
            index.L1[v].append(lam.id)
        if len(lam.large):
            back = first_by_radius(inst, lam.large, S)
            for u in lam.large[back >= 0].tolist():
                index.L2[u].append(lam.id)


def build_index(inst: DiskInstance) -> ArbitraryIndex:
    index = build_quadtree(inst)
    build_lambdas(index)
    compute_adjacency_tables(index)
    return index
