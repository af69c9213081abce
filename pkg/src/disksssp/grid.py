"""Hierarchical grid for instances with a bounded radius ratio.

A level-``i`` cell is a half-open square with diagonal ``2**i`` (side
``2**i / sqrt(2)``) anchored at the origin; a point belongs to cell
``(i, floor(x / side), floor(y / side))``.  Because ``side(i - 1)`` is exactly
``side(i) / 2`` in floating point, the cells of consecutive levels nest
exactly.

``c_v`` is the cell of ``v`` at the level with ``8|c| <= r_v < 16|c|``;
``v`` is *small* in every cell containing it at a higher level.

The neighbourhood ``boxplus(c)`` of a level-``i`` cell holds the cells of
levels ``i-1 .. i+1`` inside the block of level-``i`` cells within 69 index
steps of ``c`` (a square of diagonal ``139|c|``).  A regular edge at ``c`` is
shorter than ``48|c|``, about 67.9 cell sides, so its other end lies at most
68 steps away and a level-``(i+1)`` cell around it at most 69.  All
containment tests below are integer comparisons.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .core import DiskInstance

SQRT_HALF = math.sqrt(0.5)
BOX_REACH = 69  # level-i cells on each side of c inside its square


def side(level: int) -> float:
    return math.ldexp(SQRT_HALF, level)


def mid_level(r) -> np.ndarray:
    """Level ``i`` with ``8 * 2**i <= r < 16 * 2**i`` (exact, via the exponent)."""
    _, e = np.frexp(np.asarray(r, dtype=np.float64) / 8.0)
    return (e - 1).astype(np.int64)


def cell_index(xs, ys, level: int) -> tuple[np.ndarray, np.ndarray]:
    s = side(level)
    return (np.floor(np.asarray(xs) / s).astype(np.int64), np.floor(np.asarray(ys) / s).astype(np.int64))


def upper_range(ix: int) -> tuple[int, int]:
    """Level-(i+1) indices whose cells lie inside the square of level-i cell ``ix``."""
    return -((BOX_REACH - ix) // 2), (ix + BOX_REACH - 1) // 2


@dataclass
class GridIndex:
    inst: DiskInstance
    lev: np.ndarray  # P_mid level of every vertex
    cx: np.ndarray  # cell coordinates at that level
    cy: np.ndarray
    cell_of: np.ndarray  # vertex -> mid-cell id
    cells: list[tuple[int, int, int]]  # mid-cell id -> (level, ix, iy)
    members: list[np.ndarray]  # mid-cell id -> P_mid ids, ascending
    cell_id: dict[tuple[int, int, int], int]
    L: list[np.ndarray] = field(default_factory=list)
    _level_trees: dict = field(default_factory=dict, repr=False)

    @property
    def i_min(self) -> int:
        return int(self.lev.min())

    @property
    def i_max(self) -> int:
        return int(self.lev.max()) + 1

    def diameter(self, c: int) -> float:
        return math.ldexp(1.0, self.cells[c][0])

    # -------------------------------------------------------------- regions

    def _level_tree(self, i: int):
        """Vertices with mid level <= i+1, indexed by their level-i cell."""
        hit = self._level_trees.get(i)
        if hit is None:
            ids = np.flatnonzero(self.lev <= i + 1)
            gx, gy = cell_index(self.inst.xs[ids], self.inst.ys[ids], i)
            tree = cKDTree(np.column_stack((gx, gy)).astype(np.float64)) if len(ids) else None
            hit = (ids, gx, gy, tree)
            self._level_trees[i] = hit
        return hit

    def _box_candidates(self, c: int) -> tuple[np.ndarray, np.ndarray]:
        """(ids, in_upper) for vertices of level <= i+1 in the square of c,
        ``in_upper`` marking those whose level-(i+1) cell also lies inside."""
        i, ix, iy = self.cells[c]
        ids, gx, gy, tree = self._level_tree(i)
        sel = np.asarray(tree.query_ball_point((float(ix), float(iy)), r=BOX_REACH, p=np.inf), dtype=np.int64)
        sel.sort()
        lo_x, hi_x = upper_range(ix)
        lo_y, hi_y = upper_range(iy)
        ux = gx[sel] >> 1
        uy = gy[sel] >> 1
        upper = (ux >= lo_x) & (ux <= hi_x) & (uy >= lo_y) & (uy <= hi_y)
        return ids[sel], upper

    def box_mid(self, c: int) -> np.ndarray:
        """Union of P_mid over boxplus(c)."""
        ids, upper = self._box_candidates(c)
        i = self.cells[c][0]
        lv = self.lev[ids]
        return ids[((lv == i - 1) | (lv == i)) | ((lv == i + 1) & upper)]

    def box_small(self, c: int) -> np.ndarray:
        """Union of P_small over boxplus(c)."""
        ids, upper = self._box_candidates(c)
        i = self.cells[c][0]
        lv = self.lev[ids]
        return ids[(lv <= i - 1) | ((lv == i) & upper)]

    def box_all(self, c: int) -> np.ndarray:
        """Union of P_mid and P_small over boxplus(c)."""
        ids, upper = self._box_candidates(c)
        i = self.cells[c][0]
        lv = self.lev[ids]
        return ids[(lv <= i) | ((lv == i + 1) & upper)]

    # ----------------------------------------------- explicit cell views

    def containing_cell(self, v: int, level: int) -> tuple[int, int, int]:
        gx, gy = cell_index(self.inst.xs[v], self.inst.ys[v], level)
        return (level, int(gx), int(gy))

    def p_small(self, cell: tuple[int, int, int]) -> np.ndarray:
        level, ix, iy = cell
        ids = np.flatnonzero(self.lev < level)
        gx, gy = cell_index(self.inst.xs[ids], self.inst.ys[ids], level)
        return ids[(gx == ix) & (gy == iy)]

    def p_mid(self, cell: tuple[int, int, int]) -> np.ndarray:
        c = self.cell_id.get(tuple(cell))
        return self.members[c] if c is not None else np.empty(0, dtype=np.int64)


def build_grid(inst: DiskInstance) -> GridIndex:
    lev = mid_level(inst.rs)
    cx = np.empty(inst.n, dtype=np.int64)
    cy = np.empty(inst.n, dtype=np.int64)
    for i in np.unique(lev):
        sel = lev == i
        cx[sel], cy[sel] = cell_index(inst.xs[sel], inst.ys[sel], int(i))
    order = np.lexsort((np.arange(inst.n), cy, cx, lev))
    key = np.column_stack((lev, cx, cy))[order]
    starts = np.flatnonzero(np.r_[True, np.any(key[1:] != key[:-1], axis=1)])
    bounds = np.r_[starts, inst.n]
    cells: list[tuple[int, int, int]] = []
    members: list[np.ndarray] = []
    cell_of = np.empty(inst.n, dtype=np.int64)
    for k in range(len(starts)):
        grp = np.sort(order[bounds[k]:bounds[k + 1]])
        cells.append(tuple(int(t) for t in key[starts[k]]))
        members.append(grp)
        cell_of[grp] = k
    cell_id = {c: k for k, c in enumerate(cells)}
    grid = GridIndex(inst, lev, cx, cy, cell_of, cells, members, cell_id)
    grid.L = compute_L(grid)
    return grid


def boxplus(grid: GridIndex, c: int) -> list[tuple[int, int, int]]:
    """Nonempty cells (P_mid or P_small) of levels i-1..i+1 inside the square of ``c``."""
    i, ix, iy = grid.cells[c]
    out: set[tuple[int, int, int]] = set()
    for v in grid.box_all(c).tolist():
        for level in (i - 1, i, i + 1):
            if grid.lev[v] > level:
                continue
            cell = grid.containing_cell(v, level)
            if _inside_square(cell, i, ix, iy):
                out.add(cell)
    return sorted(out)


def _inside_square(cell, i, ix, iy) -> bool:
    level, jx, jy = cell
    if level == i:
        return abs(jx - ix) <= BOX_REACH and abs(jy - iy) <= BOX_REACH
    if level == i - 1:
        return abs((jx >> 1) - ix) <= BOX_REACH and abs((jy >> 1) - iy) <= BOX_REACH
    lo_x, hi_x = upper_range(ix)
    lo_y, hi_y = upper_range(iy)
    return lo_x <= jx <= hi_x and lo_y <= jy <= hi_y


def neighbor_candidates(grid: GridIndex) -> list[np.ndarray]:
    """For every mid cell c, the mid cells c' with ``2|c| <= |c'|`` whose
    square contains c."""
    out: list[list[int]] = [[] for _ in grid.cells]
    levels = np.array([c[0] for c in grid.cells], dtype=np.int64)
    ixs = np.array([c[1] for c in grid.cells], dtype=np.int64)
    iys = np.array([c[2] for c in grid.cells], dtype=np.int64)
    by_level = {int(l): np.flatnonzero(levels == l) for l in np.unique(levels)}
    trees = {l: cKDTree(np.column_stack((ixs[ids], iys[ids])).astype(np.float64)) for l, ids in by_level.items()}
    for lo, low_ids in by_level.items():
        for hi, high_ids in by_level.items():
            if hi <= lo:
                continue
            shift = hi - lo
            anc = np.column_stack((ixs[low_ids] >> shift, iys[low_ids] >> shift)).astype(np.float64)
            hits = trees[hi].query_ball_point(anc, r=BOX_REACH, p=np.inf)
            for c, h in zip(low_ids.tolist(), hits):
                out[c].extend(high_ids[h].tolist())
    return [np.array(sorted(o), dtype=np.int64) for o in out]


def _adjacent_cells(inst: DiskInstance, a: np.ndarray, cells: np.ndarray, members: list[np.ndarray]) -> np.ndarray:
    """The cells of ``cells`` with at least one member adjacent to a member of ``a``."""
    if len(cells) == 0:
        return np.empty(0, dtype=np.int64)
    parts = [members[d] for d in cells.tolist()]
    b = np.concatenate(parts)
    owner = np.repeat(np.arange(len(cells)), [len(q) for q in parts])
    hit = np.zeros(len(b), dtype=bool)
    step = max(1, (1 << 20) // len(b))
    for k in range(0, len(a), step):
        aa = a[k:k + step]
        dx = inst.xs[aa][:, None] - inst.xs[b][None, :]
        dy = inst.ys[aa][:, None] - inst.ys[b][None, :]
        hit |= np.any(np.sqrt(dx * dx + dy * dy) <= inst.rs[aa][:, None] + inst.rs[b][None, :], axis=0)
    return cells[np.unique(owner[hit])]


def compute_L(grid: GridIndex) -> list[np.ndarray]:
    """``L(c)``: higher-level mid cells sharing an edge with P_mid(c); empty for the source cell."""
    inst = grid.inst
    cand = neighbor_candidates(grid)
    src_cell = grid.cell_of[inst.source]
    L = []
    for c, cs in enumerate(cand):
        if c == src_cell:
            L.append(np.empty(0, dtype=np.int64))
            continue
        L.append(_adjacent_cells(inst, grid.members[c], cs, grid.members))
    return L
