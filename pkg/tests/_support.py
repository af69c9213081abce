"""Shared helpers for the test suite: instance suites, brute-force edges and
structural property checkers.  Every checker returns a list of violation
strings so callers can both assert and count."""
from __future__ import annotations

import math

import numpy as np

from disksssp.core import DiskInstance, SsspResult, tolerance, validate_result
from disksssp.generate import KINDS, GeneratorSpec, generate
from disksssp.grid import GridIndex
from disksssp.oracle import is_leaf
from disksssp.quadtree import H, ArbitraryIndex

BOUNDED_PSI = (1.0, 4.0, 64.0, 1024.0)


def bounded_suite(count: int, seed: int, n_max: int = 300):
    """Mixed-kind instances with psi drawn from ``BOUNDED_PSI``."""
    rng = np.random.default_rng(seed)
    for k in range(count):
        n = int(rng.integers(2, n_max + 1))
        spec = GeneratorSpec(KINDS[k % 4], n, BOUNDED_PSI[(k // 4) % 4], int(rng.integers(1 << 62)))
        yield spec, generate(spec)


def arbitrary_suite(count: int, seed: int, n_max: int = 300):
    """Generator instances with psi up to 2^30, alternating with
    ``touching_giants`` instances that force many irregular edges."""
    rng = np.random.default_rng(seed)
    for k in range(count):
        n = int(rng.integers(2, n_max + 1))
        sub = int(rng.integers(1 << 62))
        if k % 2:
            yield ("giants", n, sub), touching_giants(sub, n)
        else:
            psi = 2.0 ** float(rng.uniform(0.0, 30.0))
            spec = GeneratorSpec(KINDS[(k // 2) % 4], n, psi, sub)
            yield spec, generate(spec)


def touching_giants(seed: int, n: int = 120, top_exp: float = 30.0) -> DiskInstance:
    """Small disks in a 50x50 patch plus huge disks whose boundary passes
    through the patch (tangent, slightly overlapping or swallowing it)."""
    rng = np.random.default_rng(seed)
    xs, ys, rs = [], [], []
    for _ in range(n):
        if rng.integers(0, 3) == 0:
            xs.append(rng.uniform(0, 50))
            ys.append(rng.uniform(0, 50))
            rs.append(2.0 ** rng.uniform(0, 4))
            continue
        R = 2.0 ** rng.uniform(10, top_exp)
        ang = rng.uniform(0, 2 * np.pi)
        tx, ty = rng.uniform(0, 50, 2)
        d = R * rng.choice([rng.uniform(0.98, 1.02), rng.uniform(0, 1.0), rng.uniform(1.0, 1.0001)])
        xs.append(tx + d * np.cos(ang))
        ys.append(ty + d * np.sin(ang))
        rs.append(R)
    return DiskInstance(np.array(xs), np.array(ys), np.array(rs), 0)


# ------------------------------------------------------------ brute force

def all_edges(inst: DiskInstance) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(u, v, |uv|) for every unordered edge, u < v."""
    dx = inst.xs[:, None] - inst.xs[None, :]
    dy = inst.ys[:, None] - inst.ys[None, :]
    w = np.sqrt(dx * dx + dy * dy)
    adj = np.triu(w <= inst.rs[:, None] + inst.rs[None, :], k=1)
    u, v = np.nonzero(adj)
    return u, v, w[u, v]


def oracle_mismatches(inst: DiskInstance, res: SsspResult, oracle: SsspResult) -> list[str]:
    out = []
    for v in range(inst.n):
        a, b = float(oracle.dist[v]), float(res.dist[v])
        if math.isinf(a) or math.isinf(b):
            if a != b:
                out.append(f"vertex {v}: dist {b!r}, oracle {a!r}")
        elif abs(a - b) > tolerance(a):
            out.append(f"vertex {v}: dist {b!r}, oracle {a!r}")
    out.extend(validate_result(inst, res, full=True))
    return out


# ------------------------------------------------------- grid properties

def grid_cover_violations(grid: GridIndex) -> list[str]:
    """Regular and irregular edge covers plus the ``L(c)`` superset rule."""
    inst = grid.inst
    out = []
    small = {c: set(grid.box_small(c).tolist()) for c in range(len(grid.cells))}
    mid = {c: set(grid.box_mid(c).tolist()) for c in range(len(grid.cells))}
    L = [set(x.tolist()) for x in grid.L]
    src_cell = int(grid.cell_of[inst.source])
    for u, v, _ in zip(*all_edges(inst)):
        u, v = int(u), int(v)
        if inst.rs[u] > inst.rs[v]:
            u, v = v, u
        cu, cv = int(grid.cell_of[u]), int(grid.cell_of[v])
        if 2 * inst.rs[u] > inst.rs[v]:
            # regular: each endpoint is a mid vertex of the other's neighbourhood
            if u not in mid[cv] or v not in mid[cu]:
                out.append(f"regular edge ({u},{v}) not covered")
        else:
            # irregular: u is small in some cell of boxplus(c_v)
            if u not in small[cv]:
                out.append(f"irregular edge ({u},{v}) not covered")
        if grid.lev[v] > grid.lev[u] and cu != src_cell and cv not in L[cu]:
            out.append(f"L superset: cell {cv} missing from L({cu})")
    return out


def distance_difference_violations(grid: GridIndex, d: np.ndarray) -> list[str]:
    """Small neighbours of a cell have oracle distances within 65|c|."""
    inst = grid.inst
    out = []
    small_nb: dict[int, list[int]] = {}
    for u, v, _ in zip(*all_edges(inst)):
        u, v = int(u), int(v)
        for a, b in ((u, v), (v, u)):
            # a is a small neighbour of c_b when 2 r_a <= r_b
            if 2 * inst.rs[a] <= inst.rs[b]:
                small_nb.setdefault(int(grid.cell_of[b]), []).append(a)
    for c, nb in small_nb.items():
        vals = d[nb]
        vals = vals[np.isfinite(vals)]
        if len(vals) and vals.max() - vals.min() > 65.0 * grid.diameter(c) + tolerance(vals.max()):
            out.append(f"cell {c}: small-neighbour spread {vals.max() - vals.min()!r} > 65|c|")
    return out


# ---------------------------------------------------- quadtree properties

def lambda_memberships(index: ArbitraryIndex):
    small_l: dict[int, set[int]] = {}
    for lam in index.lambdas:
        for v in index.small[lam.path].tolist():
            small_l.setdefault(v, set()).add(lam.id)
    large_l: dict[int, set[int]] = {}
    post_l: dict[int, set[int]] = {}
    for lam in index.lambdas:
        for u in lam.large.tolist():
            large_l.setdefault(u, set()).add(lam.id)
        for u in lam.post.tolist():
            post_l.setdefault(u, set()).add(lam.id)
    return small_l, large_l, post_l


def quadtree_cover_violations(index: ArbitraryIndex) -> list[str]:
    """Regular edges land in the neighbourhood of ``c_v``; irregular edges
    meet in some pair, with the large end in ``P_large`` unless redundant."""
    inst = index.inst
    out = []
    small_l, large_l, post_l = lambda_memberships(index)
    boxes: dict[int, set[int]] = {}

    def box(node: int) -> set[int]:
        if node not in boxes:
            boxes[node] = set(index.box_mid(node).tolist())
        return boxes[node]

    for a, b, w in zip(*all_edges(inst)):
        a, b = int(a), int(b)
        v, u = (a, b) if inst.rs[a] <= inst.rs[b] else (b, a)  # v small end, u large end
        if inst.rs[u] < H * inst.rs[v]:
            if u not in box(int(index.mid_node[v])) or v not in box(int(index.mid_node[u])):
                out.append(f"regular edge ({v},{u}) not covered")
            continue
        S = small_l.get(v, set())
        if not S & (large_l.get(u, set()) | post_l.get(u, set())):
            out.append(f"irregular edge ({v},{u}) in no pair")
        elif w >= abs(inst.rs[u] - inst.rs[v]) and not S & large_l.get(u, set()):
            out.append(f"non-redundant irregular edge ({v},{u}) without a large pair")
    return out


def clique_violations(index: ArbitraryIndex, rng: np.random.Generator, samples: int = 1000) -> list[str]:
    inst = index.inst
    out = []
    for lam in index.lambdas:
        L = lam.large
        if len(L) < 2:
            continue
        a = L[rng.integers(0, len(L), samples)]
        b = L[rng.integers(0, len(L), samples)]
        dx = inst.xs[a] - inst.xs[b]
        dy = inst.ys[a] - inst.ys[b]
        bad = np.sqrt(dx * dx + dy * dy) > inst.rs[a] + inst.rs[b]
        if bad.any():
            out.append(f"pair {lam.id}: large members {a[bad][0]},{b[bad][0]} not adjacent")
    return out


def piece_bound_violations(index: ArbitraryIndex) -> list[str]:
    N = len(index.tree)
    bound = 2 * math.ceil(math.log2(max(N, 2))) + 2
    worst = max(len(p) for p in index.pi)
    return [] if worst <= bound else [f"{worst} canonical pieces > {bound}"]


def vlam_violations(index: ArbitraryIndex) -> list[str]:
    """``v(lambda)`` equals the brute-force smallest adjacent large member."""
    inst = index.inst
    out = []
    for lam in index.lambdas:
        S = index.small[lam.path]
        L = lam.large
        got = index.vlam[lam.id]
        for k, v in enumerate(S.tolist()):
            want = -1
            if len(L):
                dx = inst.xs[L] - inst.xs[v]
                dy = inst.ys[L] - inst.ys[v]
                adj = L[np.sqrt(dx * dx + dy * dy) <= inst.rs[L] + inst.rs[v]]
                if len(adj):
                    want = int(adj[np.lexsort((adj, inst.rs[adj]))[0]])
            if int(got[k]) != want:
                out.append(f"pair {lam.id}, vertex {v}: v(lambda) {int(got[k])} != {want}")
    return out


def alarm_down_violations(index: ArbitraryIndex, oracle: SsspResult) -> list[str]:
    """For large v, v' (r_v > r_v') and small u, u' of one pair, with vu a
    tree edge and v'u' an edge, the large predecessor w of u' satisfies
    d(w) < d(v) + r_v - 6|c|."""
    inst, d, prev = index.inst, oracle.dist, oracle.prev
    out = []
    for lam in index.lambdas:
        L, S = lam.large, index.small[lam.path]
        if len(L) < 2 or len(S) == 0:
            continue
        dc = math.ldexp(1.0, lam.level)
        Lset = set(L.tolist())
        # u' with a large predecessor w in this pair
        targets = [(up, int(prev[up])) for up in S.tolist() if int(prev[up]) in Lset]
        if not targets:
            continue
        for u in S.tolist():
            v = int(prev[u])
            if v not in Lset:
                continue
            limit = d[v] + inst.rs[v] - 6.0 * dc
            for up, w in targets:
                # some v' in L with r_v' < r_v adjacent to u'
                dx = inst.xs[L] - inst.xs[up]
                dy = inst.ys[L] - inst.ys[up]
                adj = (np.sqrt(dx * dx + dy * dy) <= inst.rs[L] + inst.rs[up]) & (inst.rs[L] < inst.rs[v])
                if adj.any() and not d[w] < limit:
                    out.append(f"pair {lam.id}: d({w})={d[w]!r} >= d({v})+r-6|c|={limit!r}")
    return out


def small_to_large_violations(inst: DiskInstance, oracle: SsspResult) -> list[str]:
    """Tree edge (u, v), u = prev(v) != s: |uv| >= |r_v - r_u| unless
    r_v < r_u and v is a leaf.  Also, an irregular tree edge into a non-leaf
    has |uv| >= (1 - 1/h) max(r_u, r_v)."""
    leaf = is_leaf(oracle)
    out = []
    for v, u in enumerate(oracle.prev.tolist()):
        if u < 0 or u == inst.source:
            continue
        w = inst.dist(u, v)
        ru, rv = float(inst.rs[u]), float(inst.rs[v])
        if w < abs(rv - ru) and not (rv < ru and leaf[v]):
            out.append(f"tree edge ({u},{v}): |uv|={w!r} < |r_v - r_u|={abs(rv - ru)!r}")
        big, small = max(ru, rv), min(ru, rv)
        if big >= H * small and not leaf[v] and w < (1.0 - 1.0 / H) * big:
            out.append(f"irregular tree edge ({u},{v}) into a non-leaf is too short")
    return out
