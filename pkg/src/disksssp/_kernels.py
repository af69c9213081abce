"""Numba kernels shared by the weighted nearest-neighbour index and the Update tree.

Layout.  A tree over ``m`` sites sorted by some key is a segment tree built by
recursive halving of the position range ``[0, m)``.  Every segment-tree node at
depth ``d`` owns the slice ``[lo, hi)`` of row ``d`` of the site arrays
(``X, Y, W1, W2, G``); inside that slice the sites are permuted into an
implicit kd-tree (median split on the wider axis, buckets of ``LEAF`` sites).
A kd node covering ``[a, b)`` keeps its bounding box and the minima of both
weights at index ``(a + b) // 2`` of the stats rows -- split indices are unique
among the kd nodes of one depth, so one row per depth suffices.

Weights: ``W1 = -r`` (adjacency descent), ``W2`` is the additive weight of the
min query (``dist`` for Update trees).  Distances are ``sqrt(dx*dx + dy*dy)``
everywhere so pruning bounds and scans round the same way as the oracle.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

LEAF = 8
STACK = 512
BIG_ID = 1 << 62


@njit(cache=True)
def depth_count(m):
    d = 1
    size = 1
    while size < m:
        size *= 2
        d += 1
    return d


@njit(cache=True)
def _swap(X, Y, W1, W2, G, d, i, j):
    X[d, i], X[d, j] = X[d, j], X[d, i]
    Y[d, i], Y[d, j] = Y[d, j], Y[d, i]
    W1[d, i], W1[d, j] = W1[d, j], W1[d, i]
    W2[d, i], W2[d, j] = W2[d, j], W2[d, i]
    G[d, i], G[d, j] = G[d, j], G[d, i]


@njit(cache=True)
def _select(X, Y, W1, W2, G, d, a, b, k, axis):
    K = X if axis == 0 else Y
    lo = a
    hi = b - 1
    while hi > lo:
        mid = (lo + hi) // 2
        p0 = K[d, lo]
        p1 = K[d, mid]
        p2 = K[d, hi]
        if p0 > p1:
            p0, p1 = p1, p0
        if p1 > p2:
            p1 = p2
            if p0 > p1:
                p1 = p0
        pv = p1
        i = lo
        j = hi
        while i <= j:
            while K[d, i] < pv:
                i += 1
            while K[d, j] > pv:
                j -= 1
            if i <= j:
                _swap(X, Y, W1, W2, G, d, i, j)
                i += 1
                j -= 1
        if k <= j:
            hi = j
        elif k >= i:
            lo = i
        else:
            break


@njit(cache=True)
def _kd_build(X, Y, W1, W2, G, BX0, BX1, BY0, BY1, M1, M2, d, lo, hi, stack):
    top = 0
    stack[0] = lo
    stack[1] = hi
    top = 1
    while top > 0:
        top -= 1
        a = stack[2 * top]
        b = stack[2 * top + 1]
        if b - a <= LEAF:
            continue
        x0 = X[d, a]
        x1 = x0
        y0 = Y[d, a]
        y1 = y0
        m1 = W1[d, a]
        m2 = W2[d, a]
        for i in range(a + 1, b):
            x = X[d, i]
            y = Y[d, i]
            if x < x0:
                x0 = x
            elif x > x1:
                x1 = x
            if y < y0:
                y0 = y
            elif y > y1:
                y1 = y
            if W1[d, i] < m1:
                m1 = W1[d, i]
            if W2[d, i] < m2:
                m2 = W2[d, i]
        mid = (a + b) // 2
        BX0[d, mid] = x0
        BX1[d, mid] = x1
        BY0[d, mid] = y0
        BY1[d, mid] = y1
        M1[d, mid] = m1
        M2[d, mid] = m2
        axis = 0 if (x1 - x0) >= (y1 - y0) else 1
        _select(X, Y, W1, W2, G, d, a, b, mid, axis)
        stack[2 * top] = a
        stack[2 * top + 1] = mid
        top += 1
        stack[2 * top] = mid
        stack[2 * top + 1] = b
        top += 1


@njit(cache=True)
def build_layers(xs, ys, w1, w2, gid):
    """Build the per-depth kd layouts for sites given in sorted (leaf) order."""
    m = xs.shape[0]
    D = depth_count(m)
    X = np.empty((D, m))
    Y = np.empty((D, m))
    W1 = np.empty((D, m))
    W2 = np.empty((D, m))
    G = np.empty((D, m), dtype=np.int64)
    BX0 = np.zeros((D, m))
    BX1 = np.zeros((D, m))
    BY0 = np.zeros((D, m))
    BY1 = np.zeros((D, m))
    M1 = np.zeros((D, m))
    M2 = np.zeros((D, m))
    kd_stack = np.empty(2 * STACK, dtype=np.int64)
    seg = np.empty(3 * STACK, dtype=np.int64)
    seg[0] = 0
    seg[1] = m
    seg[2] = 0
    top = 1
    while top > 0:
        top -= 1
        lo = seg[3 * top]
        hi = seg[3 * top + 1]
        d = seg[3 * top + 2]
        for i in range(lo, hi):
            X[d, i] = xs[i]
            Y[d, i] = ys[i]
            W1[d, i] = w1[i]
            W2[d, i] = w2[i]
            G[d, i] = gid[i]
        _kd_build(X, Y, W1, W2, G, BX0, BX1, BY0, BY1, M1, M2, d, lo, hi, kd_stack)
        if hi - lo > 1:
            mid = (lo + hi) // 2
            seg[3 * top] = lo
            seg[3 * top + 1] = mid
            seg[3 * top + 2] = d + 1
            top += 1
            seg[3 * top] = mid
            seg[3 * top + 1] = hi
            seg[3 * top + 2] = d + 1
            top += 1
    return X, Y, W1, W2, G, BX0, BX1, BY0, BY1, M1, M2


@njit(cache=True)
def _box_dist(qx, qy, x0, x1, y0, y1):
    dx = 0.0
    dy = 0.0
    if qx < x0:
        dx = x0 - qx
    elif qx > x1:
        dx = qx - x1
    if qy < y0:
        dy = y0 - qy
    elif qy > y1:
        dy = qy - y1
    return math.sqrt(dx * dx + dy * dy)


@njit(cache=True)
def any_adjacent(X, Y, W1, BX0, BX1, BY0, BY1, M1, d, lo, hi, qx, qy, qr, stack):
    """True iff some site of the node has ``|q s| <= r_s + qr`` (W1 = -r)."""
    stack[0] = lo
    stack[1] = hi
    top = 1
    while top > 0:
        top -= 1
        a = stack[2 * top]
        b = stack[2 * top + 1]
        if b - a <= LEAF:
            for i in range(a, b):
                dx = qx - X[d, i]
                dy = qy - Y[d, i]
                if math.sqrt(dx * dx + dy * dy) <= -W1[d, i] + qr:
                    return True
            continue
        mid = (a + b) // 2
        bd = _box_dist(qx, qy, BX0[d, mid], BX1[d, mid], BY0[d, mid], BY1[d, mid])
        if bd > -M1[d, mid] + qr:
            continue
        stack[2 * top] = a
        stack[2 * top + 1] = mid
        top += 1
        stack[2 * top] = mid
        stack[2 * top + 1] = b
        top += 1
    return False


@njit(cache=True)
def build_excess(X, Y, W2, m, rx, ry):
    """Per kd node, the minimum of ``W2 - |ref s|`` over its sites.

    Mirrors the node layout of ``build_layers``; used by the reference-point
    bound in ``min_weighted``.
    """
    D = X.shape[0]
    E = np.zeros((D, m))
    kd = np.empty(2 * STACK, dtype=np.int64)
    seg = np.empty(3 * STACK, dtype=np.int64)
    seg[0] = 0
    seg[1] = m
    seg[2] = 0
    top = 1
    while top > 0:
        top -= 1
        lo = seg[3 * top]
        hi = seg[3 * top + 1]
        d = seg[3 * top + 2]
        kd[0] = lo
        kd[1] = hi
        kt = 1
        while kt > 0:
            kt -= 1
            a = kd[2 * kt]
            b = kd[2 * kt + 1]
            if b - a <= LEAF:
                continue
            e = np.inf
            for i in range(a, b):
                dx = X[d, i] - rx
                dy = Y[d, i] - ry
                v = W2[d, i] - math.sqrt(dx * dx + dy * dy)
                if v < e:
                    e = v
            mid = (a + b) // 2
            E[d, mid] = e
            kd[2 * kt] = a
            kd[2 * kt + 1] = mid
            kt += 1
            kd[2 * kt] = mid
            kd[2 * kt + 1] = b
            kt += 1
        if hi - lo > 1:
            mid = (lo + hi) // 2
            seg[3 * top] = lo
            seg[3 * top + 1] = mid
            seg[3 * top + 2] = d + 1
            top += 1
            seg[3 * top] = mid
            seg[3 * top + 1] = hi
            seg[3 * top + 2] = d + 1
            top += 1
    return E


@njit(cache=True)
def _segment_hits_box(sx, sy, vx, vy, x0, x1, y0, y1):
    t0 = 0.0
    t1 = 1.0
    dx = vx - sx
    dy = vy - sy
    for k in range(4):
        if k == 0:
            p = -dx
            q = sx - x0
        elif k == 1:
            p = dx
            q = x1 - sx
        elif k == 2:
            p = -dy
            q = sy - y0
        else:
            p = dy
            q = y1 - sy
        if p == 0.0:
            if q < 0.0:
                return False
        else:
            t = q / p
            if p < 0.0:
                if t > t0:
                    t0 = t
            elif t < t1:
                t1 = t
            if t0 > t1:
                return False
    return True


@njit(cache=True)
def _edge_min(su, sw, vu, vw, c, w0, w1):
    """min over the edge {u = c, w in [w0, w1]} of |s p| + |p v| (u, w = axis coords)."""
    a = su - c
    b = vu - c
    if a * b > 0.0:
        b = -b  # reflect v across the line
    if a == b:
        w = 0.5 * (sw + vw)
    else:
        w = sw + (a / (a - b)) * (vw - sw)
    if w < w0:
        w = w0
    elif w > w1:
        w = w1
    d1u = su - c
    d1w = sw - w
    d2u = vu - c
    d2w = vw - w
    return math.sqrt(d1u * d1u + d1w * d1w) + math.sqrt(d2u * d2u + d2w * d2w)


@njit(cache=True)
def ellipse_min(sx, sy, vx, vy, dsv, x0, x1, y0, y1):
    """min over the box of |s p| + |p v|; ``dsv`` is |s v| as the caller computed it."""
    if _segment_hits_box(sx, sy, vx, vy, x0, x1, y0, y1):
        return dsv
    e = _edge_min(sx, sy, vx, vy, x0, y0, y1)
    e = min(e, _edge_min(sx, sy, vx, vy, x1, y0, y1))
    e = min(e, _edge_min(sy, sx, vy, vx, y0, x0, x1))
    e = min(e, _edge_min(sy, sx, vy, vx, y1, x0, x1))
    return e


@njit(cache=True)
def min_weighted(X, Y, W, G, BX0, BX1, BY0, BY1, M, E, use_ref, rx, ry, d, lo, hi, qx, qy, best, best_id, best_pos, stack):
    """Branch-and-bound min of ``|q s| + W[s]`` over a node, ties by site id.

    Starts from the incumbent ``(best, best_id)``; returns the improved triple
    ``(value, id, row position)``.  ``best_id < 0`` marks an incumbent that is
    only a bound (a site must beat it strictly), so subtrees whose lower bound
    reaches it are skipped; otherwise a subtree is skipped only when its lower
    bound is strictly above.

    The box bound (box distance + min weight) never exceeds a site's rounded
    value.  With ``use_ref`` the bound is raised to ``E + min_box(|ref p| +
    |p q|)`` (``E`` = min of ``W - |ref s|``), which holds in exact arithmetic
    and may be off by a few ulps in floating point.
    """
    dref = 0.0
    if use_ref:
        ex = qx - rx
        ey = qy - ry
        dref = math.sqrt(ex * ex + ey * ey)
    stack[0] = lo
    stack[1] = hi
    top = 1
    while top > 0:
        top -= 1
        a = stack[2 * top]
        b = stack[2 * top + 1]
        if b - a <= LEAF:
            for i in range(a, b):
                dx = qx - X[d, i]
                dy = qy - Y[d, i]
                val = math.sqrt(dx * dx + dy * dy) + W[d, i]
                if val < best or (val == best and G[d, i] < best_id):
                    best = val
                    best_id = G[d, i]
                    best_pos = i
            continue
        mid = (a + b) // 2
        lb = _box_dist(qx, qy, BX0[d, mid], BX1[d, mid], BY0[d, mid], BY1[d, mid]) + M[d, mid]
        if lb > best or (lb == best and best_id < 0):
            continue
        if use_ref:
            lb2 = E[d, mid] + ellipse_min(rx, ry, qx, qy, dref, BX0[d, mid], BX1[d, mid], BY0[d, mid], BY1[d, mid])
            if lb2 > best or (lb2 == best and best_id < 0):
                continue
        # visit the child with the smaller lower bound first (pushed last)
        la = (a + mid) // 2
        lb_left = lb
        lb_right = lb
        if mid - a > LEAF:
            lb_left = _box_dist(qx, qy, BX0[d, la], BX1[d, la], BY0[d, la], BY1[d, la]) + M[d, la]
        rb = (mid + b) // 2
        if b - mid > LEAF:
            lb_right = _box_dist(qx, qy, BX0[d, rb], BX1[d, rb], BY0[d, rb], BY1[d, rb]) + M[d, rb]
        if lb_left <= lb_right:
            stack[2 * top] = mid
            stack[2 * top + 1] = b
            top += 1
            stack[2 * top] = a
            stack[2 * top + 1] = mid
            top += 1
        else:
            stack[2 * top] = a
            stack[2 * top + 1] = mid
            top += 1
            stack[2 * top] = mid
            stack[2 * top + 1] = b
            top += 1
    return best, best_id, best_pos


@njit(cache=True)
def first_adjacent(X, Y, W1, BX0, BX1, BY0, BY1, M1, m, qx, qy, qr, stack):
    """Leftmost leaf position adjacent to the query disk, or -1."""
    if not any_adjacent(X, Y, W1, BX0, BX1, BY0, BY1, M1, 0, 0, m, qx, qy, qr, stack):
        return -1
    lo = 0
    hi = m
    d = 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if any_adjacent(X, Y, W1, BX0, BX1, BY0, BY1, M1, d + 1, lo, mid, qx, qy, qr, stack):
            hi = mid
        else:
            lo = mid
        d += 1
    return lo


@njit(cache=True)
def suffix_min(X, Y, W2, G, BX0, BX1, BY0, BY1, M2, E, use_ref, rx, ry, m, p, qx, qy, best, best_id, stack):
    """Min of ``|q s| + W2`` over leaf positions ``[p, m)`` via the canonical cover."""
    best_pos = -1
    best_d = -1
    lo = 0
    hi = m
    d = 0
    while True:
        if p <= lo:
            nb, nid, npos = min_weighted(X, Y, W2, G, BX0, BX1, BY0, BY1, M2, E, use_ref, rx, ry, d, lo, hi, qx, qy, best, best_id, -1, stack)
            if npos >= 0:
                best, best_id, best_pos, best_d = nb, nid, npos, d
            break
        if hi - lo <= 1:
            break
        mid = (lo + hi) // 2
        if p < mid:
            nb, nid, npos = min_weighted(X, Y, W2, G, BX0, BX1, BY0, BY1, M2, E, use_ref, rx, ry, d + 1, mid, hi, qx, qy, best, best_id, -1, stack)
            if npos >= 0:
                best, best_id, best_pos, best_d = nb, nid, npos, d + 1
            hi = mid
        else:
            lo = mid
        d += 1
    return best, best_id, best_pos, best_d


@njit(cache=True)
def relax_batch(X, Y, W1, W2, G, BX0, BX1, BY0, BY1, M1, M2, E, use_ref, rx, ry, SX, SY, SR, SW2, SG, qx, qy, qr, bound):
    """Batched Update query: for each query disk the best ``dist(u) + |uv|``
    over adjacent sites ``u``, ties by site id, counted only when strictly
    below ``bound``.  Returns (values, site ids, fallback count); id -1 means
    no improving adjacent site.
    """
    m = SX.shape[0]
    k = qx.shape[0]
    out_val = np.empty(k)
    out_id = np.full(k, -1, dtype=np.int64)
    stack = np.empty(2 * STACK, dtype=np.int64)
    fallbacks = 0
    for j in range(k):
        out_val[j] = bound[j]
        p = first_adjacent(X, Y, W1, BX0, BX1, BY0, BY1, M1, m, qx[j], qy[j], qr[j], stack)
        if p < 0:
            continue
        best, bid, bpos, bd = suffix_min(X, Y, W2, G, BX0, BX1, BY0, BY1, M2, E, use_ref, rx, ry, m, p, qx[j], qy[j], bound[j], -1, stack)
        if bpos < 0:
            continue
        dx = qx[j] - X[bd, bpos]
        dy = qy[j] - Y[bd, bpos]
        if math.sqrt(dx * dx + dy * dy) <= -W1[bd, bpos] + qr[j]:
            out_val[j] = best
            out_id[j] = bid
            continue
        # float rounding or an exact value tie put a non-adjacent site on top:
        # settle this query by scanning the suffix directly
        fallbacks += 1
        best = bound[j]
        bid = -1
        for i in range(p, m):
            dx = qx[j] - SX[i]
            dy = qy[j] - SY[i]
            w = math.sqrt(dx * dx + dy * dy)
            if w <= SR[i] + qr[j]:
                val = w + SW2[i]
                if val < best or (val == best and SG[i] < bid):
                    best = val
                    bid = SG[i]
        if bid >= 0:
            out_val[j] = best
            out_id[j] = bid
    return out_val, out_id, fallbacks


@njit(cache=True)
def first_adjacent_batch(X, Y, W1, BX0, BX1, BY0, BY1, M1, m, qx, qy, qr):
    k = qx.shape[0]
    out = np.empty(k, dtype=np.int64)
    stack = np.empty(2 * STACK, dtype=np.int64)
    for j in range(k):
        out[j] = first_adjacent(X, Y, W1, BX0, BX1, BY0, BY1, M1, m, qx[j], qy[j], qr[j], stack)
    return out


@njit(cache=True)
def nearest_batch(X, Y, W, G, BX0, BX1, BY0, BY1, M, m, qx, qy):
    k = qx.shape[0]
    out_val = np.empty(k)
    out_id = np.empty(k, dtype=np.int64)
    stack = np.empty(2 * STACK, dtype=np.int64)
    for j in range(k):
        v, i, _ = min_weighted(X, Y, W, G, BX0, BX1, BY0, BY1, M, M, False, 0.0, 0.0, 0, 0, m, qx[j], qy[j], np.inf, BIG_ID, -1, stack)
        out_val[j] = v
        out_id[j] = i
    return out_val, out_id


@njit(cache=True)
def brute_relax(ux, uy, ur, ud, uid, qx, qy, qr, bound):
    """Direct double loop with the same semantics as ``relax_batch``."""
    k = qx.shape[0]
    out_val = np.empty(k)
    out_id = np.full(k, -1, dtype=np.int64)
    for j in range(k):
        best = bound[j]
        bid = -1
        for i in range(ux.shape[0]):
            dx = qx[j] - ux[i]
            dy = qy[j] - uy[i]
            w = math.sqrt(dx * dx + dy * dy)
            if w <= ur[i] + qr[j]:
                val = w + ud[i]
                if val < best or (val == best and uid[i] < bid):
                    best = val
                    bid = uid[i]
        out_val[j] = best
        out_id[j] = bid
    return out_val, out_id
