"""Disk-graph instances, the edge predicate, and the shared result container.

All center distances in the package are computed as ``sqrt(dx*dx + dy*dy)``
(never ``hypot``) so that every solver, the oracle and the numba kernels
round identically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

INF = math.inf


@dataclass(frozen=True)
class Vertex:
    id: int
    x: float
    y: float
    r: float


def euclid(ax: float, ay: float, bx: float, by: float) -> float:
    dx = ax - bx
    dy = ay - by
    return math.sqrt(dx * dx + dy * dy)


def is_edge(u: Vertex, v: Vertex) -> bool:
    """Closed intersection test: tangent disks are adjacent."""
    return euclid(u.x, u.y, v.x, v.y) <= u.r + v.r


def edge_weight(u: Vertex, v: Vertex) -> float:
    return euclid(u.x, u.y, v.x, v.y)


class InstanceError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DiskInstance:
    """n disks (centers + radii) and a source index; immutable once built."""

    xs: np.ndarray
    ys: np.ndarray
    rs: np.ndarray
    source: int = 0

    def __post_init__(self) -> None:
        xs = np.ascontiguousarray(self.xs, dtype=np.float64)
        ys = np.ascontiguousarray(self.ys, dtype=np.float64)
        rs = np.ascontiguousarray(self.rs, dtype=np.float64)
        if not (xs.ndim == ys.ndim == rs.ndim == 1) or not (len(xs) == len(ys) == len(rs)):
            raise InstanceError("coordinate and radius arrays must be 1-d and equally long")
        if len(xs) < 1:
            raise InstanceError("instance needs at least one disk")
        if not (0 <= self.source < len(xs)):
            raise InstanceError(f"source {self.source} out of range")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys)) and np.all(np.isfinite(rs))):
            raise InstanceError("coordinates and radii must be finite")
        if np.any(rs < 1.0):
            raise InstanceError("radii must be >= 1")
        for a in (xs, ys, rs):
            a.flags.writeable = False
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "rs", rs)

    @classmethod
    def from_vertices(cls, vertices: Sequence[tuple[float, float, float]], source: int = 0) -> "DiskInstance":
        arr = np.asarray(vertices, dtype=np.float64).reshape(-1, 3)
        return cls(arr[:, 0], arr[:, 1], arr[:, 2], source)

    @property
    def n(self) -> int:
        return len(self.xs)

    @property
    def psi(self) -> float:
        return float(self.rs.max() / self.rs.min())

    def vertex(self, i: int) -> Vertex:
        return Vertex(i, float(self.xs[i]), float(self.ys[i]), float(self.rs[i]))

    @property
    def vertices(self) -> list[Vertex]:
        return [self.vertex(i) for i in range(self.n)]

    def dist(self, i: int, j: int) -> float:
        return euclid(self.xs[i], self.ys[i], self.xs[j], self.ys[j])

    def adjacent(self, i: int, j: int) -> bool:
        return self.dist(i, j) <= self.rs[i] + self.rs[j]


@dataclass
class SsspResult:
    dist: np.ndarray
    prev: np.ndarray
    stats: dict = field(default_factory=dict)

    @classmethod
    def empty(cls, n: int, source: int) -> "SsspResult":
        dist = np.full(n, INF)
        prev = np.full(n, -1, dtype=np.int64)
        dist[source] = 0.0
        return cls(dist, prev)


def tolerance(value: float) -> float:
    return 1e-9 * (1.0 + abs(value))


def validate_result(
    inst: DiskInstance,
    res: SsspResult,
    *,
    full: bool = False,
    samples: int = 10_000,
    seed: int = 0,
) -> list[str]:
    """Return human-readable violations; an empty list means the tree is valid.

    Edge consistency (``dist[v] <= dist[u] + |uv|``) is checked on every pair
    when ``full`` is set, otherwise on ``samples`` random pairs.
    """
    n = inst.n
    s = inst.source
    dist = np.asarray(res.dist, dtype=np.float64)
    prev = np.asarray(res.prev, dtype=np.int64)
    out: list[str] = []
    if len(dist) != n or len(prev) != n:
        return [f"result has {len(dist)}/{len(prev)} entries for {n} vertices"]
    if dist[s] != 0.0:
        out.append("source dist nonzero")
    if prev[s] != -1:
        out.append("source has a predecessor")
    for v in range(n):
        if v == s:
            continue
        d = dist[v]
        if math.isnan(d) or d < 0:
            out.append(f"vertex {v}: invalid dist {d}")
            continue
        if d == INF:
            if prev[v] != -1:
                out.append(f"vertex {v}: unreachable but prev={prev[v]}")
            continue
        u = int(prev[v])
        if not (0 <= u < n) or u == v:
            out.append(f"vertex {v}: missing predecessor")
            continue
        if not inst.adjacent(u, v):
            out.append(f"vertex {v}: prev {u} is not adjacent")
            continue
        expect = dist[u] + inst.dist(u, v)
        if abs(expect - d) > tolerance(d):
            out.append(f"vertex {v}: dist {d!r} != dist[prev]+|uv| = {expect!r}")
    # cycles / termination at the source
    state = np.zeros(n, dtype=np.int8)  # 0 new, 1 on stack, 2 done
    for v in range(n):
        if state[v] or dist[v] == INF:
            continue
        chain = []
        x = v
        while x != -1 and state[x] == 0:
            state[x] = 1
            chain.append(x)
            x = int(prev[x]) if 0 <= prev[x] < n else -1
            if x != -1 and dist[x] == INF:
                break
        if x != -1 and state[x] == 1:
            out.append(f"vertex {v}: predecessor chain has a cycle")
        elif x == -1 and chain[-1] != s:
            out.append(f"vertex {v}: predecessor chain ends at {chain[-1]}, not the source")
        for y in chain:
            state[y] = 2
    out.extend(_edge_consistency(inst, dist, full, samples, seed))
    return out


def _edge_consistency(inst: DiskInstance, dist: np.ndarray, full: bool, samples: int, seed: int) -> list[str]:
    n = inst.n
    if n < 2:
        return []
    if full:
        pairs = np.array([(i, j) for i in range(n) for j in range(n) if i != j], dtype=np.int64)
    else:
        rng = np.random.default_rng(seed)
        pairs = rng.integers(0, n, size=(samples, 2))
        pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    u, v = pairs[:, 0], pairs[:, 1]
    dx = inst.xs[u] - inst.xs[v]
    dy = inst.ys[u] - inst.ys[v]
    w = np.sqrt(dx * dx + dy * dy)
    adj = w <= inst.rs[u] + inst.rs[v]
    bound = dist[u] + w
    bad = adj & np.isfinite(dist[u]) & (dist[v] > bound + 1e-9 * (1.0 + bound))
    return [f"edge ({a},{b}): dist[{b}]={dist[b]!r} exceeds dist[{a}]+|uv|" for a, b in pairs[bad][:20]]


# ---------------------------------------------------------------- file format

def parse_instance(text: str) -> DiskInstance:
    """Parse the ``n source`` / ``x y r`` line format; '#' starts a comment."""
    rows: list[list[str]] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append(line.split())
    if not rows:
        raise InstanceError("empty instance file")
    head = rows[0]
    if len(head) != 2:
        raise InstanceError("first line must be 'n source_index'")
    try:
        n, source = int(head[0]), int(head[1])
    except ValueError as exc:
        raise InstanceError(f"bad header: {exc}") from None
    body = rows[1:]
    if len(body) != n:
        raise InstanceError(f"expected {n} disk lines, found {len(body)}")
    vals = []
    for k, row in enumerate(body):
        if len(row) != 3:
            raise InstanceError(f"disk line {k + 1}: expected 'x y r'")
        try:
            vals.append([float(t) for t in row])
        except ValueError as exc:
            raise InstanceError(f"disk line {k + 1}: {exc}") from None
    arr = np.asarray(vals, dtype=np.float64).reshape(-1, 3)
    return DiskInstance(arr[:, 0], arr[:, 1], arr[:, 2], source)


def format_instance(inst: DiskInstance) -> str:
    lines = [f"{inst.n} {inst.source}"]
    lines.extend(f"{x!r} {y!r} {r!r}" for x, y, r in zip(inst.xs.tolist(), inst.ys.tolist(), inst.rs.tolist()))
    return "\n".join(lines) + "\n"


def read_instance(path: str | Path) -> DiskInstance:
    return parse_instance(Path(path).read_text())


def write_instance(inst: DiskInstance, path: str | Path) -> None:
    Path(path).write_text(format_instance(inst))


def format_float(x: float) -> str:
    if x == INF:
        return "inf"
    if x == int(x) and abs(x) < 1e16:
        return str(int(x))
    return repr(float(x))


def format_result(res: SsspResult) -> str:
    return "".join(
        f"{i} {format_float(d)} {int(p)}\n" for i, (d, p) in enumerate(zip(res.dist.tolist(), res.prev.tolist()))
    )

