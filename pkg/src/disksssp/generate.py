"""Seeded random instance generators.

Radii are log-uniform in ``[1, psi]`` (``[10, 10 psi]`` for cliques, so that
every pair of centers in a box of side at most 1 overlaps).  ``psi = 1``
gives all radii exactly 1 (or 10), i.e. a unit disk graph.  The source is
always vertex 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DiskInstance

KINDS = ("uniform-square", "clustered", "clique", "path-chain")


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    n: int
    psi: float = 1.0
    seed: int = 0
    side: float | None = None

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not (self.psi >= 1 and math.isfinite(self.psi)):
            raise ValueError("psi must be a finite number >= 1")
        if self.side is not None and not (self.side > 0 and math.isfinite(self.side)):
            raise ValueError("side must be positive")


def log_uniform(rng: np.random.Generator, n: int, lo: float, psi: float) -> np.ndarray:
    if psi == 1:
        return np.full(n, float(lo))
    r = lo * np.exp(rng.uniform(0.0, math.log(psi), n))
    return np.clip(r, lo, lo * psi)


def generate(spec: GeneratorSpec) -> DiskInstance:
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    n, psi = spec.n, float(spec.psi)
    if spec.kind == "clique":
        side = 1.0 if spec.side is None else spec.side
        if side > 1.0:
            raise ValueError("clique side must be at most 1 so that all disks overlap")
        xs = rng.uniform(0.0, side, n)
        ys = rng.uniform(0.0, side, n)
        rs = log_uniform(rng, n, 10.0, psi)
    elif spec.kind == "uniform-square":
        side = 2.0 * math.sqrt(n) if spec.side is None else spec.side
        xs = rng.uniform(0.0, side, n)
        ys = rng.uniform(0.0, side, n)
        rs = log_uniform(rng, n, 1.0, psi)
    elif spec.kind == "clustered":
        side = 4.0 * math.sqrt(n) if spec.side is None else spec.side
        k = max(1, n // 40)
        centers = rng.uniform(0.0, side, (k, 2))
        which = rng.integers(0, k, n)
        spread = rng.normal(0.0, side / 25.0, (n, 2))
        xs = centers[which, 0] + spread[:, 0]
        ys = centers[which, 1] + spread[:, 1]
        rs = log_uniform(rng, n, 1.0, psi)
    else:  # path-chain
        rs = log_uniform(rng, n, 1.0, psi)
        gaps = 0.95 * (rs[:-1] + rs[1:]) * rng.uniform(0.5, 1.0, max(0, n - 1))
        xs = np.r_[0.0, np.cumsum(gaps)]
        ys = rng.normal(0.0, 0.1, n) * rs
    return DiskInstance(xs, ys, rs, 0)
