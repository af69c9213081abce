"""Benchmark harness: run solvers over a suite of generated instances and write CSV rows.

A suite file is JSON::

    {"algos": ["bounded", "arbitrary"],
     "instances": [{"kind": "clique", "n": [4096, 8192], "psi": 1, "seed": [1, 2], "side": 0.0078125}]}

``n``, ``psi`` and ``seed`` may be scalars or lists; every combination runs.
An instance entry may carry its own ``algos`` list.
"""
from __future__ import annotations

import csv
import itertools
import json
import math
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .arbitrary import solve_arbitrary
from .bounded import solve_bounded
from .core import DiskInstance, SsspResult
from .generate import GeneratorSpec, generate
from .oracle import solve_oracle

FIELDS = ["algo", "n", "psi", "seed", "ms", "edges", "checksum", "rounds", "small_sum", "large_sum", "c", "c_fit"]

SOLVERS: dict[str, Callable[[DiskInstance], SsspResult]] = {
    "bounded": solve_bounded,
    "arbitrary": solve_arbitrary,
    "oracle": solve_oracle,
}

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
MASK = (1 << 64) - 1


def checksum(dist: np.ndarray) -> str:
    """64-bit FNV-1a over the distances rounded to 1e-6, as 16 hex digits."""
    h = FNV_OFFSET
    for d in np.asarray(dist, dtype=np.float64).tolist():
        token = "inf" if math.isinf(d) else str(round(d * 1e6))
        for b in token.encode() + b"\n":
            h = ((h ^ b) * FNV_PRIME) & MASK
    return f"{h:016x}"


@dataclass
class BenchRecord:
    algo: str
    n: int
    psi: float
    seed: int
    ms: float
    edges: int | None
    checksum: str
    rounds: int | None = None
    small_sum: int | None = None
    large_sum: int | None = None
    c: float | None = None
    c_fit: float | None = None

    def row(self) -> dict:
        out = asdict(self)
        out["ms"] = f"{self.ms:.3f}"
        for key in ("c", "c_fit"):
            if out[key] is not None:
                out[key] = f"{out[key]:.6g}"
        return {k: ("" if v is None else v) for k, v in out.items()}


def run_one(algo: str, inst: DiskInstance, *, psi: float, seed: int) -> BenchRecord:
    """Time one solver call; instance generation and parsing are outside the clock."""
    try:
        solve = SOLVERS[algo]
    except KeyError:
        raise ValueError(f"unknown algo {algo!r}; expected one of {', '.join(SOLVERS)}") from None
    t0 = time.perf_counter()
    res = solve(inst)
    ms = 1000.0 * (time.perf_counter() - t0)
    st = res.stats
    rec = BenchRecord(algo, inst.n, psi, seed, ms, st.get("edges"), checksum(res.dist), st.get("rounds"))
    if "small_sum" in st:
        rec.small_sum = int(st["small_sum"])
        rec.large_sum = int(st["large_sum"])
        rec.c = max(rec.small_sum, rec.large_sum) / _nlogn(inst.n)
    return rec


def _nlogn(n: int) -> float:
    return max(1.0, n * math.log2(max(n, 2)))


def _as_list(v) -> list:
    return list(v) if isinstance(v, (list, tuple)) else [v]


def expand_suite(suite: dict) -> Iterable[tuple[list[str], GeneratorSpec]]:
    algos = suite.get("algos", ["bounded"])
    for entry in suite.get("instances", []):
        combos = itertools.product(_as_list(entry["n"]), _as_list(entry.get("psi", 1)), _as_list(entry.get("seed", 0)))
        for n, psi, seed in combos:
            spec = GeneratorSpec(entry["kind"], int(n), float(psi), int(seed), entry.get("side"))
            spec.validate()
            yield _as_list(entry.get("algos", algos)), spec


def run_suite(suite: dict) -> list[BenchRecord]:
    """Run every (instance, algo) pair; ``c_fit`` is the largest per-row constant of the suite."""
    records = []
    for algos, spec in expand_suite(suite):
        inst = generate(spec)
        for algo in algos:
            records.append(run_one(algo, inst, psi=spec.psi, seed=spec.seed))
    fit = max((r.c for r in records if r.c is not None), default=None)
    for r in records:
        r.c_fit = fit
    return records


def load_suite(path: str | Path) -> dict:
    suite = json.loads(Path(path).read_text())
    if not isinstance(suite, dict) or not isinstance(suite.get("instances", []), list):
        raise ValueError("suite must be a JSON object with an 'instances' list")
    return suite


def append_csv(records: list[BenchRecord], path: str | Path) -> None:
    path = Path(path)
    fresh = not path.exists() or path.stat().st_size == 0
    with path.open("a", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=FIELDS)
        if fresh:
            w.writeheader()
        for r in records:
            w.writerow(r.row())


def doubling_factors(ns: list[int], ms: list[float]) -> list[float]:
    """Time ratio between consecutive sizes, normalised to an exact doubling."""
    out = []
    for (n0, t0), (n1, t1) in zip(zip(ns, ms), zip(ns[1:], ms[1:])):
        out.append((t1 / t0) ** (1.0 / math.log2(n1 / n0)))
    return out
