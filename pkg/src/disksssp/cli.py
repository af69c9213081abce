"""Command-line entry point: ``solve``, ``gen``, ``verify`` and ``bench``.

Exit codes: 0 success, 1 disagreement or unreadable input, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .bench import SOLVERS, append_csv, load_suite, run_suite
from .core import InstanceError, format_instance, format_result, read_instance, tolerance, validate_result
from .generate import KINDS, GeneratorSpec, generate
from .oracle import DEFAULT_CAP, OracleRefused, solve_oracle


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def default_seed() -> int:
    raw = os.environ.get("DISK_SSSP_SEED")
    if raw is None or raw == "":
        return 0
    try:
        return int(raw, 0)
    except ValueError:
        raise UsageError(f"DISK_SSSP_SEED must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="disksssp", description="Exact shortest paths in disk graphs.")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve one instance file")
    s.add_argument("--algo", choices=sorted(SOLVERS), default="bounded")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--out")
    s.add_argument("--json", action="store_true", help="emit dist/prev/stats as JSON")

    g = sub.add_parser("gen", help="write a generated instance")
    g.add_argument("--kind", choices=KINDS, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--psi", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=None, help="defaults to $DISK_SSSP_SEED or 0")
    g.add_argument("--side", type=float, default=None)
    g.add_argument("--out")

    v = sub.add_parser("verify", help="cross-check solvers against each other and the oracle")
    v.add_argument("--in", dest="inp", required=True)
    v.add_argument("--algos", default="bounded,arbitrary")
    v.add_argument("--cap", type=int, default=DEFAULT_CAP, help="oracle size cap")

    b = sub.add_parser("bench", help="run a suite and append CSV rows")
    b.add_argument("--suite", required=True)
    b.add_argument("--csv", required=True)
    return p


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_solve(args) -> int:
    inst = read_instance(args.inp)
    res = SOLVERS[args.algo](inst)
    if args.json:
        doc = {
            "dist": [d if math.isfinite(d) else None for d in res.dist.tolist()],
            "prev": res.prev.tolist(),
            "stats": {k: (v.item() if isinstance(v, np.generic) else v) for k, v in res.stats.items()},
        }
        _emit(json.dumps(doc, sort_keys=True) + "\n", args.out)
    else:
        _emit(format_result(res), args.out)
    return 0


def cmd_gen(args) -> int:
    seed = default_seed() if args.seed is None else args.seed
    spec = GeneratorSpec(args.kind, args.n, args.psi, seed, args.side)
    try:
        inst = generate(spec)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(format_instance(inst), args.out)
    return 0


def cmd_verify(args) -> int:
    inst = read_instance(args.inp)
    algos = [a for a in args.algos.split(",") if a]
    unknown = [a for a in algos if a not in SOLVERS]
    if unknown or not algos:
        raise UsageError(f"unknown algos {unknown}; choose from {', '.join(sorted(SOLVERS))}")
    results = {a: SOLVERS[a](inst) for a in algos if a != "oracle"}
    try:
        results["oracle"] = solve_oracle(inst, cap=args.cap)
    except OracleRefused as exc:
        print(f"oracle skipped: {exc}")
    ok = True
    for name, res in results.items():
        problems = validate_result(inst, res)
        if problems:
            ok = False
            print(f"{name}: invalid tree: {problems[0]}")
    names = list(results)
    ref = "oracle" if "oracle" in results else names[0]
    for name in names:
        if name == ref:
            continue
        a, b = results[ref].dist, results[name].dist
        both_inf = np.isinf(a) & np.isinf(b)
        diff = np.where(both_inf, 0.0, np.abs(a - b))
        bad = np.flatnonzero(~(diff <= np.vectorize(tolerance)(np.where(both_inf, 0.0, a))))
        if len(bad):
            ok = False
            v = int(bad[0])
            print(f"{name} disagrees with {ref} at {len(bad)} vertices, e.g. {v}: {b[v]!r} vs {a[v]!r}")
    print(f"{'agree' if ok else 'DISAGREE'}: {', '.join(names)} on n={inst.n}")
    return 0 if ok else 1


def cmd_bench(args) -> int:
    try:
        suite = load_suite(args.suite)
    except (OSError, ValueError) as exc:
        raise InstanceError(f"cannot read suite: {exc}") from None
    try:
        records = run_suite(suite)
    except (KeyError, ValueError) as exc:
        raise UsageError(f"bad suite entry: {exc}") from None
    append_csv(records, args.csv)
    for r in records:
        print(f"{r.algo:9s} n={r.n:<7d} psi={r.psi:<8g} seed={r.seed:<5d} {r.ms:10.1f} ms  {r.checksum}")
    return 0


COMMANDS = {"solve": cmd_solve, "gen": cmd_gen, "verify": cmd_verify, "bench": cmd_bench}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.cmd](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (InstanceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
