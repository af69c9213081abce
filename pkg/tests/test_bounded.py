import math

import numpy as np
import pytest

from disksssp.bounded import BoundedSolver, solve_bounded
from disksssp.core import DiskInstance, tolerance
from disksssp.generate import GeneratorSpec, generate
from disksssp.oracle import solve_oracle

from _support import bounded_suite, oracle_mismatches, small_to_large_violations


def test_single_vertex():
    res = solve_bounded(DiskInstance.from_vertices([(3, 4, 2)]))
    assert res.dist.tolist() == [0.0] and res.prev.tolist() == [-1]


def test_path():
    res = solve_bounded(DiskInstance.from_vertices([(0, 0, 1), (1.5, 0, 1), (3, 0, 1)]))
    assert res.dist.tolist() == [0.0, 1.5, 3.0]
    assert res.prev.tolist() == [-1, 0, 1]


def test_unreachable():
    res = solve_bounded(DiskInstance.from_vertices([(0, 0, 1), (1.5, 0, 1), (30, 0, 1)]))
    assert res.dist[2] == math.inf and res.prev[2] == -1


def test_random_patch_matches_oracle():
    rng = np.random.default_rng(7)
    inst = DiskInstance(rng.uniform(0, 50, 200), rng.uniform(0, 50, 200), np.exp(rng.uniform(0, math.log(16), 200)))
    assert oracle_mismatches(inst, solve_bounded(inst), solve_oracle(inst)) == []


def test_first_round_settles_the_source_cell():
    inst = DiskInstance.from_vertices([(0.1, 0.1, 10), (0.3, 0.2, 10), (0.2, 0.5, 10), (40, 0, 10)])
    s = BoundedSolver(inst)
    assert s.grid.cell_of[0] == s.grid.cell_of[1] == s.grid.cell_of[2]
    s.step()
    for v in (1, 2):
        assert s.dist[v] == inst.dist(0, v)
    assert not s.in_R[:3].any() and s.in_R[3]


def test_alarm_is_armed_once():
    # v and v2 are small neighbours of w; s reaches both but not w
    inst = DiskInstance.from_vertices([(0, 0, 1), (1.5, 0, 1), (1.5, 0.5, 1), (12, 0, 10)])
    s = BoundedSolver(inst)
    g = s.grid
    c_w = int(g.cell_of[3])
    assert len({int(g.cell_of[v]) for v in range(4)}) == 4
    s.step()  # source cell, whose L is empty
    assert np.all(s.alarm == math.inf)
    s.step()  # v at 1.5
    assert s.keys == [0.0, 1.5]
    assert s.alarm[c_w] == 1.5 + 2.0 * g.diameter(c_w)
    s.step()  # v2 at |s v2|; the alarm is already armed
    assert s.keys[-1] == inst.dist(0, 2)
    assert s.alarm[c_w] == 3.5
    s.step()  # the alarm fires and relaxes w from v and v2
    assert s.keys[-1] == 3.5 and s.alarm[c_w] == math.inf
    assert s.dist[3] == 1.5 + inst.dist(1, 3)


def test_alarm_formula_direct():
    # v at distance 5; L(c_v) holds the cell of the r=16 disk (|c| = 2), so its alarm is 9
    inst = DiskInstance.from_vertices([(0, 0, 1), (5, 0, 4), (9, 0, 1.2), (9 + 17, 0, 16)])
    s = BoundedSolver(inst)
    v = 2
    s.dist[v] = 5.0
    c = int(s.grid.cell_of[v])
    L = s.grid.L[c].tolist()
    assert int(s.grid.cell_of[3]) in L and s.grid.diameter(int(s.grid.cell_of[3])) == 2.0
    s.round_case1(v)
    for d in L:
        assert s.alarm[d] == 5.0 + 2.0 * s.grid.diameter(d)


def test_case2_without_small_vertices_only_resets():
    inst = DiskInstance.from_vertices([(0, 0, 10), (100, 0, 10)])
    s = BoundedSolver(inst)
    before = s.dist.copy()
    s.alarm[1] = 7.0
    s.round_case2(1)
    assert s.alarm[1] == math.inf
    assert np.array_equal(before, s.dist)


def test_case2_transmits_from_small_neighbour():
    inst = DiskInstance.from_vertices([(0, 0, 1), (9, 0, 10)])
    s = BoundedSolver(inst)
    c = int(s.grid.cell_of[1])
    s.dist[1] = math.inf
    s.round_case2(c)
    assert s.dist[1] <= s.dist[0] + 9.0


def step_checked(inst):
    """Run with oracle checks and the upper-bound invariant after every round."""
    oracle = solve_oracle(inst)
    s = BoundedSolver(inst, oracle_dist=oracle.dist)
    fin = np.isfinite(oracle.dist)
    while s.step():
        assert np.all(s.dist[fin] >= oracle.dist[fin] - np.vectorize(tolerance)(oracle.dist[fin]))
    s.res.stats = s.stats()
    return s, oracle


@pytest.mark.parametrize("chunk", range(6))
def test_random_suite(chunk):
    for _, inst in bounded_suite(20, 300 + chunk, n_max=200):
        s, oracle = step_checked(inst)
        assert oracle_mismatches(inst, s.res, oracle) == []
        assert all(a <= b for a, b in zip(s.keys, s.keys[1:]))
        assert s.stats()["max_firings"] <= 33
        # each reachable vertex left R exactly once, as part of its cell
        reach = np.isfinite(oracle.dist)
        assert not s.in_R[reach].any()
        assert s.remaining == int(s.in_R.sum())
        assert small_to_large_violations(inst, oracle) == []


def test_only_unreachable_vertices_stay_in_R():
    inst = generate(GeneratorSpec("clustered", 200, 4.0, 3))
    s, oracle = step_checked(inst)
    assert np.array_equal(s.in_R, ~np.isfinite(oracle.dist) & s.in_R)
