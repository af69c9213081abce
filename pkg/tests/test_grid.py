import math

import numpy as np
import pytest

from disksssp.core import DiskInstance
from disksssp.grid import boxplus, build_grid, cell_index, mid_level, side
from disksssp.oracle import solve_oracle

from _support import bounded_suite, distance_difference_violations, grid_cover_violations


@pytest.mark.parametrize("r, level", [(10.0, 0), (20.0, 1), (1.0, -3), (8.0, 0), (15.999, 0), (16.0, 1)])
def test_mid_level(r, level):
    assert int(mid_level(r)) == level


def test_levels_nest_exactly():
    for i in range(-40, 40):
        assert side(i - 1) * 2 == side(i)


def test_point_membership_is_half_open():
    s = side(0)
    gx, gy = cell_index(np.array([0.0, s, s * 0.999999]), np.array([0.0, 0.0, -1e-12]), 0)
    assert gx.tolist() == [0, 1, 0]
    assert gy.tolist() == [0, 0, -1]


def test_every_vertex_in_exactly_one_mid_cell():
    rng = np.random.default_rng(3)
    inst = DiskInstance(rng.uniform(0, 80, 300), rng.uniform(0, 80, 300), np.exp(rng.uniform(0, 5, 300)))
    g = build_grid(inst)
    seen = np.concatenate(g.members)
    assert sorted(seen.tolist()) == list(range(inst.n))
    for c, (i, ix, iy) in enumerate(g.cells):
        for v in g.members[c].tolist():
            assert 8 * 2.0 ** i <= inst.rs[v] < 16 * 2.0 ** i
            assert g.containing_cell(v, i) == (i, ix, iy)


def test_small_sets():
    inst = DiskInstance.from_vertices([(0.1, 0.1, 1), (0.2, 0.1, 10), (0.3, 0.3, 100)])
    g = build_grid(inst)
    assert g.p_small(g.containing_cell(2, 3)).tolist() == [0, 1]
    assert g.p_small(g.containing_cell(1, 0)).tolist() == [0]
    assert g.p_mid(g.containing_cell(1, 0)).tolist() == [1]


def test_isolated_vertex_boxplus():
    g = build_grid(DiskInstance.from_vertices([(0.3, 0.3, 10)]))
    cells = boxplus(g, 0)
    assert [c for c in cells if len(g.p_mid(c))] == [g.cells[0]]
    # the only other nonempty cell is the parent, where the vertex is small
    assert all(g.containing_cell(0, c[0]) == c for c in cells)
    assert g.L[0].tolist() == []


def test_adjacent_cells_see_each_other():
    s = side(0)
    g = build_grid(DiskInstance.from_vertices([(0.5 * s, 0.5 * s, 10), (1.5 * s, 0.5 * s, 10)]))
    a, b = g.cells
    assert a in boxplus(g, 0) and b in boxplus(g, 0)
    assert a in boxplus(g, 1) and b in boxplus(g, 1)


def test_L_example():
    g = build_grid(DiskInstance.from_vertices([(0, 0, 64), (10, 0, 8)], source=0))
    c_small = int(g.cell_of[1])
    c_big = int(g.cell_of[0])
    assert g.cells[c_small][0] == 0 and g.cells[c_big][0] == 3
    assert g.L[c_small].tolist() == [c_big]
    assert g.L[c_big].tolist() == []  # the source cell


def test_single_cell_has_empty_L():
    g = build_grid(DiskInstance.from_vertices([(0.1, 0.1, 10), (0.2, 0.2, 10), (0.3, 0.1, 10)]))
    assert len(g.cells) == 1 and g.L[0].tolist() == []


@pytest.mark.parametrize("chunk", range(4))
def test_cover_lemmas_random(chunk):
    for _, inst in bounded_suite(25, 1000 + chunk, n_max=150):
        assert grid_cover_violations(build_grid(inst)) == []


@pytest.mark.parametrize("chunk", range(2))
def test_distance_difference_random(chunk):
    for _, inst in bounded_suite(25, 2000 + chunk, n_max=150):
        assert distance_difference_violations(build_grid(inst), solve_oracle(inst).dist) == []


def test_box_queries_are_consistent():
    rng = np.random.default_rng(5)
    inst = DiskInstance(rng.uniform(0, 60, 200), rng.uniform(0, 60, 200), np.exp(rng.uniform(0, math.log(64), 200)))
    g = build_grid(inst)
    for c in range(len(g.cells)):
        mid, small, both = set(g.box_mid(c).tolist()), set(g.box_small(c).tolist()), set(g.box_all(c).tolist())
        assert mid | small == both
        assert set(g.members[c].tolist()) <= mid
