import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from disksssp.core import (
    DiskInstance,
    InstanceError,
    SsspResult,
    Vertex,
    edge_weight,
    format_float,
    format_instance,
    format_result,
    is_edge,
    parse_instance,
    validate_result,
)

PATH3 = DiskInstance.from_vertices([(0, 0, 1), (1.5, 0, 1), (3, 0, 1)])


@pytest.mark.parametrize(
    "a, b, expected",
    [
        ((0, 0, 1), (1.9, 0, 1), True),
        ((0, 0, 1), (2.1, 0, 1), False),
        ((0, 0, 3), (3, 4, 1), False),
        ((0, 0, 1), (2.0, 0, 1), True),  # tangent disks intersect
    ],
)
def test_is_edge(a, b, expected):
    assert is_edge(Vertex(0, *a), Vertex(1, *b)) is expected


@pytest.mark.parametrize(
    "a, b, w",
    [((0, 0, 2), (3, 0, 2), 3.0), ((0, 0, 5), (3, 4, 5), 5.0), ((1, 1, 2), (1, 1.5, 2), 0.5)],
)
def test_edge_weight(a, b, w):
    assert edge_weight(Vertex(0, *a), Vertex(1, *b)) == w


coord = st.floats(-1e6, 1e6, allow_nan=False)
radius = st.floats(1.0, 1e6, allow_nan=False)


@given(coord, coord, radius, coord, coord, radius)
def test_edge_predicate_is_symmetric(x1, y1, r1, x2, y2, r2):
    u, v = Vertex(0, x1, y1, r1), Vertex(1, x2, y2, r2)
    assert is_edge(u, v) == is_edge(v, u)
    assert edge_weight(u, v) == edge_weight(v, u)


def test_instance_validation():
    with pytest.raises(InstanceError):
        DiskInstance.from_vertices([(0, 0, 0.5)])
    with pytest.raises(InstanceError):
        DiskInstance.from_vertices([(0, 0, 1)], source=3)
    with pytest.raises(InstanceError):
        DiskInstance.from_vertices([])
    inst = DiskInstance.from_vertices([(0, 0, 2), (5, 5, 8)])
    assert inst.psi == 4.0


def test_validate_single_vertex():
    inst = DiskInstance.from_vertices([(0, 0, 1)])
    assert validate_result(inst, SsspResult.empty(1, 0)) == []


def test_validate_flags_nonzero_source():
    res = SsspResult(np.array([1.0, 2.5, 4.0]), np.array([-1, 0, 1]))
    assert any("source dist nonzero" in p for p in validate_result(PATH3, res))


def test_validate_path():
    res = SsspResult(np.array([0.0, 1.5, 3.0]), np.array([-1, 0, 1]))
    assert validate_result(PATH3, res, full=True) == []


def test_validate_catches_bad_trees():
    # predecessor not adjacent
    res = SsspResult(np.array([0.0, 1.5, 3.0]), np.array([-1, 0, 0]))
    assert validate_result(PATH3, res)
    # dist too large for an existing edge
    res = SsspResult(np.array([0.0, 1.5, 5.0]), np.array([-1, 0, 1]))
    assert validate_result(PATH3, res, full=True)
    # cycle
    res = SsspResult(np.array([0.0, 1.5, 3.0]), np.array([-1, 2, 1]))
    assert validate_result(PATH3, res)


def test_parse_round_trip():
    text = "# comment\n3 1\n0 0 1\n1.5 0 1  # trailing\n3 0 1\n"
    inst = parse_instance(text)
    assert inst.n == 3 and inst.source == 1
    assert parse_instance(format_instance(inst)).rs.tolist() == [1.0, 1.0, 1.0]
    assert format_instance(parse_instance(format_instance(inst))) == format_instance(inst)


@pytest.mark.parametrize(
    "text",
    ["", "3\n0 0 1\n", "2 0\n0 0 1\n", "1 0\n0 0\n", "1 0\n0 x 1\n", "a b\n"],
)
def test_parse_errors(text):
    with pytest.raises(InstanceError):
        parse_instance(text)


@given(st.lists(st.tuples(coord, coord, radius), min_size=1, max_size=20))
@settings(max_examples=50)
def test_format_is_exact(rows):
    inst = DiskInstance.from_vertices(rows)
    back = parse_instance(format_instance(inst))
    assert back.xs.tolist() == inst.xs.tolist()
    assert back.ys.tolist() == inst.ys.tolist()
    assert back.rs.tolist() == inst.rs.tolist()


def test_result_format():
    res = SsspResult(np.array([0.0, 1.5, math.inf]), np.array([-1, 0, -1]))
    assert format_result(res) == "0 0 -1\n1 1.5 0\n2 inf -1\n"
    assert format_float(0.1) == "0.1"
    assert format_float(3.0) == "3"
