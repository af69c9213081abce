import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from disksssp.weighted_nn import Site, WeightedSiteSet, linear_nearest


def test_single_site():
    s = WeightedSiteSet.build([Site(7, 3.0, 4.0, 0.0)])
    assert s.nearest(0.0, 0.0) == (7, 5.0)
    assert s.nearest(100.0, -3.0)[0] == 7


def test_negative_weights():
    s = WeightedSiteSet.build([Site(1, 0, 0, -1), Site(2, 5, 0, -4)])
    assert s.nearest(2.0, 0.0) == (2, -1.0)


def test_ties_go_to_smallest_id():
    s = WeightedSiteSet.build([Site(9, -1, 0, 0), Site(4, 1, 0, 0), Site(6, 0, 1, 0)])
    assert s.nearest(0.0, 0.0) == (4, 1.0)


def test_rejects_empty_and_unknown_strategy():
    with pytest.raises(ValueError):
        WeightedSiteSet.build([])
    with pytest.raises(ValueError):
        WeightedSiteSet([1], [0], [0], [0], strategy="voronoi")


@pytest.mark.parametrize("seed", range(20))
def test_matches_linear_scan(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 500))
    ids = rng.permutation(10 * m)[:m]
    xs, ys = rng.uniform(-50, 50, (2, m))
    ws = rng.choice([-1, 1]) * rng.uniform(0, 30, m)
    if seed % 4 == 0:
        ws = np.round(ws)  # many equal values
        xs, ys = np.round(xs), np.round(ys)
    qx, qy = rng.uniform(-80, 80, (2, 1000))
    tree = WeightedSiteSet(ids, xs, ys, ws)
    got_ids, got_vals = tree.nearest_many(qx, qy)
    want_ids, want_vals = linear_nearest(ids, xs, ys, ws, qx, qy)
    assert np.array_equal(got_ids, want_ids)
    assert np.array_equal(got_vals, want_vals)


finite = st.floats(-1e3, 1e3, allow_nan=False)


@given(st.lists(st.tuples(finite, finite, finite), min_size=1, max_size=60), finite, finite)
@settings(max_examples=200, deadline=None)
def test_exact_property(rows, qx, qy):
    sites = [Site(i, x, y, w) for i, (x, y, w) in enumerate(rows)]
    fast = WeightedSiteSet.build(sites).nearest(qx, qy)
    slow = WeightedSiteSet.build(sites, strategy="linear").nearest(qx, qy)
    assert fast == slow


@pytest.mark.parametrize("seed", range(5))
def test_pruning_is_sound(seed):
    rng = np.random.default_rng(seed)
    m = 300
    s = WeightedSiteSet(np.arange(m), *rng.uniform(0, 100, (2, m)), -rng.uniform(1, 20, m))
    for qx, qy in rng.uniform(-20, 120, (50, 2)):
        sid, val, pruned = s.nearest_debug(qx, qy)
        assert (sid, val) == s.nearest(qx, qy)
    assert pruned >= 0
