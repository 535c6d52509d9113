import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dunklmax.covering import (
    contains,
    covering_constant,
    dilation_doubling_bound,
    overlaps,
    random_rectangles,
    union_measure,
    vitali_select,
)
from dunklmax.measure import Rectangle, measure_rectangle, segment_mass
from dunklmax.suites import raster_union_measure


def box_mass(lo, hi, kappa):
    return float(np.prod([segment_mass(a, b, k) if b > a else 0.0 for a, b, k in zip(lo, hi, kappa)]))


def test_overlap_and_containment():
    a = Rectangle((2.0, 2.0), 1.0)
    assert overlaps(a, Rectangle((3.5, 2.0), 1.0))
    assert not overlaps(a, Rectangle((4.0, 2.0), 1.0))  # touching faces only
    assert contains(a.dilate(3.0), Rectangle((3.5, 3.5), 0.5))
    assert not contains(a, a.dilate(1.1))


def test_selection_examples():
    disjoint = [Rectangle((2.0 * i + 1.0,), 0.5) for i in range(5)]
    sel, cert = vitali_select(disjoint)
    assert len(sel) == 5 and cert.empty
    nested = [Rectangle((5.0,), r) for r in (0.2, 1.0, 0.5)]
    sel, cert = vitali_select(nested)
    assert sel == [nested[1]] and cert.witnesses == [0, 0, 0]
    assert "unengulfed=0" in cert.summary()
    with pytest.raises(ValueError):
        vitali_select(nested, dilation=0.5)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 3), st.integers(1, 60))
def test_selection_invariants(seed, dim, count):
    rects = random_rectangles(np.random.default_rng(seed), count, dim)
    sel, cert = vitali_select(rects, 3.0)
    assert cert.empty
    for i, a in enumerate(sel):
        for b in sel[i + 1 :]:
            assert not overlaps(a, b)
    for r, w in zip(rects, cert.witnesses):
        assert contains(sel[w].dilate(3.0), r)


@settings(max_examples=25, deadline=None)
@given(
    st.lists(st.floats(0.0, 5.0), min_size=4, max_size=4),
    st.floats(0.05, 3.0),
    st.floats(0.05, 3.0),
    st.sampled_from([(0.0, 0.0), (0.5, 1.0), (2.5, 0.3)]),
)
def test_union_inclusion_exclusion(zs, ra, rb, kappa):
    a, b = Rectangle(zs[:2], ra), Rectangle(zs[2:], rb)
    ba, bb = a.bounds(), b.bounds()
    inter = box_mass(np.maximum(ba[:, 0], bb[:, 0]), np.minimum(ba[:, 1], bb[:, 1]), kappa)
    expect = measure_rectangle(a, kappa) + measure_rectangle(b, kappa) - inter
    assert union_measure([a, b], kappa) == pytest.approx(expect, rel=1e-12, abs=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([(0.0,), (1.5,), (0.5, 0.5)]))
def test_union_subadditive_and_monotone(seed, kappa):
    rects = random_rectangles(np.random.default_rng(seed), 20, len(kappa))
    u = union_measure(rects, kappa)
    assert u <= sum(measure_rectangle(r, kappa) for r in rects) * (1 + 1e-12)
    assert u >= union_measure(rects[:10], kappa) * (1 - 1e-12)
    assert union_measure(rects[:1], kappa) == pytest.approx(measure_rectangle(rects[0], kappa), rel=1e-12)


@pytest.mark.parametrize("kappa, n", [((0.5,), 200000), ((1.0, 0.3), 2000)])
def test_union_against_raster(kappa, n):
    rects = random_rectangles(np.random.default_rng(3), 40, len(kappa))
    exact = union_measure(rects, kappa)
    assert raster_union_measure(rects, kappa, n) / exact == pytest.approx(1.0, abs=1e-2)
    with pytest.raises(ValueError):
        union_measure(rects, (0.5, 0.5, 0.5))
    assert union_measure([], kappa) == 0.0


@pytest.mark.parametrize("kappa", [(0.0,), (0.5,), (0.5, 2.0)])
def test_doubling_bound(kappa):
    bound = dilation_doubling_bound(kappa, 5.0)
    origin = Rectangle((0.0,) * len(kappa), 1.0)
    assert bound == pytest.approx(measure_rectangle(origin.dilate(5.0), kappa) / measure_rectangle(origin, kappa))
    rng = np.random.default_rng(0)
    for _ in range(50):
        r = Rectangle(tuple(rng.uniform(0, 10, len(kappa))), float(rng.uniform(0.01, 3)))
        assert measure_rectangle(r.dilate(5.0), kappa) <= bound * measure_rectangle(r, kappa) * (1 + 1e-12)
    C, cert = covering_constant(random_rectangles(rng, 100, len(kappa)), kappa)
    assert cert.empty and 1.0 <= C <= bound
