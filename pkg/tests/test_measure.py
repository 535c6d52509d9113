import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from dunklmax.measure import (
    Ball,
    Cube,
    Interval,
    Multiplicity,
    Rectangle,
    cube_ball_ratio,
    gaussian_constant,
    half_line_mass,
    measure_ball,
    measure_cube,
    measure_interval,
    measure_rectangle,
    measure_region,
    reflect,
    segment_mass,
    sphere_weight_integral,
    weight_h,
)

kappas = st.floats(0.0, 3.0)


def test_multiplicity_rejects_negative_and_empty():
    with pytest.raises(ValueError):
        Multiplicity((0.5, -0.1))
    with pytest.raises(ValueError):
        Multiplicity(())
    k = Multiplicity((1.0, 2.0))
    assert k.dim == 2 and k.gamma == 3.0 and k.homogeneity == 8.0


def test_weight_examples():
    assert weight_h(np.array([3.0, -7.0]), (0.0, 0.0)) == 1.0
    assert weight_h(np.array([2.0]), (1.0,)) == 2.0
    np.testing.assert_allclose(weight_h(np.array([4.0, 6.0]), (1, 2)), 8.0 * weight_h(np.array([2.0, 3.0]), (1, 2)), rtol=1e-12)


@given(st.lists(kappas, min_size=1, max_size=3), st.floats(0.1, 10.0), st.integers(0, 1000))
def test_weight_homogeneity(k, lam, seed):
    kappa = Multiplicity(tuple(k))
    x = np.random.default_rng(seed).uniform(-3, 3, size=kappa.dim)
    np.testing.assert_allclose(weight_h(lam * x, kappa), lam**kappa.gamma * weight_h(x, kappa), rtol=1e-12)


@given(st.lists(kappas, min_size=1, max_size=3), st.integers(0, 1000))
def test_weight_reflection_invariant(k, seed):
    kappa = Multiplicity(tuple(k))
    rng = np.random.default_rng(seed)
    x = rng.uniform(-3, 3, size=kappa.dim)
    signs = rng.choice([-1, 1], size=kappa.dim)
    np.testing.assert_allclose(weight_h(reflect(x, signs), kappa), weight_h(x, kappa), rtol=1e-14)


def test_cube_examples():
    assert measure_cube(1.0, (0.0,)) == pytest.approx(2.0, rel=1e-14)
    assert measure_cube(1.0, (1.0, 1.0)) == pytest.approx(4.0 / 9.0, rel=1e-14)
    oracle = integrate.quad(lambda t: abs(t), -2, 2, points=[0])[0]
    assert measure_cube(2.0, (0.5,)) == pytest.approx(oracle, rel=1e-12)


def test_sphere_examples():
    assert sphere_weight_integral((0.0, 0.0)) == pytest.approx(2 * math.pi, rel=1e-14)
    # independent mpmath quadrature of the angular integrals
    assert sphere_weight_integral((1.0, 1.0)) == pytest.approx(0.78539816339744831, rel=1e-13)
    assert sphere_weight_integral((0.5, 2.5)) == pytest.approx(0.66666666666666667, rel=1e-13)
    assert sphere_weight_integral((0.3, 0.0)) == pytest.approx(4.5985756368959396, rel=1e-13)
    assert sphere_weight_integral((1.7,)) == 2.0


def test_ball_examples():
    assert measure_ball(1.0, (0.0,)) == pytest.approx(measure_cube(1.0, (0.0,)), rel=1e-14)
    assert measure_ball(1.0, (0.0, 0.0)) == pytest.approx(math.pi, rel=1e-14)
    assert measure_ball(1.0, (1.0, 1.0)) == pytest.approx(math.pi / 24, rel=1e-13)
    assert measure_ball(1.0, (0.3, 0.0)) == pytest.approx(1.768682937267669, rel=1e-13)


def test_interval_examples():
    assert measure_interval(Interval(0.0, 1.0), 0.0) == pytest.approx(1.0)
    assert measure_interval(Interval(5.0, 1.0), 0.0) == pytest.approx(2.0)
    assert measure_interval(Interval(2.0, 1.0), 1.0) == pytest.approx(26.0 / 3.0, rel=1e-14)
    assert measure_interval(Interval(-1.45, 0.75), 1.3) == pytest.approx(4.6700771308998432, rel=1e-13)


def test_rectangle_examples():
    assert measure_rectangle(Rectangle((0.0, 0.0), 1.0), (0, 0)) == pytest.approx(1.0)
    assert measure_rectangle(Rectangle((5.0, 5.0), 1.0), (0, 0)) == pytest.approx(4.0)
    assert measure_rectangle(Rectangle((2.0, 0.0), 1.0), (1, 1)) == pytest.approx(26.0 / 9.0, rel=1e-14)


def test_region_dispatch():
    k = (0.5, 1.0)
    assert measure_region(Cube(1.5), k) == measure_cube(1.5, k)
    assert measure_region(Ball(1.5), k) == measure_ball(1.5, k)
    with pytest.raises(ValueError):
        Cube(-1.0)


def test_cube_ball_ratio_examples():
    assert cube_ball_ratio((0.7,)) == pytest.approx(1.0, rel=1e-14)
    assert cube_ball_ratio((0.0, 0.0)) == pytest.approx(4 / math.pi, rel=1e-14)
    assert cube_ball_ratio((1.0, 1.0)) == pytest.approx(32 / (3 * math.pi), rel=1e-13)


def test_gaussian_constant_examples():
    assert gaussian_constant((0.0,)) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-14)
    assert gaussian_constant((0.0, 0.0)) == pytest.approx(1 / (2 * math.pi), rel=1e-14)
    assert gaussian_constant((1.0,)) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-14)
    # mpmath oracle values
    assert gaussian_constant((0.3,)) == pytest.approx(0.49332977051471607, rel=1e-13)
    assert gaussian_constant((1.3,)) == pytest.approx(0.30833110657169753, rel=1e-13)
    assert gaussian_constant((2.5,)) == pytest.approx(0.0625, rel=1e-13)


@given(st.lists(kappas, min_size=1, max_size=3), st.floats(0.01, 50.0), st.floats(0.1, 10.0))
def test_volume_scaling(k, r, lam):
    kappa = Multiplicity(tuple(k))
    a = kappa.homogeneity
    np.testing.assert_allclose(measure_cube(lam * r, kappa), lam**a * measure_cube(r, kappa), rtol=1e-10)
    np.testing.assert_allclose(measure_ball(lam * r, kappa), lam**a * measure_ball(r, kappa), rtol=1e-10)


@given(st.lists(kappas, min_size=1, max_size=3), st.floats(0.01, 20.0))
def test_ball_inside_cube(k, r):
    kappa = Multiplicity(tuple(k))
    assert measure_ball(r, kappa) <= measure_cube(r, kappa) * (1 + 1e-12)


@given(kappas, st.floats(0.0, 20.0), st.floats(0.0, 20.0), st.floats(0.0, 20.0))
def test_segment_mass_additive(k, a, b, c):
    lo, mid, hi = sorted([a, b, c])
    total = segment_mass(lo, hi, k)
    np.testing.assert_allclose(segment_mass(lo, mid, k) + segment_mass(mid, hi, k), total, rtol=1e-11, atol=1e-300)
    assert total >= 0


@settings(max_examples=30)
@given(kappas, st.floats(0.0, 5.0), st.floats(0.01, 3.0))
def test_interval_matches_quadrature(k, x, r):
    iv = Interval(x, r)
    oracle = integrate.quad(lambda t: t ** (2 * k), iv.lo, iv.hi, epsabs=0, epsrel=1e-12)[0]
    np.testing.assert_allclose(measure_interval(iv, k), oracle, rtol=1e-9)


def test_half_line_mass_monotone():
    a = np.linspace(0, 10, 50)
    m = half_line_mass(a, 0.8)
    assert np.all(np.diff(m) > 0) and m[0] == 0
