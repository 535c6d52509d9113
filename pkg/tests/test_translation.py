import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dunklmax.measure import gaussian_constant
from dunklmax.product_formula import integrate_nu, integrate_nu_plus, integrate_upsilon
from dunklmax.transform import GridFunction, dunkl_transform, heat_kernel, make_grids, translated_heat_kernel
from dunklmax.translation import (
    TranslationRequest,
    convolve,
    convolve_direct_1d,
    interval_bound_ratio,
    translate_1d,
    translate_grid,
    translate_indicator_ball,
    translate_indicator_cube,
    translate_indicator_interval,
    translation_norm_ratio,
    young_ratio,
)

nonzero = st.floats(0.1, 5.0).flatmap(lambda a: st.sampled_from([a, -a]))
kappas = st.sampled_from([0.3, 0.5, 1.0, 2.5])


@pytest.fixture(scope="module")
def g1():
    return make_grids((0.5,), size=256)


def test_translate_1d_examples():
    f = lambda z: np.exp(-((z - 0.3) ** 2)) * (1 + z)
    for k in (0.0, 0.5, 2.5):
        assert translate_1d(k, f, 0.0, 1.7) == pytest.approx(f(1.7))
    assert translate_1d(0.0, f, 0.6, 1.1) == pytest.approx(f(1.7))
    t = 0.4
    for x, y in [(0.8, -1.3), (-2.0, 0.5), (1.5, 1.5)]:
        closed = translated_heat_kernel(t, np.array([x]), np.array([y]), (1.0,))
        mine = np.real(translate_1d(1.0, lambda z: (2 * t) ** -1.5 * np.exp(-z * z / (4 * t)), x, y))
        assert mine == pytest.approx(float(closed), rel=1e-8)


@settings(max_examples=30, deadline=None)
@given(kappas, nonzero, nonzero, st.floats(0.1, 4.0))
def test_indicator_routes_agree(kappa, x, y, r):
    chi = lambda z: (np.abs(z) <= r).astype(float)
    direct = float(translate_indicator_interval(kappa, x, y, r))
    rosler = float(np.real(translate_1d(kappa, chi, x, y, jumps=[r])))
    assert direct == pytest.approx(rosler, abs=1e-8)
    assert direct >= 0
    if abs(y) >= abs(x) + r or abs(y) < abs(x) - r:
        assert direct == 0.0


@settings(max_examples=30, deadline=None)
@given(kappas, nonzero, nonzero)
def test_even_functions_see_nu_plus(kappa, x, y):
    f = lambda z: np.exp(-0.3 * z * z) * np.cos(z)
    assert translate_1d(kappa, f, x, y) == pytest.approx(integrate_nu_plus(kappa, x, y, f), abs=1e-9)


def test_interval_bound_ratio_bounded():
    rng = np.random.default_rng(0)
    x = rng.uniform(0.05, 10, 500) * rng.choice([-1, 1], 500)
    y = rng.uniform(0.05, 10, 500) * rng.choice([-1, 1], 500)
    r = np.exp(rng.uniform(np.log(0.05), np.log(5), 500))
    for k in (0.3, 1.0, 2.5):
        v = interval_bound_ratio(k, x, y, r)
        assert np.all(np.isfinite(v)) and v.max() < 50


def test_cube_examples():
    k = (0.5, 1.5)
    x = np.array([1.0, -2.0])
    assert translate_indicator_cube(k, x, np.array([0.7, 9.0]), 1.0) == 0.0
    assert float(translate_indicator_cube((0.8,), np.array([1.3]), np.array([-0.9]), 0.6)) == pytest.approx(
        float(translate_indicator_interval(0.8, 1.3, -0.9, 0.6))
    )
    # classical limit is the ordinary shift
    assert translate_indicator_cube((0, 0), x, np.array([-0.3, 2.5]), 1.0) == 1.0
    assert translate_indicator_cube((0, 0), x, np.array([0.3, 1.9]), 1.0) == 0.0
    with pytest.raises(ValueError):
        translate_indicator_cube(k, np.array([0.0, 1.0]), x, 1.0)


def test_ball_examples():
    assert translate_indicator_ball((0.8,), np.array([1.3]), np.array([-0.9]), 0.6) == pytest.approx(
        float(translate_indicator_interval(0.8, 1.3, -0.9, 0.6))
    )
    k = (0.5, 1.0)
    x, y = np.array([1.0, -0.5]), np.array([0.7, 0.8])
    assert translate_indicator_ball(k, x, y, 10.0) == pytest.approx(1.0)
    rng = np.random.default_rng(2)
    for _ in range(20):
        x = rng.uniform(0.1, 3, 2) * rng.choice([-1, 1], 2)
        y = rng.uniform(0.1, 3, 2) * rng.choice([-1, 1], 2)
        r = rng.uniform(0.3, 3)
        b = translate_indicator_ball(k, x, y, r)
        c = float(translate_indicator_cube(k, x, y, r))
        assert -1e-14 <= b <= c + 1e-12


def test_ball_against_upsilon_quadrature():
    k = (0.5, 1.0)
    x, y, r = np.array([1.0, -0.5]), np.array([0.7, 0.8]), 1.2
    brute = integrate_upsilon(k, x, y, lambda p: (np.sum(p * p, axis=-1) <= r * r).astype(float), order=1500)
    assert translate_indicator_ball(k, x, y, r) == pytest.approx(brute, abs=2e-3)


def test_translate_grid_examples(g1):
    x = g1[0].nodes
    f = GridFunction(g1, np.exp(-((x - 1) ** 2)))
    np.testing.assert_allclose(translate_grid(f, [0.0]).values, f.values, atol=1e-10)
    g512 = make_grids((0.5,), size=512)
    q = heat_kernel(0.5, (0.5,), g512)
    for x0 in (-2.3, 0.9):
        closed = translated_heat_kernel(0.5, np.array([x0]), q.points(), (0.5,))
        spectral = np.real(translate_grid(q, [x0]).values)
        assert np.max(np.abs(spectral - closed)) / np.max(closed) <= 1e-5
    with pytest.raises(ValueError):
        translate_grid(f, [1.0, 2.0])


def test_translated_heat_kernel_examples():
    k = (0.5, 1.0)
    rng = np.random.default_rng(4)
    y = rng.normal(size=(50, 2)) * 3
    np.testing.assert_allclose(
        translated_heat_kernel(0.3, np.zeros(2), y, k), (0.6) ** (-2.5) * np.exp(-np.sum(y * y, -1) / 1.2), rtol=1e-13
    )
    x = rng.normal(size=(50, 2)) * 3
    assert np.all(translated_heat_kernel(0.3, x, y, k) > 0)
    q = heat_kernel(0.5, k, make_grids(k, size=128))
    for x0 in ([1.2, -0.4], [-2.5, 3.0]):
        mass = np.sum(translated_heat_kernel(0.5, np.array(x0), q.points(), k) * q.weights())
        assert mass * gaussian_constant(k) == pytest.approx(1.0, rel=1e-6)


def test_norm_ratio_bounded(g1):
    x = g1[0].nodes
    f = GridFunction(g1, np.exp(-(x**2)) * (1 + x))
    for p in (1, 2, 4):
        vals = [translation_norm_ratio(f, [x0], p) for x0 in (-3.0, 0.5, 2.0)]
        assert all(np.isfinite(vals)) and max(vals) < 10


def test_convolution_properties(g1):
    x = g1[0].nodes
    f = GridFunction(g1, np.exp(-((x - 0.5) ** 2)))
    g = GridFunction(g1, x * np.exp(-(x**2) / 2))
    fg = convolve(f, g)
    np.testing.assert_allclose(dunkl_transform(fg).values, dunkl_transform(f).values * dunkl_transform(g).values, atol=1e-8)
    np.testing.assert_allclose(fg.values, convolve(g, f).values, atol=1e-10)
    # heat semigroup
    qs = convolve(heat_kernel(0.3, (0.5,), g1), heat_kernel(0.6, (0.5,), g1))
    ref = heat_kernel(0.9, (0.5,), g1)
    assert (qs - ref).norm(2) / ref.norm(2) <= 1e-4
    assert np.isfinite(young_ratio(f, g, 1.0, 2.0, 2.0))
    assert np.isfinite(young_ratio(f, g, 2.0, 2.0, np.inf))


def test_direct_convolution_matches_spectral():
    grids = make_grids((1.0,), size=128, half_width=10.0)
    x = grids[0].nodes
    f = GridFunction(grids, np.exp(-((x - 0.5) ** 2)))
    gfun = lambda z: np.exp(-np.asarray(z) ** 2 / 2)
    spectral = convolve(f, GridFunction(grids, gfun(x)))
    pts = x[[40, 64, 90]]
    np.testing.assert_allclose(convolve_direct_1d(f, gfun, pts, order=60), spectral.values[[40, 64, 90]], atol=1e-8)


def test_translation_request_dispatch(g1):
    r = TranslationRequest((1.0,), "indicator-interval", 0.8)
    assert r.evaluate((0.5,), [0.6]) == pytest.approx(float(translate_indicator_interval(0.5, 1.0, 0.6, 0.8)))
    with pytest.raises(ValueError):
        TranslationRequest((0.0,), "indicator-interval", 0.8)
    with pytest.raises(ValueError):
        TranslationRequest((1.0,), "nonsense", None)
