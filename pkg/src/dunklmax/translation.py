"""Generalized translations tau_x and the convolution *_k.

Three routes to tau_x are available and cross-checked in the tests:
the explicit one-dimensional integral over t in [-1, 1], the closed-form
nu^+ masses for interval / cube / ball indicators, and the spectral route
F_k(tau_x f) = E_k(ix, .) F_k f on a grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate

from .measure import Multiplicity, measure_interval_array, segment_mass
from .product_formula import integrate_nu, nu_plus_mass_below
from .special import DEFAULT_ORDER, dunkl_kernel_1d, jacobi_norm_constant, phi_cdf
from .transform import (
    GridFunction,
    apply_axis,
    ball_indicator_transform,
    cube_indicator_transform,
    dunkl_transform,
    frequency_norm,
    inverse_transform,
)

DEFAULT_MOLLIFY_T = 1e-4


# -- one-dimensional explicit translation ----------------------------------


def _t_of_z(x: float, y: float, z: float) -> float:
    return (z * z - x * x - y * y) / (2.0 * x * y)


def _phi_pieces(kappa: float, g: Callable, breaks: Sequence[float]) -> float:
    """int_{-1}^{1} g(t) Phi_k(t) dt split at ``breaks``; endpoint singularities go to quad's 'alg' weight."""
    M = jacobi_norm_constant(kappa)
    pts = sorted({-1.0, 1.0, *[b for b in breaks if -1.0 < b < 1.0]})
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        left = kappa if a == -1.0 else 0.0
        right = kappa - 1.0 if b == 1.0 else 0.0

        def h(t, a=a, b=b):
            # the parts of (1+t)^k (1-t)^{k-1} not absorbed by the weight
            v = g(t)
            if a != -1.0:
                v *= (1.0 + t) ** kappa
            if b != 1.0:
                v *= (1.0 - t) ** (kappa - 1.0)
            return v

        val, _ = integrate.quad(h, a, b, weight="alg", wvar=(left, right), epsabs=1e-14, epsrel=1e-13, limit=200)
        total += val
    return M * total


def translate_1d(
    kappa: float,
    f: Callable,
    x: float,
    y: float,
    order: int = DEFAULT_ORDER,
    jumps: Optional[Sequence[float]] = None,
) -> complex:
    """tau_x(f)(y) for kappa >= 0 by the explicit integral against Phi_k(t) dt.

    z(t) = sqrt(x^2 + y^2 + 2xyt); the integrand is
    f(z)(1 + (x+y)/z)/2 + f(-z)(1 - (x+y)/z)/2. Smooth f uses the Jacobi rule of
    ``order`` nodes. For piecewise-smooth f pass the jump locations in ``jumps``;
    the t-integral is then split at the matching breakpoints and done adaptively.
    kappa = 0 is the ordinary shift f(x + y).
    """
    if kappa == 0:
        return f(np.asarray(x + y))
    if x == 0 or y == 0:
        return f(np.asarray(y if x == 0 else x))
    if jumps is None:
        return integrate_nu(kappa, x, y, f, order)
    s = x + y

    def g_part(part):
        def g(t):
            z = math.sqrt(max(x * x + y * y + 2.0 * x * y * t, 0.0))
            if z == 0.0:
                return 0.0
            v = 0.5 * f(np.asarray(z)) * (1.0 + s / z) + 0.5 * f(np.asarray(-z)) * (1.0 - s / z)
            return float(np.real(v) if part == "re" else np.imag(v))

        return g

    breaks = [_t_of_z(x, y, abs(j)) for j in jumps]
    re = _phi_pieces(kappa, g_part("re"), breaks)
    im = _phi_pieces(kappa, g_part("im"), breaks)
    return complex(re, im) if im != 0.0 else re


# -- indicators ------------------------------------------------------------


def _check_regular(*points):
    for p in points:
        if np.any(np.asarray(p, dtype=float) == 0):
            raise ValueError("indicator translations are defined for regular points only (no zero coordinate)")


def translate_indicator_interval(kappa: float, x, y, r) -> np.ndarray:
    """tau_x(chi_[-r, r])(y) as the nu^+_{x,y} mass of [-r, r] (vectorised; exact 0 off I(x, r))."""
    _check_regular(x, y)
    return nu_plus_mass_below(kappa, x, y, r)


def translate_indicator_cube(kappa, x, y, r: float) -> np.ndarray:
    """Product over axes of the interval translations; coordinates on the last axis."""
    kappa = Multiplicity.coerce(kappa)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_regular(x, y)
    out = 1.0
    for j, kj in enumerate(kappa):
        out = out * nu_plus_mass_below(kj, x[..., j], y[..., j], r)
    return out


def _halfspace_probability(kappa: Sequence[float], a: Sequence[float], c: float) -> float:
    """P(sum_j a_j T_j <= c) for independent T_j with density Phi_{k_j} (T_j = 1 when k_j = 0)."""
    kappa, a = list(kappa), list(a)
    # deterministic axes shift the threshold
    for kj, aj in list(zip(kappa, a)):
        if kj == 0:
            c -= aj
    pairs = [(kj, aj) for kj, aj in zip(kappa, a) if kj > 0]
    if not pairs:
        return 1.0 if c >= 0 else 0.0
    if len(pairs) == 1:
        kj, aj = pairs[0]
        if aj == 0:
            return 1.0 if c >= 0 else 0.0
        u = float(phi_cdf(np.asarray(c / aj), kj))
        return u if aj > 0 else 1.0 - u
    (k0, a0), rest = pairs[0], pairs[1:]
    lo = c - sum(abs(aj) for _, aj in rest)
    hi = c + sum(abs(aj) for _, aj in rest)
    if a0 == 0:
        return _halfspace_probability([k for k, _ in rest], [v for _, v in rest], c)
    # the inner probability is 1 for a0 t <= lo and 0 for a0 t >= hi
    breaks = sorted({lo / a0, hi / a0})
    g = lambda t: _halfspace_probability([k for k, _ in rest], [v for _, v in rest], c - a0 * t)
    return _phi_pieces(k0, g, breaks)


def translate_indicator_ball(kappa, x, y, r: float) -> float:
    """tau_x(chi_{B_r})(y) = upsilon_{x,y}(B_r), the tensor nu^+ mass of the closed ball.

    In the t-variables the ball is the half-space sum 2 x_j y_j t_j <= r^2 - |x|^2 - |y|^2,
    so the value is a distribution function of a sum of independent Phi variables.
    """
    kappa = Multiplicity.coerce(kappa)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_regular(x, y)
    if kappa.dim == 1:
        return float(nu_plus_mass_below(kappa[0], x[0], y[0], r))
    a = 2.0 * x * y
    c = r * r - float(x @ x) - float(y @ y)
    val = _halfspace_probability(kappa.kappa, a, c)
    return float(min(max(val, 0.0), 1.0))


def interval_bound_ratio(kappa: float, x, y, r) -> np.ndarray:
    """tau_x(chi_[-r,r])(y) mu(I(x,r)) / mu(]-r, r[); bounded uniformly in (x, y, r)."""
    val = translate_indicator_interval(kappa, x, y, r)
    return val * measure_interval_array(x, r, kappa) / segment_mass(-np.asarray(r), np.asarray(r), kappa)


# -- spectral translation and convolution ----------------------------------


def translate_grid(f: GridFunction, x) -> GridFunction:
    """inverse_transform(E_k(ix, .) F_k f)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.size != f.dim:
        raise ValueError("translation point has the wrong dimension")
    F = dunkl_transform(f)
    mult = 1.0
    for j, g in enumerate(F.grids):
        e = dunkl_kernel_1d(g.kappa, x[j], g.nodes)
        mult = np.multiply.outer(mult, e) if j else e
    return inverse_transform(F.with_values(F.values * mult))


def convolve(f: GridFunction, g: GridFunction) -> GridFunction:
    """f *_k g = inverse_transform(F_k f . F_k g)."""
    if not f.same_grid(g):
        raise ValueError("convolution needs a shared grid")
    Ff, Fg = dunkl_transform(f), dunkl_transform(g)
    return inverse_transform(Ff.with_values(Ff.values * Fg.values))


def convolve_direct_1d(f: GridFunction, g: Callable, x, order: int = DEFAULT_ORDER) -> np.ndarray:
    """(f *_k g)(x) = c_k int f(y) tau_x(g)(-y) dmu_k(y) by direct quadrature (d = 1 only)."""
    from .measure import gaussian_constant_1d

    if f.dim != 1:
        raise ValueError("the direct convolution path is one-dimensional")
    grid = f.grids[0]
    k = grid.kappa
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(x.shape, dtype=complex)
    for i, xi in enumerate(x):
        tau = np.array([translate_1d(k, g, xi, -yk, order) for yk in grid.nodes])
        out[i] = gaussian_constant_1d(k) * np.sum(f.values * tau * grid.mu_weights)
    return out


def mollified_ball_multiplier(r: float, grids, t: float = DEFAULT_MOLLIFY_T) -> np.ndarray:
    """F_k(chi_{B_r} *_k q^t) on the frequency grid."""
    kappa = Multiplicity(tuple(g.kappa for g in grids))
    xi = frequency_norm(grids)
    return ball_indicator_transform(r, kappa, xi) * np.exp(-t * xi * xi)


def mollified_cube_multiplier(r: float, grids, t: float = DEFAULT_MOLLIFY_T) -> np.ndarray:
    xi = frequency_norm(grids)
    return cube_indicator_transform(r, grids) * np.exp(-t * xi * xi)


def mollified_indicator(r: float, grids, shape: str = "ball", t: float = DEFAULT_MOLLIFY_T) -> GridFunction:
    """chi_{B_r} *_k q^t (or the cube version) sampled on ``grids``."""
    mult = mollified_ball_multiplier(r, grids, t) if shape == "ball" else mollified_cube_multiplier(r, grids, t)
    return inverse_transform(GridFunction(grids, mult))


def young_ratio(f: GridFunction, g: GridFunction, p: float, q: float, r: float) -> float:
    """||f *_k g||_r / (||f||_p ||g||_q)."""
    den = f.norm(p) * g.norm(q)
    if den == 0:
        raise ValueError("Young ratio needs nonzero inputs")
    return convolve(f, g).norm(r) / den


def translation_norm_ratio(f: GridFunction, x, p: float) -> float:
    """||tau_x f||_{k,p} / ||f||_{k,p}."""
    n = f.norm(p)
    if n == 0:
        raise ValueError("translation ratio needs a nonzero function")
    return translate_grid(f, x).norm(p) / n


@dataclass(frozen=True)
class TranslationRequest:
    """A translation point and a target; ``evaluate(kappa, y)`` dispatches to the matching route.

    kind is one of "explicit-1d" (payload: callable), "indicator-interval",
    "indicator-cube", "indicator-ball" (payload: radius) or "grid" (payload: GridFunction).
    """

    x: tuple
    kind: str
    payload: object

    KINDS = ("explicit-1d", "indicator-interval", "indicator-cube", "indicator-ball", "grid")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown translation target {self.kind!r}")
        object.__setattr__(self, "x", tuple(float(v) for v in np.atleast_1d(self.x)))
        if self.kind.startswith("indicator"):
            _check_regular(self.x)

    def evaluate(self, kappa, y=None):
        kappa = Multiplicity.coerce(kappa)
        if self.kind == "grid":
            return translate_grid(self.payload, self.x)
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if self.kind == "explicit-1d":
            return translate_1d(kappa[0], self.payload, self.x[0], float(y[0]))
        if self.kind == "indicator-interval":
            return float(translate_indicator_interval(kappa[0], self.x[0], float(y[0]), self.payload))
        if self.kind == "indicator-cube":
            return float(translate_indicator_cube(kappa, np.array(self.x), y, self.payload))
        return translate_indicator_ball(kappa, np.array(self.x), y, self.payload)
