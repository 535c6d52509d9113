"""Triangle geometry and the product-formula measures nu, nu^+ and upsilon.

All integrals against nu^k_{x,y} are computed in the variable t in [-1, 1] with
z(t) = sqrt(x^2 + y^2 + 2 x y t). Under this substitution
K_k(|x|,|y|,|z|) dmu_k(z) becomes Phi_k(t) dt on each of the two support bands, so
the Jacobi Gauss rule absorbs the Delta^{2k-2} endpoint singularity.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special as sp

from .measure import Multiplicity
from .special import (
    DEFAULT_ORDER,
    QuadratureError,
    build_jacobi_rule,
    dunkl_kernel_1d,
    jacobi_norm_constant,
)


def sigma(x, y, z) -> np.ndarray:
    """sigma_{x,y,z} = (x^2 + y^2 - z^2) / (2xy), and 0 when x = 0 or y = 0."""
    x, y, z = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, z)))
    den = 2.0 * x * y
    safe = np.where(den == 0, 1.0, den)
    return np.where(den == 0, 0.0, (x * x + y * y - z * z) / safe)


def rho(x, y, z) -> np.ndarray:
    """rho(x, y, z) = (1 - sigma_{x,y,z} + sigma_{z,x,y} + sigma_{z,y,x}) / 2."""
    return 0.5 * (1.0 - sigma(x, y, z) + sigma(z, x, y) + sigma(z, y, x))


def triangle_area(a, b, c) -> np.ndarray:
    """Heron's formula; 0 on and outside the degenerate boundary."""
    a, b, c = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, c)))
    # 16 Delta^2 = (2ab)^2 - (a^2 + b^2 - c^2)^2, stable against cancellation
    s16 = (a + b + c) * (-a + b + c) * (a - b + c) * (a + b - c)
    return np.where(s16 > 0, 0.25 * np.sqrt(np.maximum(s16, 0.0)), 0.0)


def kernel_K(kappa: float, x, y, z) -> np.ndarray:
    """K_k(x,y,z) = 2^{2k-2} M_k Delta^{2k-2} / (xyz)^{2k-1} on z in [|x-y|, x+y], else 0."""
    if not kappa > 0:
        raise ValueError("K_kappa needs kappa > 0")
    x, y, z = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, z)))
    inside = (z >= np.abs(x - y)) & (z <= x + y) & (x > 0) & (y > 0) & (z > 0)
    area = triangle_area(x, y, z)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (
            2.0 ** (2 * kappa - 2)
            * jacobi_norm_constant(kappa)
            * area ** (2 * kappa - 2)
            / (x * y * z) ** (2 * kappa - 1)
        )
    return np.where(inside, val, 0.0)


def _times_K(kappa: float, x: float, y: float, z, factor) -> np.ndarray:
    # K blows up like Delta^{2k-2} at the band ends; where ``factor`` vanishes there
    # the product tends to 0 for k > 0
    K = kernel_K(kappa, abs(x), abs(y), np.abs(z))
    with np.errstate(invalid="ignore"):
        return np.where(factor == 0, 0.0, K * factor)


def nu_density(kappa: float, x: float, y: float, z) -> np.ndarray:
    """Density of nu^k_{x,y} with respect to mu_k: K_k(|x|,|y|,|z|) rho(x,y,z)."""
    return _times_K(kappa, x, y, z, rho(x, y, z))


def nu_plus_density(kappa: float, x: float, y: float, z) -> np.ndarray:
    """Density of nu^{k,+}_{x,y} with respect to mu_k: K_k(|x|,|y|,|z|) (1 - sigma_{x,y,z}) / 2."""
    # 1 - sigma_{x,y,z} = (|z| - |x - y|)(|z| + |x - y|) / (2xy), exactly 0 at the band end
    z = np.abs(np.asarray(z, dtype=float))
    d = abs(x - y)
    factor = np.maximum((z - d) * (z + d) / (2.0 * x * y), 0.0) if x * y != 0 else np.ones_like(z)
    return _times_K(kappa, x, y, z, 0.5 * factor)


def support_bands(x: float, y: float):
    """The two closed bands carrying nu^k_{x,y} for x, y != 0."""
    lo, hi = abs(abs(x) - abs(y)), abs(x) + abs(y)
    return (-hi, -lo), (lo, hi)


@functools.lru_cache(maxsize=32)
def _t_rule(kappa: float, order: int):
    if kappa == 0:
        # classical limit Phi_k dt -> delta_{t=1}
        return np.array([1.0]), np.array([1.0])
    rule = build_jacobi_rule(kappa, order)
    return rule.nodes, rule.weights


@dataclass(frozen=True)
class ProductMeasure:
    """nu^k_{x,y} (``variant="full"``) or nu^{k,+}_{x,y} (``variant="positive"``).

    ``discretize`` returns signed point masses (z_i, w_i) reproducing the measure on
    functions that are smooth on each support band.
    """

    kappa: float
    x: float
    y: float
    variant: str = "full"

    def __post_init__(self):
        if self.variant not in ("full", "positive"):
            raise ValueError(f"unknown product-measure variant {self.variant!r}")
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")
        if self.variant == "positive" and (self.x == 0 or self.y == 0):
            raise ValueError("nu^+ is only defined for x, y != 0")

    @property
    def is_point_mass(self) -> bool:
        return self.x == 0 or self.y == 0

    def discretize(self, order: int = DEFAULT_ORDER):
        x, y = float(self.x), float(self.y)
        if self.is_point_mass:
            return np.array([y if x == 0 else x]), np.array([1.0])
        t, w = _t_rule(float(self.kappa), order)
        # scaled so that tiny or huge |x|, |y| do not under- or overflow
        m = max(abs(x), abs(y))
        xs, ys = x / m, y / m
        z = m * np.sqrt(np.maximum(xs * xs + ys * ys + 2.0 * xs * ys * t, 0.0))
        if self.variant == "positive":
            wp = wm = 0.5 * w
        else:
            # rho(x, y, +-z(t)) K dmu = (1 + t)(1 +- (x+y)/z)/2 M(1-t^2)^{k-1} dt
            with np.errstate(divide="ignore", invalid="ignore"):
                a = np.where(z > 0, (xs + ys) / (z / m), 0.0)
            wp, wm = 0.5 * w * (1.0 + a), 0.5 * w * (1.0 - a)
        return np.concatenate([z, -z]), np.concatenate([wp, wm])

    def integrate(self, f: Callable, order: int = DEFAULT_ORDER):
        z, w = self.discretize(order)
        return np.asarray(f(z)) @ w

    def total_variation(self, order: int = DEFAULT_ORDER) -> float:
        _, w = self.discretize(order)
        return float(np.abs(w).sum())


def integrate_nu(kappa: float, x: float, y: float, f: Callable, order: int = DEFAULT_ORDER, check: bool = False):
    """int f dnu^k_{x,y}; point masses at the surviving point when x = 0 or y = 0.

    With ``check=True`` the value is recomputed at double order and a
    QuadratureError naming (kappa, x, y) is raised when the two disagree.
    """
    m = ProductMeasure(kappa, x, y, "full")
    val = m.integrate(f, order)
    if check and not m.is_point_mass:
        ref = m.integrate(f, 2 * order)
        if abs(ref - val) > 1e-8 * max(1.0, abs(ref)):
            raise QuadratureError(f"nu integral not converged for (kappa, x, y)=({kappa}, {x}, {y})")
    return val


def integrate_nu_plus(kappa: float, x: float, y: float, f: Callable, order: int = DEFAULT_ORDER):
    """int f dnu^{k,+}_{x,y}, for x, y != 0."""
    return ProductMeasure(kappa, x, y, "positive").integrate(f, order)


def nu_total_variation(kappa: float, x: float, y: float, order: int = DEFAULT_ORDER) -> float:
    return ProductMeasure(kappa, x, y, "full").total_variation(order)


def product_formula_residual(kappa: float, x: float, y: float, lam: float, order: int = 400) -> float:
    """|E_k(ix, lam) E_k(iy, lam) - int E_k(i lam, z) dnu^k_{x,y}(z)|."""
    lhs = dunkl_kernel_1d(kappa, x, lam) * dunkl_kernel_1d(kappa, y, lam)
    rhs = integrate_nu(kappa, x, y, lambda z: dunkl_kernel_1d(kappa, lam, z), order)
    return float(abs(lhs - rhs))


def nu_plus_mass_below(kappa: float, x, y, r) -> np.ndarray:
    """nu^{k,+}_{x,y}({|z| <= r}) in closed form (vectorised over x, y, r).

    z(t)^2 <= r^2 is a half-line condition on t, so the mass is a value of the
    Phi_k distribution function. Exactly 0 whenever |y| lies outside I(x, r).
    """
    x, y, r = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, r)))
    if np.any(x == 0) or np.any(y == 0):
        raise ValueError("nu^+ needs x, y != 0")
    ax, ay = np.abs(x), np.abs(y)
    outside = (ay >= ax + r) | (ay < ax - r)
    if kappa == 0:
        val = (np.abs(x + y) <= r).astype(float)
        return np.where(outside, 0.0, val)
    p = x * y
    with np.errstate(divide="ignore", invalid="ignore"):
        # u = (1 + t_r)/2 and 1 - u in factored form, free of cancellation near t_r = +-1
        u = (r - x + y) * (r + x - y) / (4.0 * p)
        v = (x + y - r) * (x + y + r) / (4.0 * p)
    u = np.clip(u, 0.0, 1.0)
    v = np.clip(v, 0.0, 1.0)
    # p > 0: mass of {t <= t_r}; p < 0: mass of {t >= t_r}
    val = np.where(p > 0, sp.betainc(kappa + 1.0, kappa, u), sp.betainc(kappa, kappa + 1.0, v))
    return np.where(outside, 0.0, np.clip(val, 0.0, 1.0))


def _tensor_discretization(kappa: Multiplicity, x, y, order: int):
    zs, ws = [], []
    for kj, xj, yj in zip(kappa, x, y):
        z, w = ProductMeasure(kj, xj, yj, "positive").discretize(order)
        zs.append(z)
        ws.append(w)
    return zs, ws


def integrate_upsilon(kappa, x, y, f: Callable, order: int = DEFAULT_ORDER):
    """int f d(upsilon^k_{x,y}), the tensor product of the nu^{k_j,+}_{x_j,y_j}.

    ``f`` takes an array of points with coordinates on the last axis.
    """
    kappa = Multiplicity.coerce(kappa)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x == 0) or np.any(y == 0):
        raise ValueError("upsilon is only defined for regular x, y (no zero coordinate)")
    zs, ws = _tensor_discretization(kappa, x, y, order)
    grids = np.meshgrid(*zs, indexing="ij")
    pts = np.stack(grids, axis=-1)
    wt = functools.reduce(np.multiply.outer, ws)
    return np.sum(np.asarray(f(pts)) * wt)
