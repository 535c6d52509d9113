"""Jacobi-weight quadrature, normalised Bessel functions, the Dunkl kernel and
the Z_2^d intertwining / Dunkl operators on polynomials."""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Tuple, Union

import numpy as np
from scipy import special as sp

from .measure import Multiplicity

DEFAULT_ORDER = 200
_SERIES_RADIUS = 1.0


class QuadratureError(RuntimeError):
    """A quadrature rule could not be built or did not converge."""


# -- Jacobi weight ---------------------------------------------------------


def jacobi_norm_constant(kappa: float) -> float:
    """M_k = Gamma(k + 1/2) / (Gamma(k) Gamma(1/2)), the mass normaliser of Phi_k."""
    if not kappa > 0:
        raise ValueError("M_kappa is only defined for kappa > 0 (kappa = 0 is the classical limit)")
    return math.exp(sp.gammaln(kappa + 0.5) - sp.gammaln(kappa) - 0.5 * math.log(math.pi))


def phi_density(t, kappa: float) -> np.ndarray:
    """Phi_k(t) = M_k (1 + t) (1 - t^2)^{k - 1} on (-1, 1)."""
    t = np.asarray(t, dtype=float)
    return jacobi_norm_constant(kappa) * (1.0 + t) * (1.0 - t * t) ** (kappa - 1.0)


def phi_cdf(t, kappa: float) -> np.ndarray:
    """int_{-1}^t Phi_k(s) ds.

    Under u = (1 + s)/2 the density Phi_k becomes the Beta(k + 1, k) law, so the
    primitive is a regularised incomplete beta function.
    """
    u = np.clip((np.asarray(t, dtype=float) + 1.0) / 2.0, 0.0, 1.0)
    return sp.betainc(kappa + 1.0, kappa, u)


def phi_sf(t, kappa: float) -> np.ndarray:
    """int_t^1 Phi_k(s) ds, accurate when the tail is far below machine epsilon."""
    v = np.clip((1.0 - np.asarray(t, dtype=float)) / 2.0, 0.0, 1.0)
    return sp.betainc(kappa, kappa + 1.0, v)


def phi_moment(kappa: float, n: int) -> float:
    """Exact moment int t^n Phi_k(t) dt.

    Only the even part of t^n (1 + t) survives, and int t^{2m} (1 - t^2)^{k-1} = B(m + 1/2, k).
    """
    if n < 0:
        raise ValueError("moment order must be >= 0")
    if kappa == 0:
        return 1.0
    m = (n + 1) // 2 if n % 2 else n // 2
    return jacobi_norm_constant(kappa) * math.exp(sp.betaln(m + 0.5, kappa))


@dataclass(frozen=True)
class JacobiRule:
    """Gauss rule for the probability density Phi_k on (-1, 1)."""

    kappa: float
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def order(self) -> int:
        return len(self.nodes)

    def integrate(self, values, axis: int = -1):
        """Contract sampled values (nodes on ``axis``) against the weights."""
        return np.tensordot(np.moveaxis(np.asarray(values), axis, -1), self.weights, axes=([-1], [0]))


@functools.lru_cache(maxsize=64)
def build_jacobi_rule(kappa: float, order: int = DEFAULT_ORDER) -> JacobiRule:
    """Gauss rule for M_k (1 - t)^{k-1} (1 + t)^k, i.e. Jacobi parameters (k - 1, k)."""
    kappa = float(kappa)
    if not kappa > 0:
        raise ValueError("a Jacobi rule needs kappa > 0")
    if order < 1:
        raise ValueError("rule order must be >= 1")
    if kappa - 1.0 <= -1.0:
        raise QuadratureError(f"kappa={kappa!r} is below double resolution of the Jacobi parameter")
    nodes, weights = sp.roots_jacobi(int(order), kappa - 1.0, kappa)
    weights = weights * jacobi_norm_constant(kappa)
    if not (np.all(np.isfinite(nodes)) and np.all(np.isfinite(weights))):
        raise QuadratureError(f"Jacobi eigenvalue solve failed for kappa={kappa}, order={order}")
    if np.any(weights <= 0) or np.any(np.abs(nodes) >= 1.0):
        raise QuadratureError(f"degenerate Jacobi rule for kappa={kappa}, order={order}")
    if abs(weights.sum() - 1.0) > 1e-12:
        raise QuadratureError(f"Jacobi weights sum to {weights.sum()!r}, expected 1")
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return JacobiRule(kappa, nodes, weights)


# -- Bessel ----------------------------------------------------------------


def _bessel_series(alpha: float, z: np.ndarray, terms: int = 30) -> np.ndarray:
    # j_a(z) = Gamma(a+1) sum_k (-z^2/4)^k / (k! Gamma(k + a + 1))
    w = -(z * z) / 4.0
    term = np.ones_like(z)
    out = np.ones_like(z)
    for k in range(1, terms):
        term = term * w / (k * (k + alpha))
        out = out + term
    return out


def normalized_bessel(alpha: float, z) -> np.ndarray:
    """j_a(z) = Gamma(a + 1) (z/2)^{-a} J_a(z), with j_a(0) = 1.

    Power series on |z| <= 1, scipy's ``jv`` elsewhere. Accepts real or complex z.
    """
    if alpha < -0.5:
        raise ValueError("normalised Bessel function needs alpha >= -1/2")
    z = np.asarray(z)
    cplx = np.iscomplexobj(z)
    z = z.astype(complex if cplx else float)
    out = np.empty_like(z)
    small = np.abs(z) <= _SERIES_RADIUS
    out[small] = _bessel_series(alpha, z[small])
    big = ~small
    if np.any(big):
        zb = z[big]
        if not cplx:
            # even function: evaluate on |z| to stay on the real branch
            zb = np.abs(zb)
        out[big] = math.gamma(alpha + 1.0) * (zb / 2.0) ** (-alpha) * sp.jv(alpha, zb)
    return out


def normalized_bessel_i_scaled(alpha: float, s) -> np.ndarray:
    """exp(-|s|) j_a(i s) for real s, i.e. the exponentially scaled modified form."""
    s = np.abs(np.asarray(s, dtype=float))
    out = np.empty_like(s)
    small = s <= _SERIES_RADIUS
    out[small] = np.exp(-s[small]) * _bessel_series(alpha, 1j * s[small]).real
    big = ~small
    sb = s[big]
    out[big] = math.gamma(alpha + 1.0) * (sb / 2.0) ** (-alpha) * sp.ive(alpha, sb)
    return out


# -- Dunkl kernel ----------------------------------------------------------


def dunkl_kernel_1d(kappa: float, x, y, method: str = "bessel", order: int = DEFAULT_ORDER):
    """Rank-one kernel E_k(i x, y) for real x, y (broadcast).

    ``method="bessel"`` uses j_{k-1/2}(xy) + i xy/(2k+1) j_{k+1/2}(xy);
    ``method="quadrature"`` integrates exp(i x y t) against Phi_k.
    kappa = 0 is the Fourier character exp(i x y) for both methods.
    """
    s = np.multiply(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    if kappa == 0:
        return np.exp(1j * s)
    if method == "bessel":
        return normalized_bessel(kappa - 0.5, s) + 1j * s / (2.0 * kappa + 1.0) * normalized_bessel(kappa + 0.5, s)
    if method == "quadrature":
        rule = build_jacobi_rule(kappa, order)
        return np.exp(1j * s[..., None] * rule.nodes) @ rule.weights
    raise ValueError(f"unknown kernel method {method!r}")


def dunkl_kernel(kappa, x, y, method: str = "bessel") -> np.ndarray:
    """E_k(i x, y) = prod_j E_{k_j}(i x_j, y_j); coordinates on the last axis."""
    kappa = Multiplicity.coerce(kappa)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != kappa.dim or y.shape[-1] != kappa.dim:
        raise ValueError("points must have the multiplicity's dimension on the last axis")
    out = 1.0 + 0j
    for j, kj in enumerate(kappa):
        out = out * dunkl_kernel_1d(kj, x[..., j], y[..., j], method=method)
    return np.asarray(out)


def dunkl_kernel_real_scaled(kappa: float, a, b) -> np.ndarray:
    """E_k(a, b) exp(-|ab|) for real a, b (no imaginary unit); positive and <= 1."""
    s = np.multiply(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    if kappa == 0:
        return np.exp(s - np.abs(s))
    return normalized_bessel_i_scaled(kappa - 0.5, s) + s / (2.0 * kappa + 1.0) * normalized_bessel_i_scaled(
        kappa + 0.5, s
    )


# -- polynomials -----------------------------------------------------------


class Polynomial:
    """Sparse real polynomial in ``dim`` variables, stored as {multi-index: coefficient}."""

    def __init__(self, dim: int, terms: Dict[Tuple[int, ...], float] | None = None):
        self.dim = int(dim)
        self.terms: Dict[Tuple[int, ...], float] = {}
        for idx, c in (terms or {}).items():
            idx = tuple(int(a) for a in idx)
            if len(idx) != self.dim or min(idx) < 0:
                raise ValueError(f"bad multi-index {idx} for dimension {self.dim}")
            if c != 0:
                self.terms[idx] = self.terms.get(idx, 0.0) + float(c)

    @classmethod
    def monomial(cls, idx, coeff: float = 1.0) -> "Polynomial":
        return cls(len(idx), {tuple(idx): coeff})

    @classmethod
    def constant(cls, dim: int, c: float = 1.0) -> "Polynomial":
        return cls(dim, {(0,) * dim: c})

    @classmethod
    def random(cls, dim: int, degree: int, rng: np.random.Generator, homogeneous: bool = False) -> "Polynomial":
        terms = {}
        for idx in itertools.product(range(degree + 1), repeat=dim):
            s = sum(idx)
            if s > degree or (homogeneous and s != degree):
                continue
            terms[idx] = rng.standard_normal()
        return cls(dim, terms)

    @property
    def degree(self) -> int:
        return max((sum(i) for i in self.terms), default=0)

    def is_homogeneous(self, n: int) -> bool:
        return all(sum(i) == n for i in self.terms)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1])
        for idx, c in self.terms.items():
            mono = np.ones(x.shape[:-1])
            for j, a in enumerate(idx):
                if a:
                    mono = mono * x[..., j] ** a
            out = out + c * mono
        return out

    def __add__(self, other: "Polynomial") -> "Polynomial":
        out = dict(self.terms)
        for idx, c in other.terms.items():
            out[idx] = out.get(idx, 0.0) + c
        return Polynomial(self.dim, out)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + other.scale(-1.0)

    def scale(self, c: float) -> "Polynomial":
        return Polynomial(self.dim, {i: c * v for i, v in self.terms.items()})

    def derivative(self, k: int) -> "Polynomial":
        out = {}
        for idx, c in self.terms.items():
            if idx[k]:
                new = list(idx)
                new[k] -= 1
                out[tuple(new)] = out.get(tuple(new), 0.0) + c * idx[k]
        return Polynomial(self.dim, out)

    def reflect(self, k: int) -> "Polynomial":
        """f o sigma_k."""
        return Polynomial(self.dim, {i: (-c if i[k] % 2 else c) for i, c in self.terms.items()})

    def max_abs_diff(self, other: "Polynomial") -> float:
        keys = set(self.terms) | set(other.terms)
        return max((abs(self.terms.get(i, 0.0) - other.terms.get(i, 0.0)) for i in keys), default=0.0)

    def __repr__(self):
        return f"Polynomial(dim={self.dim}, terms={self.terms})"


def dunkl_derivative(kappa, k: int, f: Polynomial) -> Polynomial:
    """D_k f = d_k f + k_k (f - f o sigma_k) / x_k, exactly on monomials.

    ``k`` is a zero-based axis index. On x^a the reflection quotient is
    k_k (1 - (-1)^{a_k}) x^{a - e_k}.
    """
    kappa = Multiplicity.coerce(kappa)
    if not 0 <= k < kappa.dim or f.dim != kappa.dim:
        raise ValueError("axis index out of range or dimension mismatch")
    kk = kappa[k]
    out = {}
    for idx, c in f.terms.items():
        a = idx[k]
        if a == 0:
            continue
        factor = a + (2.0 * kk if a % 2 else 0.0)
        new = list(idx)
        new[k] -= 1
        out[tuple(new)] = out.get(tuple(new), 0.0) + c * factor
    return Polynomial(f.dim, out)


# -- intertwining operator -------------------------------------------------


def _axis_rule(kj: float, order: int):
    if kj == 0:
        # classical limit: Phi_k dt -> point mass at t = 1
        return np.array([1.0]), np.array([1.0])
    rule = build_jacobi_rule(kj, order)
    return rule.nodes, rule.weights


def intertwine(kappa, f: Union[Polynomial, Callable], x, order: int | None = None) -> np.ndarray:
    """V_k f(x) = int_{[-1,1]^d} f(x_1 t_1, ..., x_d t_d) prod Phi_{k_j}(t_j) dt by tensor Gauss-Jacobi.

    ``f`` is a Polynomial or a vectorised callable on arrays with coordinates on the
    last axis. Axes with k_j = 0 use the point mass at t_j = 1.
    """
    kappa = Multiplicity.coerce(kappa)
    x = np.asarray(x, dtype=float)
    if order is None:
        # n Gauss nodes are exact up to degree 2n - 1
        order = f.degree // 2 + 1 if isinstance(f, Polynomial) else DEFAULT_ORDER
    if isinstance(f, Polynomial):
        # the tensor rule factorises on monomials: one weighted power sum per axis
        rules = [_axis_rule(kj, order) for kj in kappa]
        out = np.zeros(x.shape[:-1])
        for idx, c in f.terms.items():
            mono = np.full(x.shape[:-1], c)
            for j, a in enumerate(idx):
                if a:
                    t, w = rules[j]
                    mono = mono * (x[..., j] ** a) * float(w @ t**a)
            out = out + mono
        return out
    rules = [_axis_rule(kj, order) for kj in kappa]
    grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    wts = functools.reduce(np.multiply.outer, [r[1] for r in rules])
    pts = x[..., None, :] * np.stack([g.ravel() for g in grids], axis=-1)
    vals = np.asarray(f(pts))
    return vals @ wts.ravel()


def intertwine_polynomial(kappa, f: Polynomial) -> Polynomial:
    """V_k f as a polynomial, from the exact moments of Phi_k."""
    kappa = Multiplicity.coerce(kappa)
    out = {}
    for idx, c in f.terms.items():
        coef = c
        for j, a in enumerate(idx):
            coef *= phi_moment(kappa[j], a)
        out[idx] = coef
    return Polynomial(f.dim, out)
