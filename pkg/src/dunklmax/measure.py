"""Weights, volumes and normalisation constants for the measure h_k^2 dx on R^d."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.special import gammaln


@dataclass(frozen=True)
class Multiplicity:
    """The vector kappa = (kappa_1, ..., kappa_d) of nonnegative parameters."""

    kappa: tuple

    def __post_init__(self):
        k = tuple(float(v) for v in np.atleast_1d(self.kappa))
        if len(k) == 0:
            raise ValueError("multiplicity needs at least one entry")
        for v in k:
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"multiplicity entries must be finite and >= 0, got {v}")
        object.__setattr__(self, "kappa", k)

    @property
    def dim(self) -> int:
        return len(self.kappa)

    @property
    def gamma(self) -> float:
        return float(sum(self.kappa))

    @property
    def homogeneity(self) -> float:
        """Scaling exponent 2*gamma + d of every volume."""
        return 2.0 * self.gamma + self.dim

    def __getitem__(self, j):
        return self.kappa[j]

    def __iter__(self):
        return iter(self.kappa)

    def __len__(self):
        return len(self.kappa)

    @classmethod
    def coerce(cls, kappa) -> "Multiplicity":
        if isinstance(kappa, cls):
            return kappa
        return cls(tuple(np.atleast_1d(kappa)))


# -- regions ---------------------------------------------------------------


def _check_radius(r):
    if not (r > 0 and math.isfinite(r)):
        raise ValueError(f"radius must be a positive finite real, got {r}")


@dataclass(frozen=True)
class Cube:
    """Q_r = {|x_j| < r for all j}."""

    r: float

    def __post_init__(self):
        _check_radius(self.r)


@dataclass(frozen=True)
class Ball:
    """Euclidean ball of radius r centred at the origin."""

    r: float

    def __post_init__(self):
        _check_radius(self.r)


@dataclass(frozen=True)
class Interval:
    """I(x, r) = [max(0, |x| - r), |x| + r) on the half line."""

    x: float
    r: float

    def __post_init__(self):
        _check_radius(self.r)

    @property
    def lo(self) -> float:
        return max(0.0, abs(self.x) - self.r)

    @property
    def hi(self) -> float:
        return abs(self.x) + self.r

    def contains(self, t) -> np.ndarray:
        t = np.abs(np.asarray(t, dtype=float))
        return (t >= self.lo) & (t < self.hi)


@dataclass(frozen=True)
class Rectangle:
    """R(z, r) = I(z_1, r) x ... x I(z_d, r), a box in the closed positive orthant."""

    z: tuple
    r: float

    def __post_init__(self):
        _check_radius(self.r)
        object.__setattr__(self, "z", tuple(float(v) for v in np.atleast_1d(self.z)))

    @property
    def dim(self) -> int:
        return len(self.z)

    def intervals(self):
        return [Interval(zj, self.r) for zj in self.z]

    def bounds(self) -> np.ndarray:
        """Array of shape (d, 2) with the half-open [lo, hi) limits per axis."""
        return np.array([[iv.lo, iv.hi] for iv in self.intervals()])

    def dilate(self, factor: float) -> "Rectangle":
        return Rectangle(self.z, self.r * factor)


RegionDescriptor = Union[Cube, Ball, Interval, Rectangle]


# -- weight and volumes ----------------------------------------------------


def weight_h(x, kappa) -> np.ndarray:
    """h_k(x) = prod_j |x_j|^{k_j}; the last axis of ``x`` indexes coordinates."""
    kappa = Multiplicity.coerce(kappa)
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != kappa.dim:
        raise ValueError(f"point dimension {x.shape[-1]} != multiplicity dimension {kappa.dim}")
    out = np.ones(x.shape[:-1])
    for j, kj in enumerate(kappa):
        if kj > 0:
            out = out * np.abs(x[..., j]) ** kj
    return out


def weight_h2_1d(t, kappa_j: float) -> np.ndarray:
    """Density |t|^{2 kappa_j} of the one-dimensional factor of mu_k."""
    t = np.asarray(t, dtype=float)
    if kappa_j == 0:
        return np.ones_like(t)
    return np.abs(t) ** (2.0 * kappa_j)


def _log_half_line_mass(a, kappa_j: float):
    # log of int_0^a t^{2k} dt = a^{2k+1} / (2k+1)
    e = 2.0 * kappa_j + 1.0
    return e * np.log(a) - np.log(e)


def half_line_mass(a, kappa_j: float) -> np.ndarray:
    """mu_{k_j}([0, a)) for a >= 0 (vectorised)."""
    a = np.asarray(a, dtype=float)
    e = 2.0 * kappa_j + 1.0
    return np.where(a > 0, np.abs(a) ** e / e, 0.0)


def segment_mass(lo, hi, kappa_j: float) -> np.ndarray:
    """mu_{k_j}([lo, hi)) for arbitrary real lo <= hi (vectorised, crosses 0 correctly)."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    e = 2.0 * kappa_j + 1.0
    # signed primitive F(t) = sign(t) |t|^e / e
    F = lambda t: np.sign(t) * np.abs(t) ** e / e
    return np.maximum(F(hi) - F(lo), 0.0)


def log_measure_cube(r: float, kappa) -> float:
    kappa = Multiplicity.coerce(kappa)
    _check_radius(r)
    return sum(math.log(2.0) + float(_log_half_line_mass(r, kj)) for kj in kappa)


def measure_cube(r: float, kappa) -> float:
    """mu_k(Q_r) = 2^d prod_j r^{2k_j+1} / (2k_j+1)."""
    return math.exp(log_measure_cube(r, kappa))


def sphere_weight_integral(kappa) -> float:
    """Integral of h_k^2 over the unit sphere S^{d-1}.

    Evaluated with the Dirichlet closed form 2 prod Gamma(k_j + 1/2) / Gamma(gamma + d/2).
    For d = 1 this gives 2, i.e. the counting measure of {-1, 1}, which keeps the
    polar-coordinates formula for ball volumes uniform in d.
    """
    kappa = Multiplicity.coerce(kappa)
    return math.exp(_log_sphere_weight_integral(kappa))


def _log_sphere_weight_integral(kappa: Multiplicity) -> float:
    return math.log(2.0) + sum(gammaln(kj + 0.5) for kj in kappa) - gammaln(kappa.gamma + kappa.dim / 2.0)


def log_measure_ball(r: float, kappa) -> float:
    kappa = Multiplicity.coerce(kappa)
    _check_radius(r)
    e = kappa.homogeneity
    return _log_sphere_weight_integral(kappa) - math.log(e) + e * math.log(r)


def measure_ball(r: float, kappa) -> float:
    """mu_k(B_r) = r^{2 gamma + d} / (2 gamma + d) * int_{S^{d-1}} h_k^2."""
    return math.exp(log_measure_ball(r, kappa))


def measure_interval(interval: Interval, kappa_j: float) -> float:
    """mu_{k_j}(I(x, r)) as a subset of [0, inf)."""
    return float(half_line_mass(interval.hi, kappa_j) - half_line_mass(interval.lo, kappa_j))


def measure_interval_array(x, r, kappa_j: float) -> np.ndarray:
    """Vectorised mu_{k_j}(I(x, r)) over broadcast arrays x and r."""
    x = np.abs(np.asarray(x, dtype=float))
    r = np.asarray(r, dtype=float)
    return half_line_mass(x + r, kappa_j) - half_line_mass(np.maximum(x - r, 0.0), kappa_j)


def measure_rectangle(rect: Rectangle, kappa) -> float:
    """mu_k(R(z, r)) = prod_j mu_{k_j}(I(z_j, r))."""
    kappa = Multiplicity.coerce(kappa)
    if rect.dim != kappa.dim:
        raise ValueError("rectangle and multiplicity dimensions differ")
    out = 1.0
    for iv, kj in zip(rect.intervals(), kappa):
        out *= measure_interval(iv, kj)
    return out


def measure_region(region: RegionDescriptor, kappa) -> float:
    kappa = Multiplicity.coerce(kappa)
    if isinstance(region, Cube):
        return measure_cube(region.r, kappa)
    if isinstance(region, Ball):
        return measure_ball(region.r, kappa)
    if isinstance(region, Interval):
        if kappa.dim != 1:
            raise ValueError("an interval needs a one-dimensional multiplicity")
        return measure_interval(region, kappa[0])
    if isinstance(region, Rectangle):
        return measure_rectangle(region, kappa)
    raise TypeError(f"unknown region {region!r}")


def cube_ball_ratio(kappa) -> float:
    """Constant C with mu_k(Q_r) = C mu_k(B_r) for every r > 0."""
    kappa = Multiplicity.coerce(kappa)
    log_c = (
        kappa.dim * math.log(2.0)
        + math.log(kappa.homogeneity)
        - sum(math.log(2.0 * kj + 1.0) for kj in kappa)
        - _log_sphere_weight_integral(kappa)
    )
    return math.exp(log_c)


def gaussian_constant_1d(kappa_j: float) -> float:
    """c_{k_j} with 1 / c_{k_j} = int_R exp(-x^2/2) |x|^{2 k_j} dx = 2^{k_j+1/2} Gamma(k_j + 1/2)."""
    return math.exp(-(kappa_j + 0.5) * math.log(2.0) - gammaln(kappa_j + 0.5))


def gaussian_constant(kappa) -> float:
    """c_k = prod_j c_{k_j}."""
    kappa = Multiplicity.coerce(kappa)
    return math.prod(gaussian_constant_1d(kj) for kj in kappa)


def reflect(x, signs: Sequence[int]) -> np.ndarray:
    """Apply the sign changes (eps_1 x_1, ..., eps_d x_d)."""
    return np.asarray(x, dtype=float) * np.asarray(signs, dtype=float)
