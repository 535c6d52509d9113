"""Tensor grids on R^d_reg, the Dunkl transform by dense quadrature, and the
heat / Poisson kernels with their dilation structure."""

from __future__ import annotations

import csv
import functools
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate
from scipy import special as sp

from .measure import (
    Multiplicity,
    gaussian_constant,
    gaussian_constant_1d,
    measure_ball,
    segment_mass,
    sphere_weight_integral,
)
from .special import dunkl_kernel_1d, dunkl_kernel_real_scaled, normalized_bessel

DEFAULT_HALF_WIDTH = 12.0
DEFAULT_SIZE = 512
GRID_KINDS = ("gauss", "uniform")


# -- grids -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Grid1D:
    """Symmetric node set on [-L, L] with no node at 0.

    ``mu_weights`` integrate against |t|^{2k} dt. ``cell_edges`` split the line at 0
    and midway between neighbouring nodes; ``cell_measures`` are the exact mu_k
    masses of those cells (used for rasterised integrals and level sets).

    kind="gauss": Gauss-Jacobi nodes for t^{2k} on (0, L], mirrored. Spectrally
    accurate for smooth integrands despite the |t|^{2k} kink at 0.
    kind="uniform": cell-centred nodes, weights equal to the cell masses.
    """

    kappa: float
    size: int
    half_width: float
    kind: str = "gauss"
    nodes: np.ndarray = field(init=False, repr=False)
    mu_weights: np.ndarray = field(init=False, repr=False)
    cell_edges: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.kind not in GRID_KINDS:
            raise ValueError(f"grid kind must be one of {GRID_KINDS}")
        if self.size < 2 or self.size % 2:
            raise ValueError("grid size must be an even integer >= 2 (keeps 0 off the grid)")
        if not self.half_width > 0:
            raise ValueError("half width must be positive")
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")
        nodes, weights, edges = _build_grid(float(self.kappa), int(self.size), float(self.half_width), self.kind)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "mu_weights", weights)
        object.__setattr__(self, "cell_edges", edges)

    @property
    def key(self):
        return (float(self.kappa), int(self.size), float(self.half_width), self.kind)

    def __eq__(self, other):
        return isinstance(other, Grid1D) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    @property
    def cell_measures(self) -> np.ndarray:
        return segment_mass(self.cell_edges[:-1], self.cell_edges[1:], self.kappa)

    @property
    def spacing(self) -> float:
        """Typical node spacing 2L / N."""
        return 2.0 * self.half_width / self.size

    def refined(self, factor: int = 2) -> "Grid1D":
        return Grid1D(self.kappa, self.size * factor, self.half_width, self.kind)


@functools.lru_cache(maxsize=64)
def _build_grid(kappa: float, n: int, L: float, kind: str):
    half = n // 2
    if kind == "gauss":
        s, w = sp.roots_jacobi(half, 0.0, 2.0 * kappa)
        t = L * (1.0 + s) / 2.0
        w = w * (L / 2.0) ** (2.0 * kappa + 1.0)
        mids = 0.5 * (t[1:] + t[:-1])
        pos_edges = np.concatenate([[0.0], mids, [L]])
    else:
        h = L / half
        t = (np.arange(half) + 0.5) * h
        pos_edges = np.arange(half + 1) * h
        w = segment_mass(pos_edges[:-1], pos_edges[1:], kappa)
    nodes = np.concatenate([-t[::-1], t])
    weights = np.concatenate([w[::-1], w])
    edges = np.concatenate([-pos_edges[::-1], pos_edges[1:]])
    for a in (nodes, weights, edges):
        a.setflags(write=False)
    return nodes, weights, edges


def make_grids(kappa, size: int = DEFAULT_SIZE, half_width: float = DEFAULT_HALF_WIDTH, kind: str = "gauss"):
    kappa = Multiplicity.coerce(kappa)
    return tuple(Grid1D(kj, size, half_width, kind) for kj in kappa)


def _outer(arrays):
    return functools.reduce(np.multiply.outer, arrays)


class GridFunction:
    """Samples of a function on a tensor grid; axis j of ``values`` runs over ``grids[j].nodes``."""

    def __init__(self, grids: Sequence[Grid1D], values):
        self.grids = tuple(grids)
        values = np.asarray(values)
        shape = tuple(g.size for g in self.grids)
        if values.shape != shape:
            raise ValueError(f"values shape {values.shape} does not match grid shape {shape}")
        self.values = values

    @classmethod
    def from_callable(cls, grids: Sequence[Grid1D], f: Callable) -> "GridFunction":
        grids = tuple(grids)
        pts = np.stack(np.meshgrid(*[g.nodes for g in grids], indexing="ij"), axis=-1)
        return cls(grids, f(pts))

    @property
    def kappa(self) -> Multiplicity:
        return Multiplicity(tuple(g.kappa for g in self.grids))

    @property
    def dim(self) -> int:
        return len(self.grids)

    @property
    def shape(self):
        return self.values.shape

    def points(self) -> np.ndarray:
        return np.stack(np.meshgrid(*[g.nodes for g in self.grids], indexing="ij"), axis=-1)

    def weights(self, measure: str = "quadrature") -> np.ndarray:
        if measure == "quadrature":
            return _outer([g.mu_weights for g in self.grids])
        if measure == "cell":
            return _outer([g.cell_measures for g in self.grids])
        raise ValueError(f"unknown measure {measure!r}")

    def integral(self, measure: str = "quadrature"):
        return np.sum(self.values * self.weights(measure))

    def norm(self, p: float = 2.0, measure: str = "quadrature") -> float:
        """||f||_{k,p} with the grid's mu_k weights; p = inf is the max modulus."""
        a = np.abs(self.values)
        if math.isinf(p):
            return float(a.max())
        return float(np.sum(a**p * self.weights(measure)) ** (1.0 / p))

    def same_grid(self, other: "GridFunction") -> bool:
        return self.grids == other.grids

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grids, values)

    def abs(self) -> "GridFunction":
        return self.with_values(np.abs(self.values))

    def real(self) -> "GridFunction":
        return self.with_values(np.real(self.values))

    def _coerce(self, other):
        if isinstance(other, GridFunction):
            if not self.same_grid(other):
                raise ValueError("grid functions live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return self.with_values(self.values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self.with_values(self.values - self._coerce(other))

    def __mul__(self, other):
        return self.with_values(self.values * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)

    def __repr__(self):
        return f"GridFunction(kappa={self.kappa.kappa}, shape={self.shape})"

    # serialisation: one row per grid point, C order (last axis fastest)
    def to_csv(self, path_or_buf=None) -> Optional[str]:
        buf = io.StringIO()
        buf.write(f"# dim={self.dim}\n")
        for j, g in enumerate(self.grids):
            buf.write(f"# axis={j} kind={g.kind} kappa={g.kappa!r} size={g.size} half_width={g.half_width!r}\n")
        w = csv.writer(buf, lineterminator="\n")
        idx_cols = [f"i{j}" for j in range(self.dim)]
        x_cols = [f"x{j}" for j in range(self.dim)]
        w.writerow(idx_cols + x_cols + ["mu_weight", "re", "im"])
        wts = self.weights().ravel()
        vals = np.asarray(self.values, dtype=complex).ravel()
        for flat, index in enumerate(np.ndindex(*self.shape)):
            xs = [repr(float(self.grids[j].nodes[i])) for j, i in enumerate(index)]
            w.writerow(
                list(index) + xs + [repr(float(wts[flat])), repr(float(vals[flat].real)), repr(float(vals[flat].imag))]
            )
        text = buf.getvalue()
        if path_or_buf is None:
            return text
        if hasattr(path_or_buf, "write"):
            path_or_buf.write(text)
        else:
            with open(path_or_buf, "w") as fh:
                fh.write(text)
        return None

    @classmethod
    def from_csv(cls, path_or_text) -> "GridFunction":
        if isinstance(path_or_text, str) and path_or_text.startswith("# dim="):
            text = path_or_text
        else:
            with open(path_or_text) as fh:
                text = fh.read()
        lines = text.splitlines()
        dim = int(lines[0].split("=")[1])
        grids = []
        for line in lines[1 : 1 + dim]:
            kv = dict(item.split("=") for item in line[2:].split())
            grids.append(Grid1D(float(kv["kappa"]), int(kv["size"]), float(kv["half_width"]), kv["kind"]))
        rows = list(csv.reader(lines[2 + dim :]))
        data = np.array([[float(v) for v in row[-2:]] for row in rows])
        shape = tuple(g.size for g in grids)
        values = (data[:, 0] + 1j * data[:, 1]).reshape(shape)
        if not np.any(data[:, 1]):
            values = values.real
        return cls(grids, values)


# -- transform -------------------------------------------------------------


@functools.lru_cache(maxsize=32)
def _transform_matrix(space: Grid1D, freq: Grid1D, inverse: bool) -> np.ndarray:
    c = gaussian_constant_1d(space.kappa)
    if inverse:
        # f(x) = c int F(xi) E(ix, xi) dmu(xi)
        return c * dunkl_kernel_1d(space.kappa, space.nodes[:, None], freq.nodes[None, :]) * freq.mu_weights[None, :]
    # F(xi) = c int f(y) E(xi, -iy) dmu(y), and E(xi, -iy) = conj E(i xi, y) for real arguments
    return c * np.conj(dunkl_kernel_1d(space.kappa, freq.nodes[:, None], space.nodes[None, :])) * space.mu_weights[None, :]


def apply_axis(mat: np.ndarray, values: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(mat, values, axes=([1], [axis])), 0, axis)


def dunkl_transform(f: GridFunction, freq_grids: Optional[Sequence[Grid1D]] = None) -> GridFunction:
    """F_k(f)(xi) = c_k int f(y) E_k(xi, -iy) dmu_k(y), one dense 1-D transform per axis."""
    freq_grids = tuple(freq_grids) if freq_grids is not None else f.grids
    vals = np.asarray(f.values, dtype=complex)
    for j, (g, h) in enumerate(zip(f.grids, freq_grids)):
        if g.kappa != h.kappa:
            raise ValueError("frequency grid kappa must match the spatial grid")
        vals = apply_axis(_transform_matrix(g, h, False), vals, j)
    return GridFunction(freq_grids, vals)


def inverse_transform(F: GridFunction, space_grids: Optional[Sequence[Grid1D]] = None) -> GridFunction:
    """f(x) = c_k int F(xi) E_k(ix, xi) dmu_k(xi)."""
    space_grids = tuple(space_grids) if space_grids is not None else F.grids
    vals = np.asarray(F.values, dtype=complex)
    for j, (g, h) in enumerate(zip(space_grids, F.grids)):
        vals = apply_axis(_transform_matrix(g, h, True), vals, j)
    return GridFunction(space_grids, vals)


def plancherel_residual(f: GridFunction) -> float:
    """| ||f||_{k,2} - ||F_k f||_{k,2} | / ||f||_{k,2}."""
    n = f.norm(2)
    if n == 0:
        raise ValueError("Plancherel residual is undefined for the zero function")
    return abs(n - dunkl_transform(f).norm(2)) / n


def frequency_norm(grids: Sequence[Grid1D]) -> np.ndarray:
    return np.sqrt(sum(np.meshgrid(*[g.nodes**2 for g in grids], indexing="ij")))


def spectral_multiply(f: GridFunction, multiplier: np.ndarray) -> GridFunction:
    """inverse_transform(multiplier * F_k f) on the self-dual grid."""
    F = dunkl_transform(f)
    return inverse_transform(F.with_values(F.values * multiplier))


def ball_indicator_transform(r: float, kappa, xi_norm) -> np.ndarray:
    """F_k(chi_{B_r})(xi) = c_k mu_k(B_r) j_{gamma + d/2}(r |xi|)."""
    kappa = Multiplicity.coerce(kappa)
    lam = kappa.gamma + kappa.dim / 2.0
    return gaussian_constant(kappa) * measure_ball(r, kappa) * normalized_bessel(lam, r * np.asarray(xi_norm, dtype=float))


def interval_indicator_transform(r: float, kappa_j: float, xi) -> np.ndarray:
    """F_{k}(chi_{[-r, r]})(xi) = 2 c_k r^{2k+1} / (2k+1) j_{k+1/2}(r xi)."""
    e = 2.0 * kappa_j + 1.0
    return gaussian_constant_1d(kappa_j) * 2.0 * r**e / e * normalized_bessel(kappa_j + 0.5, r * np.asarray(xi, dtype=float))


def cube_indicator_transform(r: float, grids: Sequence[Grid1D]) -> np.ndarray:
    """Tensor product of the interval transforms on the frequency grid."""
    return _outer([interval_indicator_transform(r, g.kappa, g.nodes) for g in grids])


# -- heat and Poisson kernels ----------------------------------------------


def _default_grids(kappa, grids):
    kappa = Multiplicity.coerce(kappa)
    if grids is None:
        return make_grids(kappa)
    grids = tuple(grids)
    if tuple(g.kappa for g in grids) != kappa.kappa:
        raise ValueError("grids do not match the multiplicity")
    return grids


def heat_kernel_values(t: float, kappa, x) -> np.ndarray:
    """q_k^t(x) = (2t)^{-gamma - d/2} exp(-|x|^2 / 4t); coordinates on the last axis."""
    if not t > 0:
        raise ValueError("heat time must be positive")
    kappa = Multiplicity.coerce(kappa)
    x = np.asarray(x, dtype=float)
    return (2.0 * t) ** (-kappa.homogeneity / 2.0) * np.exp(-np.sum(x * x, axis=-1) / (4.0 * t))


def heat_kernel(t: float, kappa, grids: Optional[Sequence[Grid1D]] = None) -> GridFunction:
    grids = _default_grids(kappa, grids)
    return GridFunction.from_callable(grids, lambda p: heat_kernel_values(t, kappa, p))


def translated_heat_kernel(t: float, x, y, kappa) -> np.ndarray:
    """tau_x(q^t)(y) = (2t)^{-gamma-d/2} exp(-(|x|^2+|y|^2)/4t) E_k(x/sqrt(2t), -y/sqrt(2t)).

    Evaluated with the exponentially scaled kernel so large |x|, |y| do not overflow.
    """
    if not t > 0:
        raise ValueError("heat time must be positive")
    kappa = Multiplicity.coerce(kappa)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s = 1.0 / math.sqrt(2.0 * t)
    log_env = np.zeros(np.broadcast_shapes(x.shape[:-1], y.shape[:-1]))
    scaled = np.ones_like(log_env)
    for j, kj in enumerate(kappa):
        a, b = x[..., j] * s, -y[..., j] * s
        # -(a^2 + b^2)/2 + |ab| = -(|a| - |b|)^2 / 2
        log_env = log_env - 0.5 * (np.abs(a) - np.abs(b)) ** 2
        scaled = scaled * dunkl_kernel_real_scaled(kj, a, b)
    return (2.0 * t) ** (-kappa.homogeneity / 2.0) * np.exp(log_env) * scaled


def poisson_constant(kappa) -> float:
    """a_k = c_k 2^{gamma + d/2} Gamma(gamma + (d+1)/2) / sqrt(pi)."""
    kappa = Multiplicity.coerce(kappa)
    g, d = kappa.gamma, kappa.dim
    return gaussian_constant(kappa) * math.exp((g + d / 2) * math.log(2.0) + sp.gammaln(g + (d + 1) / 2) - 0.5 * math.log(math.pi))


def poisson_kernel_values(t: float, kappa, x) -> np.ndarray:
    """P_k^t(x) = a_k t / (t^2 + |x|^2)^{gamma + (d+1)/2}."""
    if not t > 0:
        raise ValueError("Poisson time must be positive")
    kappa = Multiplicity.coerce(kappa)
    x = np.asarray(x, dtype=float)
    e = kappa.gamma + (kappa.dim + 1) / 2.0
    return poisson_constant(kappa) * t / (t * t + np.sum(x * x, axis=-1)) ** e


def poisson_kernel(t: float, kappa, grids: Optional[Sequence[Grid1D]] = None) -> GridFunction:
    grids = _default_grids(kappa, grids)
    return GridFunction.from_callable(grids, lambda p: poisson_kernel_values(t, kappa, p))


# -- radial profiles -------------------------------------------------------


class InadmissibleProfile(ValueError):
    """The radial moment int r^{2 gamma + d} |phi'(r)| dr is infinite or too large."""


@dataclass(frozen=True)
class RadialProfile:
    """phi(x) = profile(|x|) for a fixed multiplicity.

    ``transform`` optionally gives F_k(phi)(xi) as a function of |xi|; otherwise the
    radial Hankel formula is integrated numerically.
    """

    kappa: Multiplicity
    profile: Callable
    derivative: Callable
    name: str = "profile"
    transform: Optional[Callable] = None
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kappa", Multiplicity.coerce(self.kappa))

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.profile(np.sqrt(np.sum(x * x, axis=-1)))

    def sample(self, grids: Sequence[Grid1D]) -> GridFunction:
        return GridFunction.from_callable(grids, self)

    def fourier(self, xi_norm) -> np.ndarray:
        xi_norm = np.asarray(xi_norm, dtype=float)
        if self.transform is not None:
            return self.transform(xi_norm)
        return radial_transform(self, xi_norm)

    @functools.cached_property
    def admissible_moment(self) -> float:
        return admissibility_moment(self)


def heat_profile(kappa) -> RadialProfile:
    """phi(x) = exp(-|x|^2 / 2); its dilation by sqrt(2t) is q_k^t."""
    return RadialProfile(
        kappa,
        profile=lambda r: np.exp(-np.asarray(r) ** 2 / 2.0),
        derivative=lambda r: -np.asarray(r) * np.exp(-np.asarray(r) ** 2 / 2.0),
        name="heat",
        transform=lambda s: np.exp(-np.asarray(s) ** 2 / 2.0),
    )


def poisson_profile(kappa) -> RadialProfile:
    """phi(x) = a_k / (1 + |x|^2)^{gamma + (d+1)/2}; its dilations are the Poisson kernels P_k^t."""
    kappa = Multiplicity.coerce(kappa)
    a = poisson_constant(kappa)
    e = kappa.gamma + (kappa.dim + 1) / 2.0
    c = gaussian_constant(kappa)
    return RadialProfile(
        kappa,
        profile=lambda r: a / (1.0 + np.asarray(r) ** 2) ** e,
        derivative=lambda r: -2.0 * e * a * np.asarray(r) / (1.0 + np.asarray(r) ** 2) ** (e + 1.0),
        name="poisson",
        # subordination of the heat semigroup: F_k(P^t) = c_k exp(-t |xi|) with this a_k
        transform=lambda s: c * np.exp(-np.asarray(s)),
    )


def dilate(phi: RadialProfile, t: float) -> RadialProfile:
    """phi_t(x) = t^{-(2 gamma + d)} phi(x / t)."""
    if not t > 0:
        raise ValueError("dilation parameter must be positive")
    e = phi.kappa.homogeneity
    p, dp, tr = phi.profile, phi.derivative, phi.transform
    return RadialProfile(
        phi.kappa,
        profile=lambda r: t ** (-e) * p(np.asarray(r) / t),
        derivative=lambda r: t ** (-e - 1.0) * dp(np.asarray(r) / t),
        name=phi.name,
        transform=None if tr is None else (lambda s: tr(t * np.asarray(s))),
        scale=phi.scale * t,
    )


def admissibility_moment(phi: RadialProfile, ceiling: float = 1e12, decay_radius: float = 1e3, decay_tol: float = 1e-4) -> float:
    """int_0^inf r^{2 gamma + d} |phi'(r)| dr by adaptive quadrature.

    Raises InadmissibleProfile when |phi| at ``decay_radius`` (in units of the profile
    scale) exceeds ``decay_tol`` |phi(0)|, when the integral does not converge, or
    when it exceeds ``ceiling``.
    """
    e = phi.kappa.homogeneity
    peak = abs(float(phi.profile(0.0)))
    if abs(float(phi.profile(decay_radius * phi.scale))) > decay_tol * peak:
        raise InadmissibleProfile(f"{phi.name}: profile does not vanish at infinity")
    integrand = lambda r: r**e * abs(float(phi.derivative(r)))
    # split at the profile's own scale so the adaptive rule sees the bulk
    s = phi.scale
    head, err1 = integrate.quad(integrand, 0.0, 10.0 * s, limit=400)
    tail, err2 = integrate.quad(integrand, 10.0 * s, np.inf, limit=400)
    total = head + tail
    if not math.isfinite(total) or total > ceiling or err1 + err2 > 1e-6 * max(total, 1.0):
        raise InadmissibleProfile(f"{phi.name}: radial moment diverges or exceeds {ceiling}")
    return total


def _oscillatory_tail(f: Callable, a: float, half_period: float, pieces: int = 80, sweeps: int = 12) -> float:
    """int_a^inf f for a slowly decaying oscillation: half-period pieces, then
    repeated averaging of the partial sums (the pieces nearly alternate in sign)."""
    edges = a + half_period * np.arange(pieces + 1)
    parts = [integrate.quad(f, lo, hi, limit=100)[0] for lo, hi in zip(edges[:-1], edges[1:])]
    sums = np.cumsum(parts)[-(sweeps + 1) :]
    for _ in range(sweeps):
        sums = 0.5 * (sums[1:] + sums[:-1])
    return float(sums[0])


def radial_transform(phi: RadialProfile, xi_norm) -> np.ndarray:
    """F_k(phi)(xi) = c_k S_k int_0^inf phi(s) j_{gamma+d/2-1}(s|xi|) s^{2 gamma + d - 1} ds.

    S_k is the sphere integral of h_k^2. Adaptive quadrature on a head interval and
    an accelerated oscillatory tail, for profiles without a closed-form transform.
    """
    kappa = phi.kappa
    lam = kappa.gamma + kappa.dim / 2.0 - 1.0
    pref = gaussian_constant(kappa) * sphere_weight_integral(kappa)
    e = 2.0 * kappa.gamma + kappa.dim - 1.0
    xi_norm = np.atleast_1d(np.asarray(xi_norm, dtype=float))
    out = np.empty_like(xi_norm)
    head = 10.0 * phi.scale
    for i, s0 in enumerate(xi_norm.ravel()):
        f = lambda s: float(phi.profile(s)) * float(normalized_bessel(lam, np.array(s * s0))) * s**e
        val = integrate.quad(f, 0.0, head, limit=500)[0]
        if s0 == 0:
            val += integrate.quad(f, head, np.inf, limit=500)[0]
        else:
            val += _oscillatory_tail(f, head, math.pi / s0)
        out.ravel()[i] = pref * val
    return out
