"""The maximal operators M_k (balls), M^Q_k (cubes), M^R_k (orthant rectangles) and
M^phi_k (radial dilations), with empirical-constant estimators.

Conventions
-----------
* Grid data are treated as piecewise constant on the grid cells whenever an
  operator integrates against a kernel with kinks (M^Q, M^R, level sets, norms).
* M_k is normalised so that it averages against the positive kernel
  tau_x(chi_{B_r})(-y) dmu(y) / mu(B_r); the c_k of the convolution is divided out.
  With this normalisation kappa = 0 gives the classical centred maximal function.
* sup_{r > 0} is replaced by a max over a geometric RadiusSchedule.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence

import numpy as np
from scipy import special as sp

from .covering import CoverCertificate, covering_constant, union_measure, vitali_select  # noqa: F401
from .measure import Multiplicity, cube_ball_ratio, measure_interval_array, segment_mass
from .product_formula import nu_plus_mass_below
from .special import normalized_bessel
from .transform import (
    GridFunction,
    RadialProfile,
    _transform_matrix,
    admissibility_moment,
    apply_axis,
    frequency_norm,
)
from .translation import DEFAULT_MOLLIFY_T

OPERATORS = ("M", "MQ", "MR", "Mphi")
SUBCELL_ORDER = 8


# -- radius schedules ------------------------------------------------------


@dataclass(frozen=True)
class RadiusSchedule:
    r_min: float
    r_max: float
    count: int = 64

    def __post_init__(self):
        if not (0 < self.r_min < self.r_max) or not math.isfinite(self.r_max):
            raise ValueError("radius schedule needs 0 < r_min < r_max < inf")
        if self.count < 2:
            raise ValueError("radius schedule needs at least two radii")

    @property
    def radii(self) -> np.ndarray:
        return np.geomspace(self.r_min, self.r_max, self.count)

    @property
    def ratio(self) -> float:
        return (self.r_max / self.r_min) ** (1.0 / (self.count - 1))

    def doubled(self) -> "RadiusSchedule":
        """Same endpoints, every old radius kept, one new radius between neighbours."""
        return RadiusSchedule(self.r_min, self.r_max, 2 * self.count - 1)

    @classmethod
    def for_grids(cls, grids, count: int = 64, r_max: Optional[float] = None) -> "RadiusSchedule":
        """[h/2, 2 sqrt(d) L] with h the mean node spacing.

        For data on [-L, L]^d every ball, cube or rectangle average is decreasing in r
        once r exceeds the box diameter, so larger radii cannot raise the supremum.
        """
        h = max(g.spacing for g in grids)
        L = max(g.half_width for g in grids)
        if r_max is None:
            r_max = 2.0 * math.sqrt(len(grids)) * L
        return cls(h / 2.0, r_max, count)


# -- function families -----------------------------------------------------


@dataclass
class FunctionSequence:
    """Finite family (f_1, ..., f_n) on a shared grid."""

    members: List[GridFunction]

    def __post_init__(self):
        if not self.members:
            raise ValueError("a function sequence needs at least one member")
        g = self.members[0].grids
        if any(m.grids != g for m in self.members):
            raise ValueError("all members must share one grid")

    @property
    def grids(self):
        return self.members[0].grids

    def __len__(self):
        return len(self.members)

    def stack(self) -> np.ndarray:
        return np.stack([m.values for m in self.members])

    def head(self, n: int) -> "FunctionSequence":
        return FunctionSequence(self.members[:n])


def _as_batch(f):
    """(grids, values with a leading batch axis, was_single)."""
    if isinstance(f, FunctionSequence):
        return f.grids, f.stack(), False
    return f.grids, f.values[None, ...], True


def _contract(mats, vals):
    for j, m in enumerate(mats):
        vals = apply_axis(m, vals, j + 1)
    return vals


def _unbatch(grids, out, single):
    if single:
        return GridFunction(grids, out[0])
    return [GridFunction(grids, o) for o in out]


# -- per-axis kernels ------------------------------------------------------


SIGMOID_POWER = 4
PANEL = 0.125


def _sigmoid(s, q: int = SIGMOID_POWER):
    """psi(s) = s^q / (s^q + (1-s)^q) and psi'(s); flattens both endpoints to order q."""
    a, b = s**q, (1.0 - s) ** q
    den = a + b
    return a / den, q * (s * (1.0 - s)) ** (q - 1) / (den * den)


def _sigmoid_inverse(tau, q: int = SIGMOID_POWER):
    tau = np.clip(tau, 0.0, 1.0)
    inner = tau < 1.0
    rho = (tau / np.where(inner, 1.0 - tau, 1.0)) ** (1.0 / q)
    return np.where(inner, rho / (1.0 + rho), 1.0)


def rect_axis_matrix(grid, r: float) -> np.ndarray:
    """A[i, k] = mu(cell_k and {|y| in I(x_i, r)}) / mu(I(x_i, r)), exact for cellwise-constant data."""
    k = grid.kappa
    x = np.abs(grid.nodes)[:, None]
    e0, e1 = grid.cell_edges[None, :-1], grid.cell_edges[None, 1:]
    lo, hi = np.maximum(x - r, 0.0), x + r
    pos = segment_mass(np.maximum(e0, lo), np.minimum(e1, hi), k)
    neg = segment_mass(np.maximum(e0, -hi), np.minimum(e1, -lo), k)
    return (pos + neg) / measure_interval_array(x, r, k)


def _cube_pieces(grid, r: float, m: int = SUBCELL_ORDER):
    """Yield (rows, cells, y, w) with w = kernel * dmu weights at sub-cell nodes y.

    The kernel is the closed-form nu^+ mass tau_x(chi_[-r,r])(-y). Its support
    {|y| in I(x, r)} is split at |y| = r - |x| into bands on which it is smooth up
    to algebraic endpoint behaviour. Each band is mapped from [0, 1] by a sigmoidal
    substitution that flattens those endpoints, and the image of every cell is
    integrated by composite m-point Gauss-Legendre.
    """
    k = grid.kappa
    x = grid.nodes
    ax = np.abs(x)
    cuts = np.stack([np.maximum(ax - r, 0.0), np.abs(r - ax), ax + r], axis=1)
    cuts.sort(axis=1)
    bands = [(cuts[:, 0], cuts[:, 1]), (cuts[:, 1], cuts[:, 2])]
    bands += [(-b, -a) for a, b in bands]
    e0, e1 = grid.cell_edges[:-1], grid.cell_edges[1:]
    gs, gw = np.polynomial.legendre.leggauss(m)
    for a, b in bands:
        width = b - a
        lo = np.maximum(e0[None, :], a[:, None])
        hi = np.minimum(e1[None, :], b[:, None])
        ii, kk = np.nonzero(hi > lo)
        if ii.size == 0:
            continue
        a_, w_ = a[ii], width[ii]
        s_lo = _sigmoid_inverse((lo[ii, kk] - a_) / w_)
        s_hi = _sigmoid_inverse((hi[ii, kk] - a_) / w_)
        # composite rule in s: panels of length <= PANEL
        panels = np.ceil((s_hi - s_lo) / PANEL).astype(int)
        for p in np.unique(panels):
            sel = panels == p
            step = (s_hi[sel] - s_lo[sel]) / p
            half = step[:, None] / 2.0
            left = s_lo[sel][:, None] + step[:, None] * np.arange(p)[None, :]
            sn = (left[:, :, None] + half[:, :, None] * (1.0 + gs[None, None, :])).reshape(left.shape[0], -1)
            psi, dpsi = _sigmoid(sn)
            ys = a_[sel][:, None] + w_[sel][:, None] * psi
            ws = half * np.tile(gw, p)[None, :] * w_[sel][:, None] * dpsi * np.abs(ys) ** (2.0 * k)
            xs = np.broadcast_to(x[ii[sel]][:, None], ys.shape)
            if k > 0:
                kern = nu_plus_mass_below(k, xs, -ys, r)
            else:
                kern = (np.abs(xs - ys) <= r).astype(float)
            yield ii[sel], kk[sel], ys, kern * ws


def cube_axis_matrix(grid, r: float, m: int = SUBCELL_ORDER) -> np.ndarray:
    """A[i, k] = int_{cell_k} tau_{x_i}(chi_[-r,r])(-y) dmu(y) / mu([-r, r]);
    exact for cellwise-constant data up to the sub-cell rule."""
    A = np.zeros((grid.size, grid.size))
    for ii, kk, _, w in _cube_pieces(grid, r, m):
        np.add.at(A, (ii, kk), w.sum(axis=1))
    return A / segment_mass(-r, r, grid.kappa)


def cube_axis_apply(grid, r: float, g: Callable, m: int = SUBCELL_ORDER) -> np.ndarray:
    """v[i] = int g(y) tau_{x_i}(chi_[-r,r])(-y) dmu(y) / mu([-r, r]) for a callable g,
    integrated at the sub-cell nodes (no cellwise data model)."""
    v = np.zeros(grid.size, dtype=complex)
    for ii, _, ys, w in _cube_pieces(grid, r, m):
        np.add.at(v, ii, np.sum(w * g(ys), axis=1))
    v /= segment_mass(-r, r, grid.kappa)
    return v.real if np.all(v.imag == 0) else v


@dataclass(frozen=True)
class SeparableFunction:
    """f(y) = coeff * prod_j g_j(y_j) with vectorised one-dimensional factors."""

    factors: tuple
    coeff: float = 1.0
    name: str = ""

    @property
    def dim(self) -> int:
        return len(self.factors)

    def __call__(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        out = self.coeff
        for j, g in enumerate(self.factors):
            out = out * g(pts[..., j])
        return np.asarray(out)

    def sample(self, grids) -> GridFunction:
        return GridFunction.from_callable(grids, self)

    def abs(self) -> "SeparableFunction":
        return SeparableFunction(tuple(_abs_of(g) for g in self.factors), abs(self.coeff), self.name)


def _abs_of(g):
    return lambda y: np.abs(g(y))


def maximal_cube_exact(F: SeparableFunction, grids, sched: Optional[RadiusSchedule] = None, m: int = SUBCELL_ORDER) -> GridFunction:
    """M^Q for an analytic separable function, integrating the tensor kernel against
    the factors themselves."""
    grids = tuple(grids)
    if F.dim != len(grids):
        raise ValueError("function and grid dimensions differ")
    sched = _default_schedule(grids, sched)
    out = np.zeros(tuple(g.size for g in grids))
    for r in sched.radii:
        vecs = [cube_axis_apply(g, r, fj, m) for g, fj in zip(grids, F.factors)]
        avg = F.coeff * functools.reduce(np.multiply.outer, vecs)
        out = np.maximum(out, np.abs(avg))
    return GridFunction(grids, out)


# -- maximal operators -----------------------------------------------------


def _default_schedule(grids, sched):
    return sched if sched is not None else RadiusSchedule.for_grids(grids)


def maximal_rect(f, sched: Optional[RadiusSchedule] = None):
    """M^R f(x) = sup_r mu(R(x,r))^{-1} int_{y~ in R(x,r)} |f(y)| dmu(y), by direct summation."""
    grids, vals, single = _as_batch(f)
    sched = _default_schedule(grids, sched)
    a = np.abs(vals)
    out = np.zeros(a.shape)
    for r in sched.radii:
        out = np.maximum(out, _contract([rect_axis_matrix(g, r) for g in grids], a))
    return _unbatch(grids, out, single)


def maximal_cube(f, sched: Optional[RadiusSchedule] = None, m: int = SUBCELL_ORDER):
    """M^Q f(x) = sup_r mu(Q_r)^{-1} |int f(y) tau_x(chi_{Q_r})(-y) dmu(y)| with the tensor nu^+ kernel."""
    grids, vals, single = _as_batch(f)
    sched = _default_schedule(grids, sched)
    out = np.zeros(vals.shape)
    for r in sched.radii:
        avg = _contract([cube_axis_matrix(g, r, m) for g in grids], vals)
        out = np.maximum(out, np.abs(avg))
    return _unbatch(grids, out, single)


def _spectral_sup(grids, vals, multipliers: Iterable[np.ndarray], freq_grids=None):
    freq_grids = grids if freq_grids is None else tuple(freq_grids)
    fw = [_transform_matrix(g, h, False) for g, h in zip(grids, freq_grids)]
    inv = [_transform_matrix(g, h, True) for g, h in zip(grids, freq_grids)]
    F = _contract(fw, vals.astype(complex))
    out = np.zeros(vals.shape)
    for mult in multipliers:
        out = np.maximum(out, np.abs(_contract(inv, F * mult)))
    return out


def ball_average_multiplier(r: float, grids, mollify_t: float = DEFAULT_MOLLIFY_T) -> np.ndarray:
    """j_{gamma + d/2}(r |xi|) exp(-t |xi|^2): the transform of the mollified normalised ball average."""
    kappa = Multiplicity(tuple(g.kappa for g in grids))
    xi = frequency_norm(grids)
    return normalized_bessel(kappa.gamma + kappa.dim / 2.0, r * xi) * np.exp(-mollify_t * xi * xi)


def maximal_ball(
    f,
    sched: Optional[RadiusSchedule] = None,
    mollify_t: float = DEFAULT_MOLLIFY_T,
    method: str = "spectral",
    freq_grids=None,
):
    """M_k f(x) = sup_r |(f *_k chi_{B_r})(x)| / (c_k mu(B_r)).

    method="spectral": mollified indicator multiplier on the transform side
    (``freq_grids`` overrides the self-dual frequency grid).
    method="kernel": d = 1 only, where balls are intervals and the nu^+ kernel is exact.
    """
    grids, vals, single = _as_batch(f)
    sched = _default_schedule(grids, sched)
    if method == "kernel":
        if len(grids) != 1:
            raise ValueError("the kernel route for balls is one-dimensional")
        out = np.zeros(vals.shape)
        for r in sched.radii:
            out = np.maximum(out, np.abs(_contract([cube_axis_matrix(grids[0], r)], vals)))
    elif method == "spectral":
        fg = grids if freq_grids is None else tuple(freq_grids)
        mults = (ball_average_multiplier(r, fg, mollify_t) for r in sched.radii)
        out = _spectral_sup(grids, vals, mults, fg)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _unbatch(grids, out, single)


def maximal_phi(f, phi: RadialProfile, sched: Optional[RadiusSchedule] = None, freq_grids=None):
    """M^phi f(x) = sup_t |(f *_k phi_t)(x)|, using F_k(phi_t)(xi) = F_k(phi)(t xi)."""
    grids, vals, single = _as_batch(f)
    if tuple(g.kappa for g in grids) != phi.kappa.kappa:
        raise ValueError("profile multiplicity does not match the grid")
    admissibility_moment(phi)  # raises InadmissibleProfile
    sched = _default_schedule(grids, sched)
    fg = grids if freq_grids is None else tuple(freq_grids)
    xi = frequency_norm(fg)
    out = _spectral_sup(grids, vals, (phi.fourier(t * xi) for t in sched.radii), fg)
    return _unbatch(grids, out, single)


def apply_operator(tag: str, f, sched: Optional[RadiusSchedule] = None, phi: Optional[RadialProfile] = None, **kw):
    if tag == "M":
        return maximal_ball(f, sched, **kw)
    if tag == "MQ":
        return maximal_cube(f, sched)
    if tag == "MR":
        return maximal_rect(f, sched)
    if tag == "Mphi":
        if phi is None:
            raise ValueError("operator Mphi needs a radial profile")
        return maximal_phi(f, phi, sched, **kw)
    raise ValueError(f"unknown operator {tag!r}; expected one of {OPERATORS}")


# -- measures of grid data -------------------------------------------------


def cell_weights(grids) -> np.ndarray:
    return functools.reduce(np.multiply.outer, [g.cell_measures for g in grids])


def level_set_measure(values: np.ndarray, grids, lam: float) -> float:
    """mu_k of the union of grid cells where values > lam."""
    return float(np.sum(cell_weights(grids)[np.asarray(values) > lam]))


def lp_norm(values: np.ndarray, grids, p: float) -> float:
    a = np.abs(values)
    if math.isinf(p):
        return float(a.max())
    return float(np.sum(a**p * cell_weights(grids)) ** (1.0 / p))


def default_lambdas(values: np.ndarray, count: int = 40, floor: float = 1e-3) -> np.ndarray:
    top = float(np.max(values))
    if top <= 0:
        raise ValueError("level sets of a vanishing function")
    return np.geomspace(floor * top, top, count)


def _weak_ratio(mvals, grids, l1: float, lambdas) -> float:
    return max(lam * level_set_measure(mvals, grids, lam) for lam in lambdas) / l1


# -- empirical constants ---------------------------------------------------


def weak_type_ratio(tag: str, f: GridFunction, lambdas=None, sched=None, phi=None, **kw) -> float:
    """max over lambda of lambda mu({Mf > lambda}) / ||f||_{k,1}."""
    l1 = lp_norm(f.values, f.grids, 1)
    if l1 == 0:
        raise ValueError("weak-type ratio needs ||f||_1 > 0")
    mf = apply_operator(tag, f, sched, phi, **kw).values
    lambdas = default_lambdas(mf) if lambdas is None else lambdas
    return _weak_ratio(mf, f.grids, l1, lambdas)


def strong_type_ratio(tag: str, f: GridFunction, p: float, sched=None, phi=None, **kw) -> float:
    """||Mf||_{k,p} / ||f||_{k,p}."""
    den = lp_norm(f.values, f.grids, p)
    if den == 0:
        raise ValueError("strong-type ratio needs ||f||_p > 0")
    return lp_norm(apply_operator(tag, f, sched, phi, **kw).values, f.grids, p) / den


def weighted_inequality_ratio(f: GridFunction, W: GridFunction, q: float, sched=None) -> float:
    """int (M^R f)^q W dmu / int |f|^q M^R W dmu."""
    if np.any(np.real(W.values) <= 0):
        raise ValueError("the weight must be positive")
    cw = cell_weights(f.grids)
    mf = maximal_rect(f, sched).values
    mw = maximal_rect(W, sched).values
    lhs = np.sum(mf**q * np.abs(W.values) * cw)
    rhs = np.sum(np.abs(f.values) ** q * mw * cw)
    if rhs == 0:
        raise ValueError("right-hand side vanishes")
    return float(lhs / rhs)


def _lr(stack: np.ndarray, r: float) -> np.ndarray:
    a = np.abs(stack)
    if math.isinf(r):
        return a.max(axis=0)
    return np.sum(a**r, axis=0) ** (1.0 / r)


def fs_vector_norm(seq: FunctionSequence, r: float) -> GridFunction:
    """Pointwise (sum_n |f_n|^r)^{1/r}."""
    return GridFunction(seq.grids, _lr(seq.stack(), r))


def _fs_ratio(mstack: np.ndarray, fstack: np.ndarray, grids, r: float, p: float, lambdas=None) -> float:
    top = _lr(mstack, r)
    base = _lr(fstack, r)
    if p == 1:
        lambdas = default_lambdas(top) if lambdas is None else lambdas
        return _weak_ratio(top, grids, lp_norm(base, grids, 1), lambdas)
    if p < 1:
        raise ValueError("p must be >= 1")
    return lp_norm(top, grids, p) / lp_norm(base, grids, p)


def fefferman_stein_ratio(tag: str, seq: FunctionSequence, r: float, p: float, lambdas=None, sched=None, phi=None, **kw) -> float:
    """Strong form (p > 1): ||l^r(M f_n)||_p / ||l^r(f_n)||_p.
    Weak form (p = 1): max_lambda lambda mu({l^r(M f_n) > lambda}) / ||l^r(f_n)||_1."""
    if r <= 1:
        raise ValueError("the inner exponent r must exceed 1")
    mstack = np.stack([g.values for g in apply_operator(tag, seq, sched, phi, **kw)])
    return _fs_ratio(mstack, seq.stack(), seq.grids, r, p, lambdas)


def fefferman_stein_trace(tag: str, seq: FunctionSequence, counts: Sequence[int], r: float, ps: Sequence[float], sched=None, phi=None, **kw) -> dict:
    """{p: [ratio for seq.head(n) for n in counts]}, applying the operator once to the whole family."""
    if r <= 1:
        raise ValueError("the inner exponent r must exceed 1")
    if max(counts) > len(seq):
        raise ValueError("trace asks for more members than the family has")
    mstack = np.stack([g.values for g in apply_operator(tag, seq, sched, phi, **kw)])
    fstack = seq.stack()
    return {p: [_fs_ratio(mstack[:n], fstack[:n], seq.grids, r, p) for n in counts] for p in ps}


# -- reports ---------------------------------------------------------------


@dataclass
class CheckRecord:
    name: str
    params: str
    value: float
    bound: float
    passed: bool
    statement: str = ""


@dataclass
class MaximalReport:
    operator: str
    values: Optional[GridFunction] = None
    constants: dict = field(default_factory=dict)
    trace: list = field(default_factory=list)
    checks: List[CheckRecord] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_text(self) -> str:
        lines = [f"operator {self.operator}"]
        for c in self.checks:
            lines.append(f"  {c.name} [{c.params}] value={c.value:.6e} bound={c.bound:.6e} {'PASS' if c.passed else 'FAIL'}")
        for k, v in sorted(self.constants.items()):
            lines.append(f"  constant {k} = {v:.6e}")
        return "\n".join(lines)

    def trace_csv(self) -> str:
        rows = ["name,grid_size,value"]
        rows += [f"{n},{s},{v:.12e}" for n, s, v in self.trace]
        return "\n".join(rows) + "\n"


def domination_report(
    f,
    sched: Optional[RadiusSchedule] = None,
    rtol: float = 1e-6,
    mollify_t: float = DEFAULT_MOLLIFY_T,
    ball_method: str = "spectral",
    grids=None,
    freq_grids=None,
) -> MaximalReport:
    """M, M^Q|f|, M^R pointwise; hard check M <= C M^Q|f| with C = mu(Q_r) / mu(B_r).

    ``f`` is a GridFunction, or a SeparableFunction together with ``grids``; in the
    latter case both cube maximal functions integrate the factors exactly.
    ``freq_grids`` is passed to the spectral ball route.
    Records the empirical constants sup M^Q f / M^R f and sup M f / M^R f.
    """
    exact = None
    if isinstance(f, SeparableFunction):
        if grids is None:
            raise ValueError("a separable function needs grids")
        exact, f = f, f.sample(grids)
    sched = _default_schedule(f.grids, sched)
    kappa = f.kappa
    C = cube_ball_ratio(kappa)
    m = maximal_ball(f, sched, mollify_t, method=ball_method, freq_grids=freq_grids).values
    if exact is not None:
        mq_abs = maximal_cube_exact(exact.abs(), f.grids, sched).values
        mq = maximal_cube_exact(exact, f.grids, sched).values
    else:
        mq_abs = maximal_cube(f.abs(), sched).values
        mq = maximal_cube(f, sched).values
    mr = maximal_rect(f, sched).values
    bound = C * mq_abs
    excess = float(np.max((m - bound) / np.maximum(bound, 1e-300)))
    rep = MaximalReport("M", values=GridFunction(f.grids, m))
    rep.checks.append(
        CheckRecord("ball<=C*cube", f"kappa={kappa.kappa}", excess, rtol, excess <= rtol, "ball-cube domination")
    )
    pos = mr > 0
    rep.constants["MQ/MR"] = float(np.max(mq[pos] / mr[pos]))
    rep.constants["M/MR"] = float(np.max(m[pos] / mr[pos]))
    rep.constants["C_ball_cube"] = C
    rep.extra.update(MQ=GridFunction(f.grids, mq), MQabs=GridFunction(f.grids, mq_abs), MR=GridFunction(f.grids, mr))
    return rep
