"""Greedy Vitali-type selection for origin-truncated rectangles R(z, r) and exact
measures of their unions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .measure import Multiplicity, Rectangle, measure_rectangle, segment_mass


def overlaps(a: Rectangle, b: Rectangle) -> bool:
    """Half-open boxes meet in a set of positive volume."""
    ba, bb = a.bounds(), b.bounds()
    return bool(np.all((ba[:, 0] < bb[:, 1]) & (bb[:, 0] < ba[:, 1])))


def contains(outer: Rectangle, inner: Rectangle) -> bool:
    bo, bi = outer.bounds(), inner.bounds()
    return bool(np.all((bo[:, 0] <= bi[:, 0]) & (bi[:, 1] <= bo[:, 1])))


@dataclass
class CoverCertificate:
    """For each input rectangle, the index (into the selection) of a selected
    rectangle whose dilation contains it, or None."""

    dilation: float
    witnesses: List[Optional[int]] = field(default_factory=list)

    @property
    def failures(self) -> List[int]:
        return [i for i, w in enumerate(self.witnesses) if w is None]

    @property
    def empty(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        n = len(self.witnesses)
        return f"dilation={self.dilation:g} rectangles={n} unengulfed={len(self.failures)}"


def vitali_select(rects: Sequence[Rectangle], dilation: float = 5.0) -> Tuple[List[Rectangle], CoverCertificate]:
    """Largest radius first; keep a rectangle when it misses everything kept so far."""
    if dilation < 1:
        raise ValueError("dilation must be >= 1")
    for r in rects:
        if not all(math.isfinite(v) for v in r.z):
            raise ValueError("rectangles must be bounded")
    order = sorted(range(len(rects)), key=lambda i: -rects[i].r)
    selected: List[Rectangle] = []
    for i in order:
        if not any(overlaps(rects[i], s) for s in selected):
            selected.append(rects[i])
    grown = [s.dilate(dilation) for s in selected]
    cert = CoverCertificate(dilation)
    for r in rects:
        hit = next((j for j, g in enumerate(grown) if contains(g, r)), None)
        cert.witnesses.append(hit)
    return selected, cert


def union_measure(rects: Sequence[Rectangle], kappa) -> float:
    """mu_k of the union, exact: compress coordinates into elementary boxes and
    sum the measures of the covered ones."""
    kappa = Multiplicity.coerce(kappa)
    if not rects:
        return 0.0
    bounds = np.stack([r.bounds() for r in rects])  # (n, d, 2)
    d = bounds.shape[1]
    if d != kappa.dim:
        raise ValueError("rectangle and multiplicity dimensions differ")
    edges = [np.unique(bounds[:, j, :]) for j in range(d)]
    covered = np.zeros(tuple(e.size - 1 for e in edges), dtype=bool)
    for b in bounds:
        sl = tuple(slice(np.searchsorted(edges[j], b[j, 0]), np.searchsorted(edges[j], b[j, 1])) for j in range(d))
        covered[sl] = True
    masses = [segment_mass(e[:-1], e[1:], kj) for e, kj in zip(edges, kappa)]
    w = masses[0]
    for m in masses[1:]:
        w = np.multiply.outer(w, m)
    return float(np.sum(w[covered]))


def covering_constant(rects: Sequence[Rectangle], kappa, dilation: float = 5.0) -> Tuple[float, CoverCertificate]:
    """mu(union of rects) / sum of mu(selected)."""
    selected, cert = vitali_select(rects, dilation)
    total = sum(measure_rectangle(s, kappa) for s in selected)
    return union_measure(rects, kappa) / total, cert


def dilation_doubling_bound(kappa, dilation: float = 5.0) -> float:
    """sup over z, r of mu(R(z, a r)) / mu(R(z, r)) = prod a^{2 k_j + 1}, attained at z = 0."""
    kappa = Multiplicity.coerce(kappa)
    return float(np.prod([dilation ** (2.0 * k + 1.0) for k in kappa]))


def random_rectangles(rng: np.random.Generator, count: int, dim: int, box: float = 10.0, r_range=(0.05, 1.5)) -> List[Rectangle]:
    """Centres uniform in [0, box]^d, radii log-uniform in r_range."""
    z = rng.uniform(0.0, box, size=(count, dim))
    r = np.exp(rng.uniform(np.log(r_range[0]), np.log(r_range[1]), size=count))
    return [Rectangle(tuple(zi), float(ri)) for zi, ri in zip(z, r)]
