"""Distributions of finite structural type on an open subset of R.

A :class:`Distribution` is a finite sum of derivatives of point masses and
piecewise-smooth densities.  That covers every classical example this
library works with (delta combs, Heaviside jumps, smooth densities) while
keeping pairings exact where they can be exact: delta terms evaluate jets
directly, only densities go through quadrature.

Pairings use a tighter quadrature tolerance than the generic default: the
asymptotic slope fits downstream compare pairing values across five
octaves of k, and the noise floor has to sit well below the smallest
signal on the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import IncompatiblePieces, NotContained, UnboundedSupport
from .smooth import (
    CompactInterval,
    Domain,
    PiecewiseFn,
    SmoothFn,
    TestFn,
    VectorField,
    combine,
    constant,
    derivative_fn,
    integrate,
    restrict_view,
)

PAIR_REL_TOL = 1e-12
PAIR_ABS_TOL = 1e-14


@dataclass(frozen=True)
class DeltaTerm:
    """coeff * delta^(order) at ``point``."""

    point: float
    order: int
    coeff: float


@dataclass(frozen=True)
class DensityTerm:
    """coeff * fn(x) dx; ``fn`` may be piecewise with flagged breaks."""

    fn: SmoothFn
    coeff: float


class PairingReport(NamedTuple):
    value: float
    est_error: float


@dataclass(frozen=True)
class Distribution:
    """A finite combination of delta derivatives and piecewise densities."""

    domain: Domain
    deltas: tuple[DeltaTerm, ...] = ()
    densities: tuple[DensityTerm, ...] = ()

    def __post_init__(self):
        for t in self.deltas:
            if not self.domain.contains(t.point):
                raise NotContained(f"delta point {t.point} outside the domain")

    def __add__(self, other: "Distribution") -> "Distribution":
        if other.domain != self.domain:
            raise NotContained("distributions live on different domains")
        return _normalize(self.domain, self.deltas + other.deltas,
                          self.densities + other.densities)

    def __sub__(self, other: "Distribution") -> "Distribution":
        return self + (-1.0) * other

    def __rmul__(self, c: float) -> "Distribution":
        c = float(c)
        return Distribution(
            self.domain,
            tuple(DeltaTerm(t.point, t.order, c * t.coeff) for t in self.deltas),
            tuple(DensityTerm(t.fn, c * t.coeff) for t in self.densities),
        )

    def __neg__(self) -> "Distribution":
        return (-1.0) * self

    @property
    def max_delta_order(self) -> int:
        return max((t.order for t in self.deltas), default=0)


def _normalize(domain, deltas, densities) -> Distribution:
    merged: dict[tuple[float, int], float] = {}
    for t in deltas:
        key = (t.point, t.order)
        merged[key] = merged.get(key, 0.0) + t.coeff
    ds = tuple(DeltaTerm(p, o, c) for (p, o), c in merged.items() if c != 0.0)
    return Distribution(domain, ds, tuple(t for t in densities if t.coeff != 0.0))


# ---------------------------------------------------------------------------
# constructors


def delta(point: float = 0.0, order: int = 0, coeff: float = 1.0,
          domain: Domain = Domain.interval(-2.0, 2.0)) -> Distribution:
    return Distribution(domain, (DeltaTerm(float(point), int(order), float(coeff)),))


def regular(fn: SmoothFn, coeff: float = 1.0, domain: Domain | None = None) -> Distribution:
    return Distribution(domain or fn.domain, (), (DensityTerm(fn, float(coeff)),))


def heaviside(domain: Domain = Domain.interval(-2.0, 2.0), jump_at: float = 0.0) -> Distribution:
    """The unit step: density 0 left of ``jump_at``, 1 right of it."""
    fn = PiecewiseFn([jump_at], [constant(0.0), constant(1.0)], domain)
    return Distribution(domain, (), (DensityTerm(fn, 1.0),))


# ---------------------------------------------------------------------------
# pairing


def _density_breaks(fn: SmoothFn) -> tuple[float, ...]:
    return fn.breaks


def pair(u: Distribution, phi) -> PairingReport:
    """<u, phi> for a compactly supported smooth phi.

    Delta terms are exact (jet evaluation); density terms integrate
    adaptively with panel splits at the support edges and at every
    flagged break of the density.
    """
    f = phi.fn if isinstance(phi, TestFn) else phi
    s = f.support
    if s is None:
        raise UnboundedSupport("pairing needs a compactly supported test function")
    if not u.domain.contains_interval(s.lo, s.hi, strict=True):
        raise NotContained("test function support must sit inside the domain")
    total = 0.0
    err = 0.0
    for t in u.deltas:
        if not f.domain.contains(t.point):
            continue  # outside the test function's world, hence its support
        total += t.coeff * (-1.0) ** t.order * f.jet(t.point, t.order)
    for t in u.densities:
        lo, hi = s.lo, s.hi
        if t.fn.support is not None:
            lo, hi = max(lo, t.fn.support.lo), min(hi, t.fn.support.hi)
            if lo >= hi:
                continue
        cuts = tuple(b for b in (*_density_breaks(t.fn), *f.breaks) if lo < b < hi)
        dens = t.fn
        res = integrate(lambda xs: dens.jet(xs, 0) * f.jet(xs, 0), (lo, hi),
                        rel_tol=PAIR_REL_TOL, abs_tol=PAIR_ABS_TOL, points=cuts)
        total += t.coeff * res.value
        err += abs(t.coeff) * res.error
    return PairingReport(total, err)


# ---------------------------------------------------------------------------
# mollification


def mollify(u: Distribution, rho: SmoothFn, k: float) -> SmoothFn:
    """The smooth function x -> <u, rho_k(x - .)>, rho_k(t) = k rho(k t).

    Exact in the delta terms: the m-th jet picks up k^(m+n+1) rho^(m+n).
    Densities integrate over the shifted mollifier window.  If some
    density has unbounded support the result only lives on the set of x
    whose window [x - r/k, x + r/k] stays inside the domain.
    """
    if rho.support is None:
        raise UnboundedSupport("mollifier needs compact support")
    r = max(abs(rho.support.lo), abs(rho.support.hi))
    k = float(k)
    lo, hi = u.domain.hull()
    unbounded = any(t.fn.support is None for t in u.densities)
    if unbounded:
        dlo = lo + r / k if math.isfinite(lo) else lo
        dhi = hi - r / k if math.isfinite(hi) else hi
        if not dlo < dhi:
            raise UnboundedSupport(
                "domain too small for this mollifier window; supply a cutoff first")
        dom = Domain.interval(dlo, dhi)
    else:
        dom = u.domain
    cap = rho.jet_cap - u.max_delta_order

    def jet_all(x, m):
        out = np.zeros((m + 1, x.size))
        for t in u.deltas:
            arg = k * (x - t.point)
            jets = rho.jets(arg, m + t.order)
            for j in range(m + 1):
                out[j] += t.coeff * k ** (j + t.order + 1) * jets[j + t.order]
        for t in u.densities:
            dens = t.fn
            for i, xi in enumerate(x):
                wlo, whi = xi - r / k, xi + r / k
                if dens.support is not None:
                    wlo, whi = max(wlo, dens.support.lo), min(whi, dens.support.hi)
                    if wlo >= whi:
                        continue
                cuts = tuple(b for b in dens.breaks if wlo < b < whi)
                for j in range(m + 1):
                    kern = lambda ys, jj=j: dens.jet(ys, 0) * (
                        k ** (jj + 1) * rho.jet(k * (xi - ys), jj))
                    res = integrate(kern, (wlo, whi), rel_tol=PAIR_REL_TOL,
                                    abs_tol=PAIR_ABS_TOL, points=cuts)
                    out[j, i] += t.coeff * res.value
        return out

    supp = None
    sd = support_dist(u)
    if sd and all(math.isfinite(a) and math.isfinite(b) for a, b in sd):
        supp = CompactInterval(min(a for a, _ in sd) - r / k,
                               max(b for _, b in sd) + r / k)
        dl, dh = dom.hull()
        if not (dl < supp.lo and supp.hi < dh):
            supp = None
    return SmoothFn(dom, jet_all, support=supp, jet_cap=cap)


# ---------------------------------------------------------------------------
# Lie derivative and smooth module structure


def lie_dist(X: VectorField, u: Distribution) -> Distribution:
    """Lie derivative along X, acting on distributions as densities.

    Defined through the adjoint pairing <L u, phi> = -<u, X phi' + X' phi>.
    Delta derivatives stay deltas; a density contributes X g' plus jump
    deltas X(p) [g](p) at each flagged discontinuity.
    """
    Xc = X.coef
    deltas: list[DeltaTerm] = []
    densities: list[DensityTerm] = []
    for t in u.deltas:
        n, a, c = t.order, t.point, t.coeff
        for r in range(n + 2):
            j = n - r + 1  # order of the X derivative hitting this term
            coeff = -c * (-1.0) ** (n - r) * math.comb(n + 1, j) * Xc.jet(a, j)
            if coeff != 0.0:
                deltas.append(DeltaTerm(a, r, coeff))
    for t in u.densities:
        g = t.fn
        if isinstance(g, PiecewiseFn):
            newpieces = [derivative_fn(p) * Xc for p in g.pieces]
            densities.append(DensityTerm(
                PiecewiseFn(g.breaks, newpieces, g.domain), t.coeff))
            for i, b in enumerate(g.breaks):
                jump = g.pieces[i + 1].jet(b, 0) - g.pieces[i].jet(b, 0)
                amp = t.coeff * jump * Xc.jet(b, 0)
                if amp != 0.0:
                    deltas.append(DeltaTerm(b, 0, amp))
        elif g.breaks:
            raise IncompatiblePieces(
                "density with breaks must be a PiecewiseFn to take Lie derivatives")
        else:
            densities.append(DensityTerm(derivative_fn(g) * Xc, t.coeff))
    return _normalize(u.domain, tuple(deltas), tuple(densities))


def scale_dist(f: SmoothFn, u: Distribution) -> Distribution:
    """The module action f * u of smooth functions on distributions."""
    deltas: list[DeltaTerm] = []
    densities: list[DensityTerm] = []
    for t in u.deltas:
        n, a, c = t.order, t.point, t.coeff
        fj = [f.jet(a, j) for j in range(n + 1)]
        for j in range(n + 1):
            coeff = c * math.comb(n, j) * (-1.0) ** j * fj[j]
            if coeff != 0.0:
                deltas.append(DeltaTerm(a, n - j, coeff))
    for t in u.densities:
        g = t.fn
        if isinstance(g, PiecewiseFn):
            densities.append(DensityTerm(
                PiecewiseFn(g.breaks, [p * f for p in g.pieces], g.domain), t.coeff))
        else:
            densities.append(DensityTerm(g * f, t.coeff))
    return _normalize(u.domain, tuple(deltas), tuple(densities))


# ---------------------------------------------------------------------------
# supports


def support_dist(u: Distribution) -> tuple[tuple[float, float], ...]:
    """Closed-in-domain intervals carrying u; points appear as (a, a)."""
    lo, hi = u.domain.hull()
    pieces: list[tuple[float, float]] = []
    for t in u.deltas:
        pieces.append((t.point, t.point))
    for t in u.densities:
        g = t.fn
        if isinstance(g, PiecewiseFn):
            edges = (lo,) + g.breaks + (hi,)
            for i, p in enumerate(g.pieces):
                if p.const_value == 0.0:
                    continue
                a, b = edges[i], edges[i + 1]
                if p.support is not None:
                    a, b = max(a, p.support.lo), min(b, p.support.hi)
                if a <= b:
                    pieces.append((a, b))
        elif g.support is not None:
            pieces.append((g.support.lo, g.support.hi))
        else:
            pieces.append((lo, hi))
    pieces.sort()
    merged: list[list[float]] = []
    for a, b in pieces:
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return tuple((a, b) for a, b in merged)


# ---------------------------------------------------------------------------
# restriction and transport


def restrict_dist(u: Distribution, V: Domain) -> Distribution:
    """The restriction u|_V: point masses outside V vanish, densities narrow."""
    if not V.is_subset(u.domain):
        raise NotContained("restriction target must sit inside the domain")
    deltas = tuple(t for t in u.deltas if V.contains(t.point))
    densities = tuple(
        DensityTerm(t.fn if t.fn.domain == V else restrict_view(t.fn, V), t.coeff)
        for t in u.densities)
    return Distribution(V, deltas, densities)


def pushforward_dist(u: Distribution, fwd: SmoothFn, inv: SmoothFn,
                     image: Domain) -> Distribution:
    """Transport along a diffeomorphism by plain precomposition.

    <mu_* u, g> = <u, g o mu>: point masses move to mu(point), with
    derivative orders mixing downward through the jet series of mu;
    densities change variables with the inverse Jacobian.  No Jacobian
    appears on the delta side under this convention: mu_* delta_a is
    exactly delta_{mu(a)}.
    """
    xs, xh = u.domain.hull()
    x_ref = 0.5 * (xs + xh) if math.isfinite(xs) and math.isfinite(xh) else 0.0
    slope_ref = float(fwd.jet(x_ref, 1))
    if slope_ref == 0.0:
        raise NotContained("transport map is critical inside the domain")
    sgn = math.copysign(1.0, slope_ref)

    deltas: list[DeltaTerm] = []
    for t in u.deltas:
        a, n, c = t.point, t.order, t.coeff
        mj = fwd.jets(np.array([a]), max(n, 1))[:, 0]
        b = float(mj[0])
        w = np.zeros(n + 1)
        for i in range(1, n + 1):
            w[i] = mj[i] / math.factorial(i)
        P = np.zeros(n + 1)
        P[0] = 1.0
        for m in range(0, n + 1):
            if m > 0:
                P = np.convolve(P, w)[: n + 1]
            coef = P[n]
            if coef != 0.0:
                alpha = ((-1.0) ** (n - m) * math.factorial(n)
                         / math.factorial(m) * coef)
                deltas.append(DeltaTerm(b, m, c * alpha))

    densities: list[DensityTerm] = []
    for t in u.densities:
        g = t.fn
        comp = combine(g, inv, "compose")
        h = (comp * derivative_fn(inv, 1)) * sgn
        supp = None
        if g.support is not None:
            lo = max(g.support.lo, xs)
            hi = min(g.support.hi, xh)
            if lo > hi:
                continue
            ends = sorted((float(fwd.jet(lo, 0)), float(fwd.jet(hi, 0))))
            supp = CompactInterval(ends[0], ends[1])
        brks = tuple(sorted(float(fwd.jet(bk, 0)) for bk in g.breaks
                            if u.domain.contains(bk)))
        h = SmoothFn(image, h._jet_all, support=supp, jet_cap=h.jet_cap,
                     breaks=brks)
        densities.append(DensityTerm(h, t.coeff))

    return _normalize(image, tuple(deltas), tuple(densities))


# ---------------------------------------------------------------------------
# deterministic probe battery


def default_test_battery(domain: Domain, n_centers: int = 4,
                         n_radii: int = 3) -> list[TestFn]:
    """Bump test functions at fixed centers and radii, supports inside domain.

    A deterministic surrogate for "all test functions" in weak-convergence
    and association checks.
    """
    from .smooth import bump

    lo, hi = domain.hull()
    if not (math.isfinite(lo) and math.isfinite(hi)):
        lo, hi = max(lo, -3.0), min(hi, 3.0)
    L = hi - lo
    centers = np.linspace(lo + 0.3 * L, hi - 0.3 * L, n_centers)
    out = []
    for c in centers:
        maxr = 0.9 * min(c - lo, hi - c)
        for fr in np.linspace(0.3, 0.95, n_radii):
            b = bump(float(c), float(fr * maxr), domain)
            out.append(TestFn(b))
    return out
