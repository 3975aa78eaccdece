"""Smooth functions on open subsets of the real line, with exact jets.

The whole library manipulates smooth objects through their *jets*: values
together with derivatives up to a configurable cap (``JET_CAP_DEFAULT``).
Derivatives of combined objects are never approximated numerically; sums,
products, affine substitutions and compositions propagate jets through the
usual calculus rules (linearity, Leibniz, and Faa di Bruno realized as
truncated-series arithmetic).  The one deliberate exception is
:func:`from_values`, the escape hatch for opaque evaluators, which falls
back to central differences with a single Richardson pass.

Suprema and integrals, by contrast, are honest numerics: :func:`seminorm`
samples a fixed grid (plus one midpoint refinement) and :func:`integrate`
is an adaptive Gauss-Kronrod rule.  Both are deterministic: same inputs,
same floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import (
    DomainMismatch,
    EmptyCover,
    GapInCover,
    InvalidRadius,
    JetCapExceeded,
    NoConvergence,
    NotContained,
    OutOfDomain,
    UnboundedSupport,
)

JET_CAP_DEFAULT = 8
FD_STEP_DEFAULT = 1e-4
SEMINORM_GRID = 257

_FACT = np.array([math.factorial(i) for i in range(64)], dtype=float)


# ---------------------------------------------------------------------------
# domains and supports


@dataclass(frozen=True)
class Domain:
    """An open subset of R: a finite union of disjoint open intervals."""

    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        last = -math.inf
        for lo, hi in self.intervals:
            if not lo < hi:
                raise DomainMismatch(f"degenerate interval ({lo}, {hi})")
            if lo < last:
                raise DomainMismatch("domain intervals must be sorted and disjoint")
            last = hi

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=bool)
        for lo, hi in self.intervals:
            out |= (x > lo) & (x < hi)
        return out

    def contains_interval(self, lo: float, hi: float, *, strict: bool = False) -> bool:
        """Whether [lo, hi] (or (lo, hi)) sits inside a single component."""
        for a, b in self.intervals:
            if strict:
                if a < lo and hi < b:
                    return True
            else:
                if a <= lo and hi <= b:
                    return True
            if a <= lo <= b or a <= hi <= b:
                # straddles a component boundary; no other component can help
                return False
        return False

    def is_subset(self, other: "Domain") -> bool:
        return all(other.contains_interval(lo, hi) for lo, hi in self.intervals)

    def intersect(self, other: "Domain") -> "Domain":
        pieces = []
        for a, b in self.intervals:
            for c, d in other.intervals:
                lo, hi = max(a, c), min(b, d)
                if lo < hi:
                    pieces.append((lo, hi))
        if not pieces:
            raise DomainMismatch("domains do not overlap")
        return Domain(tuple(sorted(pieces)))

    def hull(self) -> tuple[float, float]:
        return self.intervals[0][0], self.intervals[-1][1]

    def component_of(self, x: float) -> tuple[float, float]:
        for lo, hi in self.intervals:
            if lo < x < hi:
                return lo, hi
        raise OutOfDomain(f"{x} not in domain {self.intervals}")

    @staticmethod
    def reals() -> "Domain":
        return REALS

    @staticmethod
    def interval(lo: float, hi: float) -> "Domain":
        return Domain(((lo, hi),))


REALS = Domain(((-math.inf, math.inf),))


@dataclass(frozen=True)
class CompactInterval:
    """A closed bounded interval [lo, hi], used for supports and seminorms."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.lo <= self.hi):
            raise NotContained(f"not a compact interval: [{self.lo}, {self.hi}]")

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (x >= self.lo) & (x <= self.hi)

    def intersect(self, other: "CompactInterval") -> "CompactInterval | None":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return CompactInterval(lo, hi) if lo <= hi else None

    def hull(self, other: "CompactInterval") -> "CompactInterval":
        return CompactInterval(min(self.lo, other.lo), max(self.hi, other.hi))

    @property
    def width(self) -> float:
        return self.hi - self.lo


def _as_compact(K) -> CompactInterval:
    if isinstance(K, CompactInterval):
        return K
    lo, hi = K
    return CompactInterval(float(lo), float(hi))


# ---------------------------------------------------------------------------
# truncated-series helpers (coefficient arrays of shape (m+1, npoints))


def _series_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    m = a.shape[0] - 1
    out = np.zeros_like(a)
    for k in range(m + 1):
        for i in range(k + 1):
            out[k] += a[i] * b[k - i]
    return out


def _series_div(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # a/b with b[0] bounded away from zero (caller's responsibility)
    m = a.shape[0] - 1
    out = np.zeros_like(a)
    out[0] = a[0] / b[0]
    for k in range(1, m + 1):
        acc = a[k].copy()
        for j in range(k):
            acc -= out[j] * b[k - j]
        out[k] = acc / b[0]
    return out


def _series_compose(fc: np.ndarray, gc: np.ndarray) -> np.ndarray:
    """Coefficients of f(g(x)) given f-coeffs at g(x0) and g-coeffs at x0."""
    m = fc.shape[0] - 1
    gt = gc.copy()
    gt[0] = 0.0
    out = np.zeros_like(fc)
    out[0] = fc[m]
    for j in range(m - 1, -1, -1):
        out = _series_mul(out, gt)
        out[0] += fc[j]
    return out


# ---------------------------------------------------------------------------
# the core type


class SmoothFn:
    """A smooth function with vectorized jet evaluation.

    ``jet(x, m)`` returns the m-th derivative at x (scalar or ndarray).
    Outside a declared ``support`` the jets are exactly 0.0, not merely
    small; the negligibility tests downstream rely on that.  ``breaks``
    flags points where smoothness fails (piecewise data); quadrature
    splits there and jets use the right-hand branch.
    """

    __slots__ = ("domain", "support", "jet_cap", "const_value", "breaks", "_jet_all")

    def __init__(
        self,
        domain: Domain,
        jet_all: Callable[[np.ndarray, int], np.ndarray],
        *,
        support: CompactInterval | None = None,
        jet_cap: int = JET_CAP_DEFAULT,
        const_value: float | None = None,
        breaks: tuple[float, ...] = (),
    ):
        self.domain = domain
        self.support = support
        self.jet_cap = jet_cap
        self.const_value = const_value
        self.breaks = breaks
        self._jet_all = jet_all

    # -- evaluation --------------------------------------------------------

    def _masked_all(self, x: np.ndarray, m: int) -> np.ndarray:
        """All jets 0..m at in-domain points, with the support mask applied."""
        if self.support is not None:
            inside = self.support.contains(x)
            vals = np.zeros((m + 1, x.size))
            if inside.any():
                vals[:, inside] = self._jet_all(x[inside], m)
            return vals
        return self._jet_all(x, m)

    def jet(self, x, m: int = 0):
        if m < 0:
            raise ValueError("derivative order must be >= 0")
        if m > self.jet_cap:
            raise JetCapExceeded(f"order {m} exceeds jet cap {self.jet_cap}")
        arr = np.asarray(x, dtype=float)
        scalar = arr.ndim == 0
        flat = np.atleast_1d(arr).ravel()
        if not self.domain.contains(flat).all():
            bad = flat[~self.domain.contains(flat)][0]
            raise OutOfDomain(f"{bad} not in domain {self.domain.intervals}")
        vals = self._masked_all(flat, m)[m]
        if scalar:
            return float(vals[0])
        return vals.reshape(arr.shape)

    def jets(self, x, m: int) -> np.ndarray:
        """All derivatives 0..m at once, shape (m+1,) + x.shape."""
        if m > self.jet_cap:
            raise JetCapExceeded(f"order {m} exceeds jet cap {self.jet_cap}")
        arr = np.asarray(x, dtype=float)
        flat = np.atleast_1d(arr).ravel()
        if not self.domain.contains(flat).all():
            raise OutOfDomain(f"point outside domain {self.domain.intervals}")
        vals = self._masked_all(flat, m)
        return vals.reshape((m + 1,) + arr.shape)

    def __call__(self, x):
        return self.jet(x, 0)

    # -- algebra -----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, SmoothFn):
            return lin_comb([self, other], [1.0, 1.0])
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, SmoothFn):
            return lin_comb([self, other], [1.0, -1.0])
        return NotImplemented

    def __neg__(self):
        return lin_comb([self], [-1.0])

    def __mul__(self, other):
        if isinstance(other, SmoothFn):
            return combine(self, other, "product")
        if isinstance(other, (int, float)):
            return lin_comb([self], [float(other)])
        return NotImplemented

    __rmul__ = __mul__

    def __repr__(self):
        s = f"[{self.support.lo:.4g},{self.support.hi:.4g}]" if self.support else "-"
        return f"SmoothFn(domain={self.domain.intervals}, supp={s}, cap={self.jet_cap})"


class PiecewiseFn(SmoothFn):
    """Smooth away from finitely many flagged break points.

    Jets at a break use the right-hand piece; pairings never see the
    difference (the flags force quadrature splits there).
    """

    __slots__ = ("pieces",)

    def __init__(self, breaks: Sequence[float], pieces: Sequence[SmoothFn], domain: Domain):
        if len(pieces) != len(breaks) + 1:
            raise ValueError("need exactly one piece more than breaks")
        bks = tuple(float(b) for b in breaks)
        if list(bks) != sorted(bks):
            raise ValueError("breaks must be sorted")
        self.pieces = tuple(pieces)
        cap = min(p.jet_cap for p in pieces)
        bk_arr = np.asarray(bks)

        def jet_all(x, m):
            idx = np.searchsorted(bk_arr, x, side="right")
            out = np.zeros((m + 1, x.size))
            for i, p in enumerate(self.pieces):
                mask = idx == i
                if mask.any():
                    out[:, mask] = p._masked_all(x[mask], m)
            return out

        super().__init__(domain, jet_all, jet_cap=cap, breaks=bks)


def zero(domain: Domain = REALS) -> SmoothFn:
    return constant(0.0, domain)


def constant(c: float, domain: Domain = REALS) -> SmoothFn:
    c = float(c)

    def jet_all(x, m):
        out = np.zeros((m + 1, x.size))
        out[0] = c
        return out

    return SmoothFn(domain, jet_all, const_value=c, jet_cap=99)


def polynomial(coeffs: Sequence[float], domain: Domain = REALS) -> SmoothFn:
    base = np.asarray(coeffs, dtype=float)
    derived = [base]

    def jet_all(x, m):
        while len(derived) <= m:
            derived.append(npoly.polyder(derived[-1]))
        out = np.empty((m + 1, x.size))
        for j in range(m + 1):
            out[j] = npoly.polyval(x, derived[j])
        return out

    cv = float(base[0]) if base.size == 1 or not base[1:].any() else None
    return SmoothFn(domain, jet_all, const_value=cv, jet_cap=99)


def identity(domain: Domain = REALS) -> SmoothFn:
    return polynomial([0.0, 1.0], domain)


def sin_fn(domain: Domain = REALS) -> SmoothFn:
    def jet_all(x, m):
        out = np.empty((m + 1, x.size))
        table = (np.sin(x), np.cos(x), -np.sin(x), -np.cos(x))
        for j in range(m + 1):
            out[j] = table[j % 4]
        return out

    return SmoothFn(domain, jet_all, jet_cap=99)


def cos_fn(domain: Domain = REALS) -> SmoothFn:
    def jet_all(x, m):
        out = np.empty((m + 1, x.size))
        table = (np.cos(x), -np.sin(x), -np.cos(x), np.sin(x))
        for j in range(m + 1):
            out[j] = table[j % 4]
        return out

    return SmoothFn(domain, jet_all, jet_cap=99)


def exp_fn(domain: Domain = REALS) -> SmoothFn:
    def jet_all(x, m):
        e = np.exp(x)
        return np.tile(e, (m + 1, 1))

    return SmoothFn(domain, jet_all, jet_cap=99)


# ---------------------------------------------------------------------------
# bump functions and plateaus

# Numerically dead zone: once 1 - 1/(1-t^2) drops below this, exp underflows
# and every derivative is an exact double-precision zero.  Returning 0.0
# outright avoids inf * 0 from the rational prefactors.
_EXP_UNDERFLOW = -700.0


def bump(center: float = 0.0, radius: float = 1.0, domain: Domain = REALS) -> SmoothFn:
    """The standard bump exp(1 - 1/(1 - t^2)), t = (x-center)/radius.

    Value 1 at the center, support exactly [center-radius, center+radius].
    The m-th derivative is P_m(t) / (1-t^2)^(2m) * g(t) / radius^m with the
    polynomial recurrence

        P_0 = 1,   P_{m+1} = P_m' (1-t^2)^2 + (4 m t (1-t^2) - 2 t) P_m,

    which follows from g' = -2t/(1-t^2)^2 * g.
    """
    if not (radius > 0 and math.isfinite(radius)):
        raise InvalidRadius(f"radius must be positive and finite, got {radius}")
    polys: list[np.ndarray] = [np.array([1.0])]
    w2 = np.array([1.0, 0.0, -1.0])  # 1 - t^2

    def prefactor(m: int) -> np.ndarray:
        while len(polys) <= m:
            j = len(polys) - 1
            P = polys[-1]
            nxt = npoly.polymul(npoly.polyder(P), npoly.polymul(w2, w2))
            nxt = npoly.polyadd(nxt, npoly.polymul(npoly.polymul([0.0, 1.0], P),
                                                   npoly.polyadd(4.0 * j * w2, [-2.0])))
            polys.append(nxt)
        return polys[m]

    def jet_all(x, m):
        t = (x - center) / radius
        w = 1.0 - t * t
        live = w > 0
        expo = np.where(live, 1.0 - 1.0 / np.where(live, w, 1.0), _EXP_UNDERFLOW - 1)
        live &= expo > _EXP_UNDERFLOW
        g = np.where(live, np.exp(np.where(live, expo, 0.0)), 0.0)
        out = np.zeros((m + 1, x.size))
        if not live.any():
            return out
        tl, wl, gl = t[live], w[live], g[live]
        scale = 1.0
        for j in range(m + 1):
            out[j, live] = npoly.polyval(tl, prefactor(j)) / wl ** (2 * j) * gl / scale
            scale *= radius
        return out

    return SmoothFn(domain, jet_all, jet_cap=12,
                    support=CompactInterval(center - radius, center + radius))


def _expnegrecip_jets(t: np.ndarray, m: int) -> np.ndarray:
    """Jets of t -> exp(-1/t) for t > 0 (0 elsewhere), via Q_{j+1} = s^2 (Q_j - Q_j')."""
    out = np.zeros((m + 1, t.size))
    live = t > -1.0 / _EXP_UNDERFLOW
    if not live.any():
        return out
    s = 1.0 / t[live]
    e = np.exp(-s)
    Q = np.array([1.0])
    s2 = np.array([0.0, 0.0, 1.0])
    for j in range(m + 1):
        out[j, live] = npoly.polyval(s, Q) * e
        Q = npoly.polymul(s2, npoly.polysub(Q, npoly.polyder(Q)))
    return out


def _step_jets(t: np.ndarray, m: int) -> np.ndarray:
    """Jets of the smooth step S(t) = f(t) / (f(t) + f(1-t)), f(t) = exp(-1/t).

    S is exactly 0 for t <= 0 and exactly 1 for t >= 1; the division is
    well conditioned because the denominator is bounded below on (0, 1).
    """
    out = np.zeros((m + 1, t.size))
    out[0, t >= 1.0] = 1.0
    mid = (t > 0.0) & (t < 1.0)
    if not mid.any():
        return out
    tm = t[mid]
    F = _expnegrecip_jets(tm, m)
    G = _expnegrecip_jets(1.0 - tm, m)
    sign = np.array([(-1.0) ** j for j in range(m + 1)])[:, None]
    G = G * sign
    fact = _FACT[: m + 1, None]
    num = F / fact
    den = (F + G) / fact
    quot = _series_div(num, den)
    out[:, mid] = quot * fact
    return out


def smoothstep(x0: float, x1: float, domain: Domain = REALS) -> SmoothFn:
    """Monotone C-infinity step: exactly 0 left of x0, exactly 1 right of x1."""
    if not x0 < x1:
        raise InvalidRadius("smoothstep needs x0 < x1")
    w = x1 - x0

    def jet_all(x, m):
        t = (x - x0) / w
        vals = _step_jets(t, m)
        chain = np.array([w ** (-j) for j in range(m + 1)])[:, None]
        return vals * chain

    return SmoothFn(domain, jet_all, jet_cap=12)


def plateau(lo: float, hi: float, rise: float, domain: Domain = REALS) -> SmoothFn:
    """Cutoff that is exactly 1 on [lo, hi], with support [lo-rise, hi+rise].

    Product of a rising and a falling smooth step; on the plateau both
    factors are exactly 1.0, so downstream eventual-equality certificates
    see genuine floating-point identity, not approximation.
    """
    if not (rise > 0 and lo <= hi):
        raise InvalidRadius(f"bad plateau data lo={lo} hi={hi} rise={rise}")

    def jet_all(x, m):
        tu = (x - (lo - rise)) / rise
        td = ((hi + rise) - x) / rise
        U = _step_jets(tu, m)
        D = _step_jets(td, m)
        cu = np.array([rise ** (-j) for j in range(m + 1)])[:, None]
        cd = np.array([(-1.0 / rise) ** j for j in range(m + 1)])[:, None]
        U = U * cu
        D = D * cd
        out = np.zeros((m + 1, x.size))
        for k in range(m + 1):
            for i in range(k + 1):
                out[k] += math.comb(k, i) * U[i] * D[k - i]
        return out

    return SmoothFn(domain, jet_all, jet_cap=12,
                    support=CompactInterval(lo - rise, hi + rise))


# ---------------------------------------------------------------------------
# combinators


def lin_comb(fns: Sequence[SmoothFn], coefs: Sequence[float]) -> SmoothFn:
    if len(fns) != len(coefs):
        raise ValueError("length mismatch")
    fns = list(fns)
    coefs = [float(c) for c in coefs]
    dom = fns[0].domain
    for f in fns[1:]:
        if f.domain != dom:
            dom = dom.intersect(f.domain)
    cap = min(f.jet_cap for f in fns)
    supp = None
    if all(f.support is not None for f in fns):
        supp = fns[0].support
        for f in fns[1:]:
            supp = supp.hull(f.support)
    breaks = tuple(sorted({b for f in fns for b in f.breaks}))
    cv = None
    if all(f.const_value is not None for f in fns):
        cv = sum(c * f.const_value for c, f in zip(coefs, fns))

    def jet_all(x, m):
        out = np.zeros((m + 1, x.size))
        for c, f in zip(coefs, fns):
            out += c * f._masked_all(x, m)
        return out

    return SmoothFn(dom, jet_all, support=supp, jet_cap=cap, const_value=cv, breaks=breaks)


def _product(f: SmoothFn, g: SmoothFn) -> SmoothFn:
    dom = f.domain if f.domain == g.domain else f.domain.intersect(g.domain)
    cap = min(f.jet_cap, g.jet_cap)
    supp = None
    if f.support is not None and g.support is not None:
        supp = f.support.intersect(g.support)
        if supp is None:
            return zero(dom)
    elif f.support is not None:
        supp = f.support
    elif g.support is not None:
        supp = g.support
    breaks = tuple(sorted(set(f.breaks) | set(g.breaks)))
    cv = None
    if f.const_value is not None and g.const_value is not None:
        cv = f.const_value * g.const_value

    def jet_all(x, m):
        F = f._masked_all(x, m)
        G = g._masked_all(x, m)
        out = np.zeros((m + 1, x.size))
        for k in range(m + 1):
            for i in range(k + 1):
                out[k] += math.comb(k, i) * F[i] * G[k - i]
        return out

    return SmoothFn(dom, jet_all, support=supp, jet_cap=cap, const_value=cv, breaks=breaks)


def _compose(outer: SmoothFn, inner: SmoothFn) -> SmoothFn:
    cap = min(outer.jet_cap, inner.jet_cap)

    def jet_all(x, m):
        G = inner._masked_all(x, m)
        g0 = G[0]
        if not outer.domain.contains(g0).all():
            raise OutOfDomain("inner function leaves the outer domain")
        F = outer._jet_all(g0, m) if outer.support is None else outer._masked_all(g0, m)
        if m == 0:
            return F
        fact = _FACT[: m + 1, None]
        hc = _series_compose(F / fact, G / fact)
        return hc * fact

    return SmoothFn(inner.domain, jet_all, jet_cap=cap, breaks=inner.breaks)


def combine(f: SmoothFn, g: SmoothFn, op: str) -> SmoothFn:
    """Sum, product, or composition (f after g), with exact jet propagation."""
    if op == "sum":
        return lin_comb([f, g], [1.0, 1.0])
    if op == "product":
        return _product(f, g)
    if op == "compose":
        return _compose(f, g)
    raise ValueError(f"unknown op {op!r}")


def precompose_affine(f: SmoothFn, a: float, b: float) -> SmoothFn:
    """x -> f(a*x + b) with jets scaled by a^m; the workhorse for translates."""
    a = float(a)
    b = float(b)
    if a == 0.0:
        return constant(f(b))
    ivs = sorted(tuple(sorted(((lo - b) / a, (hi - b) / a)))
                 for lo, hi in f.domain.intervals)
    dom = Domain(tuple(ivs))
    supp = None
    if f.support is not None:
        s = sorted(((f.support.lo - b) / a, (f.support.hi - b) / a))
        supp = CompactInterval(*s)
    breaks = tuple(sorted((bk - b) / a for bk in f.breaks))

    def jet_all(x, m):
        vals = f._masked_all(a * x + b, m)
        chain = np.array([a ** j for j in range(m + 1)])[:, None]
        return vals * chain

    return SmoothFn(dom, jet_all, support=supp, jet_cap=f.jet_cap,
                    const_value=f.const_value, breaks=breaks)


def derivative_fn(f: SmoothFn, order: int = 1) -> SmoothFn:
    if order < 0:
        raise ValueError("order must be >= 0")
    if order == 0:
        return f
    if f.jet_cap < order:
        raise JetCapExceeded(f"cannot differentiate {order} times past cap {f.jet_cap}")

    def jet_all(x, m):
        return f._masked_all(x, m + order)[order:]

    return SmoothFn(f.domain, jet_all, support=f.support,
                    jet_cap=f.jet_cap - order, breaks=f.breaks)


def from_values(evaluator: Callable[[np.ndarray], np.ndarray], domain: Domain,
                *, jet_cap: int = JET_CAP_DEFAULT, fd_step: float = FD_STEP_DEFAULT,
                support: CompactInterval | None = None) -> SmoothFn:
    """Wrap an opaque pointwise evaluator; jets by central differences.

    Each derivative order applies one central difference with a single
    Richardson extrapolation pass (step fd_step, then fd_step/2).  Exact
    enough for probing and round trips, not for high-order asymptotics;
    prefer structural jets wherever a formula exists.
    """

    def deriv(x: np.ndarray, order: int) -> np.ndarray:
        if order == 0:
            return np.asarray(evaluator(x), dtype=float)
        prev = lambda xs: deriv(xs, order - 1)
        h = fd_step

        def central(step):
            return (prev(x + step) - prev(x - step)) / (2.0 * step)

        d1 = central(h)
        d2 = central(h / 2.0)
        return (4.0 * d2 - d1) / 3.0

    def jet_all(x, m):
        out = np.empty((m + 1, x.size))
        for j in range(m + 1):
            out[j] = deriv(x, j)
        return out

    return SmoothFn(domain, jet_all, jet_cap=jet_cap, support=support)


def restrict_view(f: SmoothFn, sub: Domain) -> SmoothFn:
    """The same jets on a smaller open set."""
    if not sub.is_subset(f.domain):
        raise NotContained("restriction target is not a subset")
    return SmoothFn(sub, f._jet_all, support=f.support, jet_cap=f.jet_cap,
                    const_value=f.const_value, breaks=f.breaks)


def extend_by_zero(f: SmoothFn, new_domain: Domain) -> SmoothFn:
    """Zero-extension of a compactly supported function to a larger open set."""
    if f.support is None:
        raise UnboundedSupport("extend_by_zero needs a declared compact support")
    if not new_domain.contains_interval(f.support.lo, f.support.hi, strict=True):
        raise NotContained("support must sit strictly inside the new domain")

    def jet_all(x, m):
        out = np.zeros((m + 1, x.size))
        inside = f.support.contains(x) & f.domain.contains(x)
        if inside.any():
            out[:, inside] = f._jet_all(x[inside], m)
        return out

    return SmoothFn(new_domain, jet_all, support=f.support, jet_cap=f.jet_cap,
                    breaks=f.breaks)


# ---------------------------------------------------------------------------
# test functions and vector fields


@dataclass(frozen=True)
class TestFn:
    """A smooth function with compact support strictly inside its open domain."""

    fn: SmoothFn

    def __post_init__(self):
        s = self.fn.support
        if s is None:
            raise UnboundedSupport("test functions need a declared compact support")
        lo, hi = self.fn.domain.hull()
        if not (lo < s.lo and s.hi < hi):
            raise NotContained(
                f"support [{s.lo}, {s.hi}] must be strictly inside ({lo}, {hi})")

    @property
    def support(self) -> CompactInterval:
        return self.fn.support

    @property
    def domain(self) -> Domain:
        return self.fn.domain

    def jet(self, x, m: int = 0):
        return self.fn.jet(x, m)

    def __call__(self, x):
        return self.fn.jet(x, 0)

    def __add__(self, other: "TestFn") -> "TestFn":
        return TestFn(self.fn + other.fn)

    def __sub__(self, other: "TestFn") -> "TestFn":
        return TestFn(self.fn - other.fn)

    def __rmul__(self, c: float) -> "TestFn":
        return TestFn(lin_comb([self.fn], [float(c)]))

    def __neg__(self) -> "TestFn":
        return TestFn(lin_comb([self.fn], [-1.0]))

    def mul_smooth(self, g: SmoothFn) -> "TestFn":
        prod = _product(self.fn, g)
        if prod.support is None:
            prod = SmoothFn(prod.domain, prod._jet_all, support=self.support,
                            jet_cap=prod.jet_cap, breaks=prod.breaks)
        return TestFn(prod)

    def extend_to(self, new_domain: Domain) -> "TestFn":
        if new_domain == self.domain:
            return self
        return TestFn(extend_by_zero(self.fn, new_domain))


@dataclass(frozen=True)
class VectorField:
    """A complete smooth vector field X = coef(x) d/dx on its domain."""

    coef: SmoothFn

    @property
    def domain(self) -> Domain:
        return self.coef.domain


def constant_field(c: float, domain: Domain = REALS) -> VectorField:
    return VectorField(constant(c, domain))


def lie_smooth(X: VectorField, f: SmoothFn, mode: str = "function") -> SmoothFn:
    """Lie derivative along X.

    function mode: X f' (directional derivative of a scalar field);
    nform mode:    X f' + X' f (f transforms as a density / 1-form in 1D).
    Supports are preserved; the jet cap drops by one.
    """
    Xf = X.coef
    df = derivative_fn(f, 1)
    if mode == "function":
        out = _product(Xf, df)
    elif mode == "nform":
        out = _product(Xf, df) + _product(derivative_fn(Xf, 1), f)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if f.support is not None and out.support is None:
        out = SmoothFn(out.domain, out._jet_all, support=f.support,
                       jet_cap=out.jet_cap, breaks=out.breaks)
    return out


# ---------------------------------------------------------------------------
# seminorms


def seminorm(f: SmoothFn, K, m: int, *, grid: int = SEMINORM_GRID,
             zoom: int = 2) -> float:
    """sup over K of |f^(a)| for all orders a <= m, on a deterministic grid.

    The grid has ``grid`` uniform points plus one midpoint refinement pass
    (midpoints of every adjacent pair), i.e. 2*grid - 1 samples total.
    ``zoom`` extra passes then resample densely around the best point seen,
    so a narrow spike straddling two grid points is still measured; the
    estimate never decreases with zooming.
    """
    K = _as_compact(K)
    if not f.domain.contains_interval(K.lo, K.hi, strict=True):
        raise OutOfDomain(f"compact [{K.lo}, {K.hi}] not inside domain")
    xs = np.linspace(K.lo, K.hi, grid)
    mids = 0.5 * (xs[:-1] + xs[1:])
    pts = np.concatenate([xs, mids])
    vals = np.abs(f.jets(pts, m))
    best = float(vals.max())
    x0 = float(pts[vals.max(axis=0).argmax()])
    h = 0.5 * (K.hi - K.lo) / (grid - 1)
    for _ in range(zoom):
        zpts = np.linspace(max(K.lo, x0 - h), min(K.hi, x0 + h), 65)
        zv = np.abs(f.jets(zpts, m))
        zbest = float(zv.max())
        if zbest > best:
            best = zbest
            x0 = float(zpts[zv.max(axis=0).argmax()])
        h /= 32.0
    return best


# ---------------------------------------------------------------------------
# adaptive quadrature (Gauss-Kronrod 7/15)

_GK_NODES = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0, 0.207784955007898, 0.405845151377397,
    0.586087235467691, 0.741531185599394, 0.864864423359769,
    0.949107912342759, 0.991455371120813,
])
_GK_WK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529,
])
_GK_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870,
])


class QuadResult(tuple):
    """(value, error) with attribute access."""

    def __new__(cls, value: float, error: float):
        return super().__new__(cls, (value, error))

    @property
    def value(self) -> float:
        return self[0]

    @property
    def error(self) -> float:
        return self[1]


def _gk_panel(fn, lo: float, hi: float) -> tuple[float, float, float]:
    c = 0.5 * (lo + hi)
    h = 0.5 * (hi - lo)
    xs = c + h * _GK_NODES
    ys = np.asarray(fn(xs), dtype=float)
    ik = h * float(_GK_WK @ ys)
    ig = h * float(_GK_WG @ ys[1::2])
    mass = h * float(_GK_WK @ np.abs(ys))
    return ik, abs(ik - ig), mass


_QUAD_NOISE = 1e-14  # relative to the integral of |f|


def integrate(fn, interval, *, rel_tol: float = 1e-9, abs_tol: float = 1e-12,
              points: Iterable[float] = (), max_panels: int = 4096) -> QuadResult:
    """Deterministic adaptive Gauss-Kronrod integration.

    ``points`` lists interior locations that force panel boundaries
    (support edges, piecewise breaks); refinement always splits the panel
    with the largest error estimate, ties broken by position.  Raises
    :class:`NoConvergence` (carrying the best estimate and a bound) if the
    panel budget runs out.

    Tolerances below the roundoff of summing |f| are unreachable for a
    cancelling integrand; acceptance therefore includes a noise floor
    proportional to the integral of |f|.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if hi <= lo:
        return QuadResult(0.0, 0.0)
    if isinstance(fn, SmoothFn):
        ev = lambda xs: fn.jet(xs, 0)
        points = tuple(points) + fn.breaks
    else:
        ev = fn
    cuts = sorted({lo, hi, *(p for p in points if lo < p < hi)})
    panels = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        panels.append((a, b) + _gk_panel(ev, a, b))
    while True:
        total = sum(p[2] for p in panels)
        toterr = sum(p[3] for p in panels)
        # the floor term is the cancellation noise of the node sums; no
        # amount of refinement pushes the estimate below it
        floor = _QUAD_NOISE * sum(p[4] for p in panels)
        if toterr <= max(abs_tol, rel_tol * abs(total), floor):
            return QuadResult(total, toterr)
        if len(panels) >= max_panels:
            raise NoConvergence(
                f"quadrature budget ({max_panels} panels) exhausted", total, toterr)
        worst = max(range(len(panels)), key=lambda i: (panels[i][3], -panels[i][0]))
        a, b, _, _, _ = panels.pop(worst)
        mid = 0.5 * (a + b)
        panels.append((a, mid) + _gk_panel(ev, a, mid))
        panels.append((mid, b) + _gk_panel(ev, mid, b))


# ---------------------------------------------------------------------------
# partitions of unity


@dataclass(frozen=True)
class PartitionOfUnity:
    """Finitely many smooth chi_i >= 0 with sum 1 on ``covered``, supp chi_i in piece i."""

    pieces: tuple[tuple[float, float], ...]
    chis: tuple[SmoothFn, ...]
    covered: tuple[float, float]

    def active_keys(self, x: float) -> list[int]:
        out = []
        for i, chi in enumerate(self.chis):
            s = chi.support
            if s is None or (s.lo <= x <= s.hi):
                out.append(i)
        return out

    def chi(self, key: int) -> SmoothFn:
        return self.chis[key]


def partition_of_unity(cover: Sequence[tuple[float, float]]) -> PartitionOfUnity:
    """A partition of unity subordinate to a finite interval cover.

    Pieces must be staggered: sorted, overlapping consecutively, none
    swallowed by its neighbors.  Bumps rise and fall strictly inside the
    overlaps; pieces touching the boundary of the union stay flat there, so
    the sum is exactly representable and normalization never divides by
    anything small.
    """
    pieces = sorted((float(a), float(b)) for a, b in cover)
    if not pieces:
        raise EmptyCover("no cover pieces given")
    for (a, b) in pieces:
        if not a < b:
            raise GapInCover(f"degenerate cover piece ({a}, {b})")
    los = [p[0] for p in pieces]
    his = [p[1] for p in pieces]
    if los != sorted(los) or his != sorted(his):
        raise GapInCover("cover pieces must be staggered, none contained in another")
    for (a0, b0), (a1, b1) in zip(pieces[:-1], pieces[1:]):
        if not a1 < b0:
            raise GapInCover(f"pieces ({a0}, {b0}) and ({a1}, {b1}) do not overlap")
    c0, c1 = pieces[0][0], pieces[-1][1]
    bumps = []
    for i, (a, b) in enumerate(pieces):
        ol = pieces[i - 1][1] - a if i > 0 else None
        orr = b - pieces[i + 1][0] if i + 1 < len(pieces) else None
        factors = []
        if ol is not None:
            factors.append(smoothstep(a + 0.25 * ol, a + 0.75 * ol))
        if orr is not None:
            down = smoothstep(b - 0.75 * orr, b - 0.25 * orr)
            factors.append(constant(1.0) - down)
        if not factors:
            g = constant(1.0)
        else:
            g = factors[0]
            for fct in factors[1:]:
                g = _product(g, fct)
        slo = a + 0.25 * ol if ol is not None else None
        shi = b - 0.25 * orr if orr is not None else None
        if slo is not None or shi is not None:
            supp = CompactInterval(slo if slo is not None else min(c0, a),
                                   shi if shi is not None else max(c1, b))
            g = SmoothFn(g.domain, g._jet_all, support=supp, jet_cap=g.jet_cap)
        bumps.append(g)
    dom = Domain.interval(c0, c1)
    total = lin_comb(bumps, [1.0] * len(bumps))
    chis = []
    for g in bumps:
        chis.append(_normalized(g, total, dom))
    return PartitionOfUnity(tuple(pieces), tuple(chis), (c0, c1))


def _normalized(g: SmoothFn, total: SmoothFn, dom: Domain) -> SmoothFn:
    """g / total on dom, where total >= some c > 0; jets by series division."""
    cap = min(g.jet_cap, total.jet_cap)

    def jet_all(x, m):
        G = g._masked_all(x, m)
        T = total._masked_all(x, m)
        fact = _FACT[: m + 1, None]
        return _series_div(G / fact, T / fact) * fact

    return SmoothFn(dom, jet_all, support=g.support, jet_cap=cap)


class DyadicPartition:
    """A lazy, locally finite partition of unity on an open interval.

    Pieces are relatively compact in the domain: a central core, dyadic
    rings accumulating at each finite endpoint, and unit tiles marching to
    infinity on unbounded sides.  Consecutive pieces overlap by a fixed
    fraction.  Every piece key also has a companion plateau ``cutoff``
    equal to 1 on a neighborhood of the piece and compactly supported in
    the domain; restriction and embedding constructions use both.
    """

    RING_BASE = 4.0  # core margin = length / RING_BASE

    def __init__(self, domain: Domain):
        if len(domain.intervals) != 1:
            raise DomainMismatch("dyadic partitions want a single interval")
        self.domain = domain
        self.lo, self.hi = domain.intervals[0]
        self._bumps: dict = {}
        self._chis: dict = {}
        self._cutoffs: dict = {}
        if math.isfinite(self.lo) and math.isfinite(self.hi):
            self.D = (self.hi - self.lo) / self.RING_BASE
        else:
            self.D = 1.0

    # -- geometry ----------------------------------------------------------

    def piece(self, key) -> tuple[float, float]:
        kind = key[0]
        if kind == "core":
            return (self.lo + self.D / 2.0, self.hi - self.D / 2.0)
        if kind == "L":
            ell = key[1]
            return (self.lo + self.D * 2.0 ** (-ell - 1), self.lo + self.D * 2.0 ** (-ell + 1))
        if kind == "R":
            ell = key[1]
            return (self.hi - self.D * 2.0 ** (-ell + 1), self.hi - self.D * 2.0 ** (-ell - 1))
        if kind == "T":
            n = key[1]
            if math.isfinite(self.lo) and not math.isfinite(self.hi):
                base = self.lo + 0.5
                return (base + 0.75 * n, base + 0.75 * n + 1.0)
            if math.isfinite(self.hi) and not math.isfinite(self.lo):
                base = self.hi - 0.5
                return (base - 0.75 * n - 1.0, base - 0.75 * n)
            return (0.75 * n - 0.5, 0.75 * n + 0.5)
        raise KeyError(key)

    def _ring_keys(self, side: str, d: float) -> list:
        # rings at depth ell cover distances (D 2^-ell-1, D 2^-ell+1)
        if d <= 0 or d >= self.D:
            return []
        lc = math.log2(self.D / d)
        out = []
        for ell in range(max(1, math.floor(lc)), math.ceil(lc) + 2):
            a = self.D * 2.0 ** (-ell - 1)
            b = self.D * 2.0 ** (-ell + 1)
            if a < d < b:
                out.append((side, ell))
        return out

    def active_keys(self, x: float) -> list:
        if not (self.lo < x < self.hi):
            raise OutOfDomain(f"{x} not in ({self.lo}, {self.hi})")
        keys = []
        fin_lo, fin_hi = math.isfinite(self.lo), math.isfinite(self.hi)
        if fin_lo and fin_hi:
            dl, dr = x - self.lo, self.hi - x
            if dl > self.D / 2.0 and dr > self.D / 2.0:
                keys.append(("core",))
            keys += self._ring_keys("L", dl)
            keys += self._ring_keys("R", dr)
            return keys
        if fin_lo:
            keys += self._ring_keys("L", x - self.lo)
            u = (x - self.lo - 0.5) / 0.75  # tile n is active iff u - 4/3 < n < u
            lo_n = max(0, math.ceil(u - 4.0 / 3.0))
        elif fin_hi:
            keys += self._ring_keys("R", self.hi - x)
            u = (self.hi - 0.5 - x) / 0.75
            lo_n = max(0, math.ceil(u - 4.0 / 3.0))
        else:
            u = (x + 0.5) / 0.75  # tile n covers (0.75 n - 0.5, 0.75 n + 0.5)
            lo_n = math.ceil(u - 4.0 / 3.0)
        for n in range(lo_n, math.floor(u) + 1):
            a, b = self.piece(("T", n))
            if a < x < b:
                keys.append(("T", n))
        return keys

    def _overlaps(self, key) -> tuple[float, float]:
        """(left, right) overlap widths of a piece with its neighbors."""
        a, b = self.piece(key)
        kind = key[0]
        if kind == "core":
            return (self.D / 2.0, self.D / 2.0)
        if kind in ("L", "R"):
            ell = key[1]
            deeper = self.D * 2.0 ** (-ell - 1)   # overlap with ring ell+1
            shallower = self.D * 2.0 ** (-ell)    # overlap with ring ell-1 / core / tile0
            return (deeper, shallower) if kind == "L" else (shallower, deeper)
        # tiles overlap 0.25 on both sides (ring1/tile chain)
        return (0.25, 0.25)

    # -- smooth data -------------------------------------------------------

    def bump(self, key) -> SmoothFn:
        if key not in self._bumps:
            a, b = self.piece(key)
            ol, orr = self._overlaps(key)
            up = smoothstep(a + 0.25 * ol, a + 0.75 * ol)
            down = constant(1.0) - smoothstep(b - 0.75 * orr, b - 0.25 * orr)
            g = _product(up, down)
            g = SmoothFn(g.domain, g._jet_all, jet_cap=g.jet_cap,
                         support=CompactInterval(a + 0.25 * ol, b - 0.25 * orr))
            self._bumps[key] = g
        return self._bumps[key]

    def chi(self, key) -> SmoothFn:
        """The normalized partition function for a piece, smooth on the domain."""
        if key not in self._chis:
            part = self

            def jet_all(x, m, _key=key):
                out = np.zeros((m + 1, x.size))
                # group points by their active key superset
                keysets: dict[tuple, list[int]] = {}
                for i, xi in enumerate(x):
                    ks = tuple(part.active_keys(float(xi)))
                    keysets.setdefault(ks, []).append(i)
                for ks, idxs in keysets.items():
                    if _key not in ks:
                        continue
                    xi = x[np.asarray(idxs)]
                    G = part.bump(_key)._masked_all(xi, m)
                    T = np.zeros_like(G)
                    for kk in ks:
                        T += part.bump(kk)._masked_all(xi, m)
                    fact = _FACT[: m + 1, None]
                    out[:, np.asarray(idxs)] = _series_div(G / fact, T / fact) * fact
                return out

            g = self.bump(key)
            self._chis[key] = SmoothFn(self.domain, jet_all, support=g.support,
                                       jet_cap=g.jet_cap)
        return self._chis[key]

    def cutoff(self, key) -> SmoothFn:
        """Plateau equal to 1 on a neighborhood of the piece, supported in the domain."""
        if key not in self._cutoffs:
            a, b = self.piece(key)
            kind = key[0]
            if kind == "core":
                margin = self.D / 2.0
            elif kind in ("L", "R"):
                margin = self.D * 2.0 ** (-key[1] - 1)
            else:
                margin = 0.5
            delta = margin / 2.0
            self._cutoffs[key] = plateau(a - delta / 2.0, b + delta / 2.0, delta / 2.0)
        return self._cutoffs[key]

    def margin(self, key) -> float:
        """Distance the cutoff plateau extends beyond the piece."""
        a, b = self.piece(key)
        return (self.cutoff(key).support.lo - a) * -1.0
