"""Smoothing kernels: smooth maps from an open set into test densities.

A kernel assigns to each x a compactly supported smooth density in y;
rated sequences of kernels (indexed by k) drive every regularization in
the package.  All variants expose exact mixed jets

    jets(x, mx, ys, my)[i, j, n] = d^i/dx^i d^j/dy^j phi(x, y_n),

computed structurally through truncated Taylor series, never by finite
differences (except the explicit Generic escape hatch).  Exact mixed
jets are what keep delta pairings and Lie-derivative identities at
machine precision downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DomainMismatch,
    IncompatiblePieces,
    InvalidRadius,
    NotContained,
    OutOfDomain,
    SingularMomentSystem,
)
from .smooth import (
    _FACT,
    _series_compose,
    _series_div,
    _series_mul,
    CompactInterval,
    Domain,
    DyadicPartition,
    SmoothFn,
    TestFn,
    VectorField,
    bump,
    constant,
    integrate,
    partition_of_unity,
    plateau,
    polynomial,
    smoothstep,
)

DEFAULT_DOMAIN = Domain.interval(-2.0, 2.0)
DEFAULT_K_GRID = (8, 16, 32, 64, 128)

MOMENT_REL_TOL = 1e-13
MOMENT_ABS_TOL = 1e-14


# ---------------------------------------------------------------------------
# mollifiers


@dataclass(frozen=True)
class Mollifier:
    """Unit-mass bump whose moments 1..order vanish.

    Built on an even polynomial times a bump, so every odd moment is zero
    by symmetry, not by cancellation.  ``moment`` returns measured values
    (cached); they feed the closed-form residual expansions, which is why
    they are measured rather than assumed.
    """

    fn: SmoothFn
    order: int
    radius: float
    _moments: dict = field(default_factory=dict, compare=False, repr=False)

    def moment(self, a: int) -> float:
        if a % 2 == 1:
            return 0.0
        if a not in self._moments:
            f = self.fn
            r = self.radius
            res = integrate(lambda t, a=a: t ** a * f.jet(t, 0), (-r, r),
                            rel_tol=MOMENT_REL_TOL, abs_tol=MOMENT_ABS_TOL,
                            points=(0.0,))
            self._moments[a] = res.value
        return self._moments[a]


def make_mollifier(q: int, radius: float = 1.0, *, pin: float | None = None) -> Mollifier:
    """Mollifier of order q: unit mass, vanishing moments 1..q.

    The ansatz is bump(t) * p(t^2) with p even-polynomial.  One extra
    basis element pins the first surviving even moment to a definite
    value, so the leading residual term of every induced smoothing
    operator has a known, comfortably nonzero size.  The default pin is
    the base bump's own normalized moment, which keeps low orders close
    to a plain bump (q <= 1 IS the normalized bump).
    """
    if q < 0:
        raise SingularMomentSystem("moment order must be nonnegative")
    if not (radius > 0 and math.isfinite(radius)):
        raise InvalidRadius(f"mollifier radius must be positive, got {radius}")
    b = bump(0.0, radius)
    n = q // 2 + 2
    e_pin = 2 * (n - 1)

    def base_moment(e: int) -> float:
        res = integrate(lambda t, e=e: t ** e * b.jet(t, 0), (-radius, radius),
                        rel_tol=MOMENT_REL_TOL, abs_tol=MOMENT_ABS_TOL,
                        points=(0.0,))
        return res.value

    B = {e: base_moment(e) for e in range(0, 4 * (n - 1) + 1, 2)}
    if pin is None:
        pin = B[e_pin] / B[0]
    A = np.array([[B[2 * i + 2 * j] for j in range(n)] for i in range(n)])
    rhs = np.zeros(n)
    rhs[0] = 1.0
    rhs[n - 1] = pin
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > 1e10:
        raise SingularMomentSystem(
            f"moment system for q={q} is ill conditioned (cond={cond:.2e})")
    c = np.linalg.solve(A, rhs)
    coeffs = np.zeros(2 * n - 1)
    coeffs[0::2] = c
    fn = b * polynomial(coeffs)
    mass = integrate(lambda t: fn.jet(t, 0), (-radius, radius),
                     rel_tol=MOMENT_REL_TOL, abs_tol=MOMENT_ABS_TOL,
                     points=(0.0,)).value
    fn = fn * (1.0 / mass)
    moll = Mollifier(fn, q, radius)
    for a in range(2, q + 1, 2):
        got = moll.moment(a)
        if abs(got) > 1e-10:
            raise SingularMomentSystem(
                f"moment {a} failed to vanish after solve: {got:.3e}")
    return moll


# ---------------------------------------------------------------------------
# kernel base


class Kernel:
    """One smoothing kernel: x |-> a test density phi(x, .) in y."""

    domain: Domain
    jet_cap: int = 8

    def jets(self, x: float, mx: int, ys, my: int) -> np.ndarray:
        """Mixed derivatives d_x^i d_y^j phi(x, y_n), shape (mx+1, my+1, n)."""
        raise NotImplementedError

    def y_window(self, x: float) -> CompactInterval:
        """A compact interval containing supp phi(x, .)."""
        raise NotImplementedError

    def radius_sup(self) -> float | None:
        """Uniform bound on the y-window radius, if one is known."""
        return None

    def plateau_scale(self, x: float) -> float | None:
        """If phi is exactly s * rho(s(y-x)) near x, the scale s; else None."""
        return None

    @property
    def mollifier(self) -> Mollifier | None:
        return None

    def testfn(self, x: float, mx: int = 0) -> TestFn:
        """The y-density d_x^mx phi(x, .) as a test function."""
        w = self.y_window(x)
        ker = self

        def jet_all(ys, m):
            return ker.jets(x, mx, ys, m)[mx]

        cap = max(self.jet_cap - mx, 0)
        return TestFn(SmoothFn(self.domain, jet_all, support=w, jet_cap=cap))


def _as_ys(ys) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(ys, dtype=float))
    if arr.ndim != 1:
        raise ValueError("ys must be one dimensional")
    return arr


# ---------------------------------------------------------------------------
# the standard construction: a scale-profile translation kernel


def _profile_for(domain: Domain, mbar: float, pad_factor: float):
    """Scale profile m(x) per component: flat mbar inside, tapering to zero
    at finite boundaries, with m(x) strictly below the boundary distance."""
    comps = []
    plateaus = []
    for (a, bnd) in domain.intervals:
        finite_a, finite_b = math.isfinite(a), math.isfinite(bnd)
        L = bnd - a
        mb = mbar if not (finite_a and finite_b) else min(mbar, 0.22 * L)
        pad = pad_factor * mb
        lo_p = a + pad if finite_a else -math.inf
        hi_p = bnd - pad if finite_b else math.inf
        if not lo_p < hi_p:
            raise InvalidRadius(
                f"component ({a}, {bnd}) too small for scale mbar={mb}")
        if finite_a and finite_b:
            shape = plateau(lo_p, hi_p, pad)
        elif finite_a:
            shape = smoothstep(a, a + pad)
        elif finite_b:
            shape = constant(1.0) - smoothstep(bnd - pad, bnd)
        else:
            shape = None
        comps.append(((a, bnd), mb, shape))
        plateaus.append((lo_p, hi_p, mb))

    def jet_all(x, m):
        out = np.zeros((m + 1, x.size))
        for (a, bnd), mb, shape in comps:
            mask = (x > a) & (x < bnd)
            if not mask.any():
                continue
            if shape is None:
                out[0, mask] = mb
            else:
                out[:, mask] = mb * shape.jets(x[mask], m)
        return out

    prof = SmoothFn(domain, jet_all, jet_cap=12)
    # the whole construction stands on supp phi(x,.) staying inside the
    # domain, so check m(x) < dist(x, boundary) once, on a fine grid
    for (a, bnd), mb, shape in comps:
        if shape is None:
            continue
        lo = a if math.isfinite(a) else bnd - 8.0
        hi = bnd if math.isfinite(bnd) else a + 8.0
        xs = np.linspace(lo + 1e-9, hi - 1e-9, 4097)
        mv = prof.jet(xs, 0)
        dist = np.minimum(xs - a if math.isfinite(a) else np.inf,
                          bnd - xs if math.isfinite(bnd) else np.inf)
        bad = mv >= dist
        if bad.any():
            raise InvalidRadius(
                f"scale profile exceeds boundary distance near x={xs[bad][0]:.4f}")
    return prof, plateaus


class ScaleKernel(Kernel):
    """phi(x, y) = s(x) rho(s(x)(y - x)) with s(x) = k r / m(x).

    On the profile's plateau the kernel is an exact scaled translate of
    the mollifier; everywhere else the scale varies smoothly and the
    support [x - m(x)/k, x + m(x)/k] stays inside the domain.
    """

    def __init__(self, domain: Domain, moll: Mollifier, profile: SmoothFn,
                 plateaus, k: int):
        self.domain = domain
        self.moll = moll
        self.profile = profile
        self.plateaus = tuple(plateaus)
        self.k = int(k)
        self.jet_cap = moll.fn.jet_cap

    @property
    def mollifier(self) -> Mollifier:
        return self.moll

    def _scale_series(self, x: float, mx: int) -> np.ndarray:
        mj = self.profile.jets(np.array([x]), mx)[:, 0]
        if not mj[0] > 1e-12:
            raise OutOfDomain(
                f"x={x} is too close to the boundary for this kernel's scale")
        mc = (mj / _FACT[: mx + 1]).reshape(mx + 1, 1)
        kr = np.zeros((mx + 1, 1))
        kr[0, 0] = self.k * self.moll.radius
        return _series_div(kr, mc)

    def jets(self, x: float, mx: int, ys, my: int) -> np.ndarray:
        ys = _as_ys(ys)
        rho = self.moll.fn
        sc = self._scale_series(x, mx)
        yrel = ys - x
        # u(h; y) = s(x+h) (y - x - h) as an h-series per y point
        u = np.zeros((mx + 1, ys.size))
        for i in range(mx + 1):
            u[i] = sc[i, 0] * yrel
            if i >= 1:
                u[i] -= sc[i - 1, 0]
        spow = sc.copy()
        out = np.empty((mx + 1, my + 1, ys.size))
        for j in range(my + 1):
            rj = rho.jets(u[0], mx + j)
            fc = rj[j: j + mx + 1] / _FACT[: mx + 1, None]
            comp = _series_compose(fc, u)
            col = _series_mul(comp, np.broadcast_to(spow, (mx + 1, ys.size)))
            out[:, j, :] = col * _FACT[: mx + 1, None]
            spow = _series_mul(spow, sc)
        return out

    def y_window(self, x: float) -> CompactInterval:
        m0 = float(self.profile.jet(x, 0))
        rad = m0 / self.k
        return CompactInterval(x - rad, x + rad)

    def radius_sup(self) -> float | None:
        return max(mb for _, _, mb in self.plateaus) / self.k

    def plateau_scale(self, x: float) -> float | None:
        for lo, hi, mb in self.plateaus:
            if lo <= x <= hi:
                return self.k * self.moll.radius / mb
        return None


# ---------------------------------------------------------------------------
# derived kernels


class LieKernel(Kernel):
    """The kernel-space Lie derivative X d_x phi + d_y(X(y) phi)."""

    def __init__(self, X: VectorField, base: Kernel):
        self.X = X
        self.base = base
        self.domain = base.domain
        self.jet_cap = max(base.jet_cap - 2, 0)

    def jets(self, x: float, mx: int, ys, my: int) -> np.ndarray:
        ys = _as_ys(ys)
        B = self.base.jets(x, mx + 1, ys, my + 1)
        Xx = self.X.coef.jets(np.array([x]), mx)[:, 0]
        Xy = self.X.coef.jets(ys, my + 1)
        out = np.zeros((mx + 1, my + 1, ys.size))
        for i in range(mx + 1):
            for j in range(my + 1):
                t1 = 0.0
                for p in range(i + 1):
                    t1 = t1 + math.comb(i, p) * Xx[p] * B[i - p + 1, j]
                t2 = np.zeros(ys.size)
                for l in range(j + 2):
                    t2 += math.comb(j + 1, l) * Xy[l] * B[i, j + 1 - l]
                out[i, j] = t1 + t2
        return out

    def y_window(self, x: float) -> CompactInterval:
        return self.base.y_window(x)

    def radius_sup(self) -> float | None:
        return self.base.radius_sup()


class RestrictedKernel(Kernel):
    """Restriction of a kernel on U to an open subset V.

    (rho_{V,U} phi)(x) = sum_W chi_W(x) (phi(x,.) theta_W)|_V with a
    dyadic partition {chi_W} of V and cutoffs theta_W that are exactly 1
    on a neighborhood of each piece and compactly supported in V.  Deep
    inside V the cutoffs are invisible and the restriction acts as the
    identity, which is what makes restriction classes eventually equal.
    """

    def __init__(self, base: Kernel, V: Domain):
        if not V.is_subset(base.domain):
            raise NotContained("restriction target must sit inside the domain")
        self.base = base
        self.domain = V
        self.jet_cap = base.jet_cap
        self._parts: dict[tuple, DyadicPartition] = {}

    def _partition(self, x: float) -> DyadicPartition:
        comp = self.domain.component_of(x)
        if comp not in self._parts:
            self._parts[comp] = DyadicPartition(Domain.interval(*comp))
        return self._parts[comp]

    def jets(self, x: float, mx: int, ys, my: int) -> np.ndarray:
        ys = _as_ys(ys)
        part = self._partition(x)
        B = self.base.jets(x, mx, ys, my)
        out = np.zeros((mx + 1, my + 1, ys.size))
        xa = np.array([x])
        for key in part.active_keys(x):
            cj = part.chi(key).jets(xa, mx)[:, 0]
            th = part.cutoff(key).jets(ys, my)
            for i in range(mx + 1):
                for j in range(my + 1):
                    term = np.zeros(ys.size)
                    for p in range(i + 1):
                        if cj[p] == 0.0:
                            continue
                        sub = np.zeros(ys.size)
                        for l in range(j + 1):
                            sub += math.comb(j, l) * th[l] * B[i - p, j - l]
                        term += math.comb(i, p) * cj[p] * sub
                    out[i, j] += term
        return out

    def y_window(self, x: float) -> CompactInterval:
        part = self._partition(x)
        base_w = self.base.y_window(x)
        w = None
        for key in part.active_keys(x):
            s = part.cutoff(key).support
            piece = s.intersect(base_w) if s is not None else base_w
            if piece is not None:
                w = piece if w is None else w.hull(piece)
        if w is None:
            lo, hi = self.domain.component_of(x)
            eps = min(1e-9, (hi - lo) / 4)
            w = CompactInterval(max(x - eps, lo), min(x + eps, hi))
        return w

    def radius_sup(self) -> float | None:
        return self.base.radius_sup()


class GluedKernel(Kernel):
    """sum_l w_l(x) phi^l(x, .) for smooth weights subordinate to a cover."""

    def __init__(self, pieces, domain: Domain):
        self.pieces = tuple(pieces)  # (weight SmoothFn, Kernel)
        self.domain = domain
        self.jet_cap = min(k.jet_cap for _, k in self.pieces)

    def jets(self, x: float, mx: int, ys, my: int) -> np.ndarray:
        ys = _as_ys(ys)
        out = np.zeros((mx + 1, my + 1, ys.size))
        xa = np.array([x])
        for w, ker in self.pieces:
            if w.support is not None and not w.support.contains(x):
                continue
            wj = w.jets(xa, mx)[:, 0]
            if not wj.any():
                continue
            mask = np.asarray(ker.domain.contains(ys))
            if not mask.any():
                continue
            B = ker.jets(x, mx, ys[mask], my)
            for i in range(mx + 1):
                for j in range(my + 1):
                    acc = np.zeros(mask.sum())
                    for p in range(i + 1):
                        if wj[p] != 0.0:
                            acc += math.comb(i, p) * wj[p] * B[i - p, j]
                    out[i, j, mask] += acc
        return out

    def y_window(self, x: float) -> CompactInterval:
        w = None
        for wt, ker in self.pieces:
            if wt.support is not None and not wt.support.contains(x):
                continue
            if float(wt.jet(x, 0)) == 0.0 and wt.support is not None:
                continue
            if not ker.domain.contains(x):
                continue
            piece = ker.y_window(x)
            w = piece if w is None else w.hull(piece)
        if w is None:
            raise OutOfDomain(f"no glued piece active at x={x}")
        return w

    def radius_sup(self) -> float | None:
        rads = [ker.radius_sup() for _, ker in self.pieces]
        if any(r is None for r in rads):
            return None
        return max(rads)


class AffineComboKernel(Kernel):
    """Pointwise linear combination of kernels on a common domain."""

    def __init__(self, terms):
        self.terms = tuple((float(c), k) for c, k in terms)
        self.domain = self.terms[0][1].domain
        for _, k in self.terms[1:]:
            if k.domain != self.domain:
                raise DomainMismatch("combined kernels must share a domain")
        self.jet_cap = min(k.jet_cap for _, k in self.terms)

    def jets(self, x: float, mx: int, ys, my: int) -> np.ndarray:
        ys = _as_ys(ys)
        out = np.zeros((mx + 1, my + 1, ys.size))
        for c, k in self.terms:
            if c != 0.0:
                out += c * k.jets(x, mx, ys, my)
        return out

    def y_window(self, x: float) -> CompactInterval:
        w = None
        for _, k in self.terms:
            piece = k.y_window(x)
            w = piece if w is None else w.hull(piece)
        return w

    def radius_sup(self) -> float | None:
        rads = [k.radius_sup() for _, k in self.terms]
        if any(r is None for r in rads):
            return None
        return max(rads)


class ConstantKernel(Kernel):
    """x-independent kernel phi(x, .) = psi: smooth but not localizing."""

    def __init__(self, tf: TestFn, domain: Domain):
        if not domain.contains_interval(tf.support.lo, tf.support.hi, strict=True):
            raise NotContained("witness density must be supported in the domain")
        self.tf = tf
        self.domain = domain
        self.jet_cap = tf.fn.jet_cap

    def jets(self, x: float, mx: int, ys, my: int) -> np.ndarray:
        ys = _as_ys(ys)
        out = np.zeros((mx + 1, my + 1, ys.size))
        out[0] = self.tf.fn.jets(ys, my)
        return out

    def y_window(self, x: float) -> CompactInterval:
        return self.tf.support


class PullbackKernel(Kernel):
    """phi precomposed with a diffeomorphism in both slots: phi(mu(x), mu(y)).

    Plain composition, no Jacobian factor: this is the convention under
    which pushing forward an embedded point mass lands exactly on the
    transported point.
    """

    def __init__(self, base: Kernel, mu: SmoothFn, mu_inv: SmoothFn, domain: Domain):
        self.base = base
        self.mu = mu
        self.mu_inv = mu_inv
        self.domain = domain
        self.jet_cap = max(base.jet_cap - 1, 0)

    def jets(self, x: float, mx: int, ys, my: int) -> np.ndarray:
        ys = _as_ys(ys)
        ux = self.mu.jets(np.array([x]), mx)[:, 0]
        vy = self.mu.jets(ys, my)
        B = self.base.jets(float(ux[0]), mx, vy[0], my)
        c = B / (_FACT[: mx + 1, None, None] * _FACT[None, : my + 1, None])
        # powers of the shifted inner series in each slot
        uxs = (ux / _FACT[: mx + 1]).reshape(mx + 1, 1)
        uxs[0] = 0.0
        vys = vy / _FACT[: my + 1, None]
        vys[0] = 0.0
        px = [np.zeros((mx + 1, 1)) for _ in range(mx + 1)]
        px[0][0, 0] = 1.0
        for p in range(1, mx + 1):
            px[p] = _series_mul(px[p - 1], uxs)
        py = [np.zeros((my + 1, ys.size)) for _ in range(my + 1)]
        py[0][0] = 1.0
        for q in range(1, my + 1):
            py[q] = _series_mul(py[q - 1], vys)
        D = np.zeros((mx + 1, my + 1, ys.size))
        for p in range(mx + 1):
            for q in range(my + 1):
                D += c[p, q][None, None, :] * px[p][:, :, None] * py[q][None, :, :]
        return D * _FACT[: mx + 1, None, None] * _FACT[None, : my + 1, None]

    def y_window(self, x: float) -> CompactInterval:
        w = self.base.y_window(float(self.mu.jet(x, 0)))
        a = float(self.mu_inv.jet(w.lo, 0))
        b = float(self.mu_inv.jet(w.hi, 0))
        return CompactInterval(min(a, b), max(a, b))

    def radius_sup(self) -> float | None:
        r = self.base.radius_sup()
        if r is None:
            return None
        # crude Lipschitz stretch estimate on a sample grid
        lo, hi = self.domain.hull()
        if not (math.isfinite(lo) and math.isfinite(hi)):
            return None
        xs = np.linspace(lo + 1e-6, hi - 1e-6, 257)
        stretch = np.max(np.abs(self.mu_inv.jet(self.mu.jet(xs, 0), 1)))
        return float(r * stretch)


class GenericKernel(Kernel):
    """Escape hatch: jets by central differences from plain values."""

    def __init__(self, domain: Domain, values, window, fd_step: float = 1e-4,
                 jet_cap: int = 4):
        self.domain = domain
        self.values = values  # (x, ys) -> ndarray
        self.window = window  # x -> CompactInterval
        self.h = fd_step
        self.jet_cap = jet_cap

    def _x_derivs(self, x: float, mx: int, ys: np.ndarray, h: float) -> np.ndarray:
        out = np.empty((mx + 1, ys.size))
        for i in range(mx + 1):
            if i == 0:
                out[0] = self.values(x, ys)
                continue
            pts = [x + (p - i / 2.0) * h for p in range(i + 1)]
            coef = [(-1.0) ** (i - p) * math.comb(i, p) for p in range(i + 1)]
            acc = np.zeros(ys.size)
            for p, cf in zip(pts, coef):
                acc += cf * self.values(p, ys)
            out[i] = acc / h ** i
        return out

    def jets(self, x: float, mx: int, ys, my: int) -> np.ndarray:
        ys = _as_ys(ys)

        def xd(h):
            cols = np.empty((mx + 1, my + 1, ys.size))
            for j in range(my + 1):
                if j == 0:
                    cols[:, 0, :] = self._x_derivs(x, mx, ys, h)
                    continue
                acc = np.zeros((mx + 1, ys.size))
                pts = [(p - j / 2.0) * h for p in range(j + 1)]
                coef = [(-1.0) ** (j - p) * math.comb(j, p) for p in range(j + 1)]
                for off, cf in zip(pts, coef):
                    acc += cf * self._x_derivs(x, mx, ys + off, h)
                cols[:, j, :] = acc / h ** j
            return cols

        a = xd(self.h)
        b = xd(self.h / 2.0)
        return (4.0 * b - a) / 3.0

    def y_window(self, x: float) -> CompactInterval:
        return self.window(x)


# ---------------------------------------------------------------------------
# sequences


class KernelSequence:
    """A k-indexed family of kernels; the rate variable of the theory."""

    def __init__(self, domain: Domain, maker, *, grade: int | None = None,
                 radius_bound=None, label: str = "seq",
                 mollifier: Mollifier | None = None):
        self.domain = domain
        self._maker = maker
        self.grade = grade
        self.radius_bound = radius_bound  # callable k -> sup_x window radius
        self.label = label
        self.mollifier = mollifier
        self._memo: dict[int, Kernel] = {}

    def at(self, k: int) -> Kernel:
        k = int(k)
        if k < 1:
            raise InvalidRadius(f"rate index must be >= 1, got {k}")
        if k not in self._memo:
            self._memo[k] = self._maker(k)
        return self._memo[k]

    def __repr__(self):
        g = f", grade={self.grade}" if self.grade is not None else ""
        return f"KernelSequence({self.label}{g})"


def standard_sequence(domain: Domain = DEFAULT_DOMAIN,
                      mollifier: Mollifier | None = None, *,
                      mbar: float = 0.8,
                      pad_factor: float = 1.5,
                      label: str | None = None) -> KernelSequence:
    """The canonical localizing test-object sequence on a domain.

    Scaled translates of one mollifier, with the scale profile flattened
    on a central plateau of every component and tapered toward finite
    boundaries so each kernel's support stays inside the domain at every
    rate k >= 1.
    """
    moll = mollifier if mollifier is not None else make_mollifier(3)
    prof, plats = _profile_for(domain, mbar, pad_factor)
    mb_max = max(mb for _, _, mb in plats)

    def maker(k: int) -> Kernel:
        return ScaleKernel(domain, moll, prof, plats, k)

    return KernelSequence(
        domain, maker, grade=moll.order,
        radius_bound=lambda k: mb_max / k,
        label=label or f"standard(q={moll.order})", mollifier=moll)


def lie_seq(X: VectorField, seq: KernelSequence) -> KernelSequence:
    return KernelSequence(seq.domain, lambda k: LieKernel(X, seq.at(k)),
                          grade=None, radius_bound=seq.radius_bound,
                          label=f"lie({seq.label})")


def restrict_seq(seq: KernelSequence, V: Domain) -> KernelSequence:
    if not V.is_subset(seq.domain):
        raise NotContained("restriction target must sit inside the domain")
    return KernelSequence(V, lambda k: RestrictedKernel(seq.at(k), V),
                          grade=seq.grade, radius_bound=seq.radius_bound,
                          label=f"{seq.label}|{V.intervals}")


def glue_seqs(cover, seqs, *, domain: Domain | None = None,
              label: str = "glued") -> KernelSequence:
    """Glue a compatible family of kernel sequences along an interval cover.

    cover: list of (lo, hi) with consecutive overlaps; seqs: one sequence
    per cover piece, each living on (at least) its piece.
    """
    if len(cover) != len(seqs):
        raise IncompatiblePieces("need exactly one sequence per cover piece")
    pou = partition_of_unity(cover)
    dom = domain or Domain.interval(min(lo for lo, _ in cover),
                                    max(hi for _, hi in cover))
    for (lo, hi), s in zip(cover, seqs):
        if not Domain.interval(lo, hi).is_subset(s.domain):
            raise IncompatiblePieces(
                f"piece ({lo}, {hi}) is not inside its sequence's domain")
    order = sorted(range(len(cover)), key=lambda i: cover[i][0])

    def maker(k: int) -> Kernel:
        pieces = [(pou.chi(i), seqs[i].at(k)) for i in order]
        return GluedKernel(pieces, dom)

    grades = {s.grade for s in seqs}
    grade = grades.pop() if len(grades) == 1 else None
    bounds = [s.radius_bound for s in seqs]
    rb = None
    if all(b is not None for b in bounds):
        rb = lambda k: max(b(k) for b in bounds)
    return KernelSequence(dom, maker, grade=grade, radius_bound=rb, label=label)


def extend_seq(seq: KernelSequence, U: Domain, *, core: tuple[float, float],
               filler: KernelSequence | None = None) -> KernelSequence:
    """Extend a sequence on V to all of U, keeping it intact on the core.

    Blends with a filler sequence on U through a plateau weight that is
    exactly 1 on the core and supported inside V; on the core the result
    is the original kernel, bit for bit.
    """
    V = seq.domain
    if not V.is_subset(U):
        raise NotContained("extension requires V inside U")
    lo, hi = core
    vlo, vhi = V.component_of((lo + hi) / 2)
    rise = 0.45 * min(lo - vlo, vhi - hi)
    if not rise > 0:
        raise InvalidRadius("core must sit strictly inside one component of V")
    chi = plateau(lo, hi, rise)
    one_minus = SmoothFn(U, lambda x, m: _one_minus_jets(chi, x, m), jet_cap=chi.jet_cap)
    fill = filler if filler is not None else standard_sequence(
        U, make_mollifier(seq.grade if seq.grade is not None else 3))

    def maker(k: int) -> Kernel:
        return GluedKernel([(chi, seq.at(k)), (one_minus, fill.at(k))], U)

    grade = seq.grade if seq.grade == fill.grade else None
    rb = None
    if seq.radius_bound is not None and fill.radius_bound is not None:
        rb = lambda k: max(seq.radius_bound(k), fill.radius_bound(k))
    return KernelSequence(U, maker, grade=grade, radius_bound=rb,
                          label=f"extend({seq.label})")


def _one_minus_jets(chi: SmoothFn, x: np.ndarray, m: int) -> np.ndarray:
    out = -chi.jets(x, m)
    out[0] += 1.0
    return out


def constant_witness_seq(domain: Domain = DEFAULT_DOMAIN,
                         tf: TestFn | None = None) -> KernelSequence:
    """A deliberately non-localizing sequence: the same fat density at
    every x and every k.  The standard counterexample for everything
    that genuinely needs shrinking supports."""
    if tf is None:
        lo, hi = domain.hull()
        mid = 0.5 * (lo + hi) if math.isfinite(lo) and math.isfinite(hi) else 0.0
        rad = 0.75 * (hi - lo) / 2 if math.isfinite(lo) and math.isfinite(hi) else 1.0
        tf = TestFn(bump(mid, rad, domain))
    return KernelSequence(domain, lambda k: ConstantKernel(tf, domain),
                          grade=None, radius_bound=None, label="constant-witness")


def combo_seq(terms, label: str = "combo") -> KernelSequence:
    """Pointwise linear combination of sequences (for kernel directions)."""
    seqs = [s for _, s in terms]
    dom = seqs[0].domain

    def maker(k: int) -> Kernel:
        return AffineComboKernel([(c, s.at(k)) for c, s in terms])

    return KernelSequence(dom, maker, label=label)


# ---------------------------------------------------------------------------
# the smoothing action


APPLY_REL_TOL = 1e-10
APPLY_ABS_TOL = 1e-13


class _RowCache:
    """Kernel jet rows at one x, shared across the per-order quadratures.

    The adaptive passes for different derivative orders visit mostly the
    same panels; one ``jets`` call per distinct node batch serves all of
    them.
    """

    def __init__(self, ker, x: float, m: int):
        self.ker, self.x, self.m = ker, x, m
        self._seen: dict = {}

    def __call__(self, ys: np.ndarray) -> np.ndarray:
        key = (float(ys[0]), float(ys[-1]), ys.size)
        hit = self._seen.get(key)
        if hit is None:
            hit = self.ker.jets(self.x, self.m, ys, 0)[:, 0, :]
            self._seen[key] = hit
        return hit


def apply_kernel(ker: Kernel, u) -> SmoothFn:
    """The smooth function x -> <u, phi(x, .)> with exact delta jets."""
    from .dist import Distribution, support_dist

    if not isinstance(u, Distribution):
        raise TypeError("apply_kernel expects a Distribution")
    if not u.domain.is_subset(ker.domain):
        raise DomainMismatch("distribution must live on the kernel's domain")
    dpts = np.array(sorted({t.point for t in u.deltas}))
    dmax = u.max_delta_order

    def jet_all(x, m):
        out = np.zeros((m + 1, x.size))
        for idx, xi in enumerate(x):
            if u.deltas:
                J = ker.jets(float(xi), m, dpts, dmax)
                for t in u.deltas:
                    col = int(np.searchsorted(dpts, t.point))
                    out[:, idx] += t.coeff * (-1.0) ** t.order * J[:, t.order, col]
            if u.densities:
                w = ker.y_window(float(xi))
                rows = _RowCache(ker, float(xi), m)
                for t in u.densities:
                    lo, hi = w.lo, w.hi
                    g = t.fn
                    if g.support is not None:
                        lo, hi = max(lo, g.support.lo), min(hi, g.support.hi)
                        if lo >= hi:
                            continue
                    cuts = tuple(b for b in g.breaks if lo < b < hi)
                    for i in range(m + 1):
                        def f(ys, i=i):
                            return g.jet(ys, 0) * rows(ys)[i]
                        res = integrate(f, (lo, hi), rel_tol=APPLY_REL_TOL,
                                        abs_tol=APPLY_ABS_TOL, points=cuts)
                        out[i, idx] += t.coeff * res.value
        return out

    supp = None
    rs = ker.radius_sup()
    sd = support_dist(u)
    if rs is not None and sd and all(
            math.isfinite(a) and math.isfinite(b) for a, b in sd):
        supp = CompactInterval(min(a for a, _ in sd) - rs,
                               max(b for _, b in sd) + rs)
        lo, hi = ker.domain.hull()
        if not (lo < supp.lo and supp.hi < hi):
            supp = None
    cap = max(ker.jet_cap - dmax, 0)
    return SmoothFn(ker.domain, jet_all, support=supp, jet_cap=cap)


# ---------------------------------------------------------------------------
# sequence-level probes


@dataclass(frozen=True)
class EventualEquality:
    per_probe: dict
    all_eventual: bool
    k_grid: tuple


def eventually_equal(seq_a: KernelSequence, seq_b: KernelSequence, probes,
                     *, k_grid=DEFAULT_K_GRID, tol: float = 1e-12,
                     n_y: int = 257) -> EventualEquality:
    """Per-probe first rate index from which the kernels agree in sup norm.

    Equality is measured on a y-grid over the union of both windows; a
    probe maps to None when no tail of the grid stays within tolerance.
    """
    ks = sorted(int(k) for k in k_grid)
    found = {}
    for x in probes:
        x = float(x)
        ok = []
        for k in ks:
            ka, kb = seq_a.at(k), seq_b.at(k)
            if ka is kb:
                ok.append(True)
                continue
            wa, wb = ka.y_window(x), kb.y_window(x)
            w = wa.hull(wb)
            ys = np.linspace(w.lo, w.hi, n_y)
            va = ka.jets(x, 0, ys, 0)[0, 0]
            vb = kb.jets(x, 0, ys, 0)[0, 0]
            ok.append(bool(np.max(np.abs(va - vb)) <= tol))
        k0 = None
        for i in range(len(ks)):
            if all(ok[i:]):
                k0 = ks[i]
                break
        found[x] = k0
    return EventualEquality(found, all(v is not None for v in found.values()),
                            tuple(ks))


def is_localizing(seq: KernelSequence, *, probes=None,
                  k_grid=DEFAULT_K_GRID) -> bool:
    """Do the kernel supports shrink to points, uniformly along probes?"""
    ks = sorted(int(k) for k in k_grid)
    if seq.radius_bound is not None:
        r0, r1 = seq.radius_bound(ks[0]), seq.radius_bound(ks[-1])
        return bool(r1 < r0 / 2 and r1 < 1.0)
    if probes is None:
        lo, hi = seq.domain.hull()
        lo = lo if math.isfinite(lo) else -2.0
        hi = hi if math.isfinite(hi) else 2.0
        probes = np.linspace(lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo), 7)
    radii = []
    for k in (ks[0], ks[-1]):
        ker = seq.at(k)
        radii.append(max(ker.y_window(float(x)).width / 2 for x in probes))
    return bool(radii[1] < radii[0] / 2 and radii[1] < 1.0)
