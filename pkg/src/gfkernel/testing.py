"""Asymptotic classification along kernel sequences.

Everything here reduces to one move: sweep a scalar measurement over the
rate grid, fit a power law, compare the slope to a bound.  The
measurements are compact-seminorm sizes (moderateness, negligibility),
pairings against a fixed battery (association, weak convergence), or
distance to the identity on smooth probes (the grading of test objects).

Rate fits on residuals of smoothing operators are delicate: the signals
decay like k^-(q+1) and fall under any quadrature floor long before the
grid ends.  On the scale plateau of a standard kernel the residual has
an exact finite expansion in the mollifier's measured moments, so the
sweep uses that closed form whenever the kernel offers it and only falls
back to quadrature when it must.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .basic import BasicElement, Iota, Sum, eval_basic
from .dist import default_test_battery, delta, heaviside, pair, regular
from .errors import TooFewPoints
from .kernel import (
    DEFAULT_K_GRID,
    Kernel,
    KernelSequence,
    make_mollifier,
    standard_sequence,
)
from .smooth import (
    CompactInterval,
    Domain,
    SmoothFn,
    TestFn,
    exp_fn,
    integrate,
    polynomial,
    seminorm,
    sin_fn,
)

DEFAULT_ORDERS = (0, 1, 2)
NEGLIGIBLE_SLOPE = -0.5
MODERATE_BOUND = 40.0
SERIES_TERMS = 16
FLOOR_REL = 1e-13
CLAMP = 1e-300
CLASSIFIER_GRID = 129  # odd, so the center of a symmetric region is sampled


# ---------------------------------------------------------------------------
# power-law fitting


@dataclass(frozen=True)
class AsymptoticFit:
    """Least-squares slope of log(value) against log(k).

    ``exact_zero`` marks a sweep that vanished identically; its slope is
    -inf by convention.  Zeros inside an otherwise nonzero sweep are
    dropped from the fit (they mean "below every floor", not data).
    """

    k_grid: tuple[int, ...]
    values: tuple[float, ...]
    slope: float
    intercept: float
    residual: float
    exact_zero: bool

    @property
    def peak(self) -> float:
        return max(abs(v) for v in self.values)

    def decays(self, bound: float) -> bool:
        return self.exact_zero or self.slope <= bound


def fit_order(values, k_grid=DEFAULT_K_GRID) -> AsymptoticFit:
    ks = tuple(int(k) for k in k_grid)
    vals = tuple(float(abs(v)) for v in values)
    if len(vals) != len(ks):
        raise TooFewPoints("one value per grid point required")
    nz = [(k, v) for k, v in zip(ks, vals) if v > CLAMP]
    if not nz:
        return AsymptoticFit(ks, vals, -math.inf, -math.inf, 0.0, True)
    if len(nz) < 2:
        return AsymptoticFit(ks, vals, -math.inf, -math.inf, 0.0, False)
    lk = np.log([k for k, _ in nz])
    lv = np.log([v for _, v in nz])
    slope, intercept = np.polyfit(lk, lv, 1)
    residual = float(np.max(np.abs(slope * lk + intercept - lv)))
    return AsymptoticFit(ks, vals, float(slope), float(intercept), residual, False)


def default_region(domain: Domain) -> CompactInterval:
    """The central quarter of the domain hull: comfortably compact, and
    inside the scale plateau of a default standard sequence."""
    lo, hi = domain.hull()
    if not (math.isfinite(lo) and math.isfinite(hi)):
        lo, hi = max(lo, -2.0), min(hi, 2.0)
    L = hi - lo
    return CompactInterval(lo + 0.375 * L, hi - 0.375 * L)


# ---------------------------------------------------------------------------
# sweep helpers


def element_family(R: BasicElement, seq: KernelSequence):
    """k -> R(psi_k) as a lazily evaluated smooth function."""
    return lambda k: eval_basic(R, seq.at(k))


def sweep_seminorms(family, K: CompactInterval, m: int,
                    k_grid=DEFAULT_K_GRID,
                    grid: int = CLASSIFIER_GRID) -> AsymptoticFit:
    vals = [seminorm(family(k), K, m, grid=grid) for k in k_grid]
    return fit_order(vals, k_grid)


def _plateau_series_sup(f: SmoothFn, ker: Kernel, K: CompactInterval, m: int,
                        terms: int) -> float | None:
    """sup over K of the m-th derivative of (smoothing residual of f),
    via the exact moment expansion; None when the kernel cannot offer it."""
    moll = ker.mollifier
    if moll is None or f.jet_cap < m + terms + 1:
        return None
    xs = np.linspace(K.lo, K.hi, 129)
    scales = [ker.plateau_scale(float(x)) for x in (K.lo, 0.5 * (K.lo + K.hi), K.hi)]
    if any(s is None for s in scales) or len({round(s, 12) for s in scales}) != 1:
        return None
    s = scales[0]
    jets = f.jets(xs, m + terms)
    acc = np.zeros(xs.size)
    for a in range(1, terms + 1):
        ma = moll.moment(a)
        if ma == 0.0:
            continue
        acc += jets[a + m] / math.factorial(a) * ma * s ** (-a)
    return float(np.max(np.abs(acc)))


def embedding_residual_sweep(f: SmoothFn, seq: KernelSequence, *,
                             K: CompactInterval | None = None, m: int = 0,
                             k_grid=DEFAULT_K_GRID,
                             terms: int = SERIES_TERMS) -> AsymptoticFit:
    """Rate of p_{K,m}((iota f - sigma f)(psi_k)) along the sequence."""
    K = K if K is not None else default_region(seq.domain)
    vals = []
    for k in k_grid:
        ker = seq.at(k)
        v = _plateau_series_sup(f, ker, K, m, terms)
        if v is None:
            diff = eval_basic(Iota(regular(f, domain=seq.domain)), ker) \
                - (f if f.domain == seq.domain else
                   _restricted(f, seq.domain))
            v = seminorm(diff, K, m)
        vals.append(v)
    return fit_order(vals, k_grid)


def _restricted(f: SmoothFn, dom: Domain) -> SmoothFn:
    from .smooth import restrict_view

    return restrict_view(f, dom)


def _singular_points(R: BasicElement) -> tuple[float, ...]:
    """Locations where an element's output can concentrate: delta points
    and density breaks of its distribution leaves."""
    pts: set[float] = set()

    def walk(node):
        if isinstance(node, Iota):
            for t in node.u.deltas:
                pts.add(t.point)
            for t in node.u.densities:
                pts.update(t.fn.breaks)
            return
        for name in ("a", "b"):
            child = getattr(node, name, None)
            if isinstance(child, BasicElement):
                walk(child)

    walk(R)
    return tuple(sorted(pts))


def _pairing(fn: SmoothFn, phi: TestFn, hints=()) -> float:
    lo, hi = phi.support.lo, phi.support.hi
    cuts = [b for b in phi.fn.breaks if lo < b < hi]
    cuts += [h for h in hints if lo < h < hi]
    res = integrate(lambda x: fn.jet(x, 0) * phi.jet(x, 0), (lo, hi),
                    rel_tol=1e-10, abs_tol=1e-13, points=tuple(sorted(cuts)))
    return res.value


def _hints_at(R: BasicElement, seq: KernelSequence, k: int) -> tuple[float, ...]:
    pts = _singular_points(R)
    rb = seq.radius_bound
    w = rb(k) if rb is not None else None
    out = []
    for p in pts:
        out.append(p)
        if w is not None:
            out += [p - w, p + w]
    return tuple(sorted(out))


# ---------------------------------------------------------------------------
# test-object validation


@dataclass(frozen=True)
class SweepVerdict:
    fit: AsymptoticFit
    bound: float
    floor: float
    ok: bool


@dataclass(frozen=True)
class TestObjectReport:
    """Outcome of the three-part grading check for a kernel sequence."""

    grade: int
    rate: dict = field(repr=False)          # (probe, m) -> SweepVerdict
    growth: dict = field(repr=False)        # m -> SweepVerdict
    weak: dict = field(repr=False)          # (dist, battery idx) -> SweepVerdict
    rate_ok: bool = True
    growth_ok: bool = True
    weak_ok: bool = True

    @property
    def passed(self) -> bool:
        return self.rate_ok and self.growth_ok and self.weak_ok


def _rate_battery(q: int, domain: Domain):
    probes = []
    for j in range(q + 3):
        coeffs = [0.0] * j + [1.0]
        probes.append((f"x^{j}", polynomial(coeffs)))
    probes.append(("sin", sin_fn()))
    probes.append(("exp", exp_fn()))
    return probes


def validate_test_object(seq: KernelSequence, *, grade: int | None = None,
                         K: CompactInterval | None = None,
                         k_grid=DEFAULT_K_GRID, orders=DEFAULT_ORDERS,
                         margin: float = 0.5,
                         terms: int = SERIES_TERMS) -> TestObjectReport:
    """Check the three defining conditions of a graded test object.

    (i) the induced smoothing operators converge to the identity on
    smooth probes at rate k^-(q+1), measured in compact seminorms up to
    the requested orders; (ii) the kernels grow at most polynomially in
    the same seminorms; (iii) pairings converge weakly on genuinely
    singular inputs.  Sweeps whose every value sits below the resolution
    floor pass by convention: they certify nothing but contradict
    nothing, and for a graded mollifier that is exactly what the killed
    moments look like.
    """
    q = grade if grade is not None else seq.grade
    if q is None:
        raise ValueError("sequence carries no grade; pass grade=")
    K = K if K is not None else default_region(seq.domain)
    bound = -(q + 1) + margin

    rate: dict = {}
    rate_ok = True
    for name, f in _rate_battery(q, seq.domain):
        for m in orders:
            fit = embedding_residual_sweep(f, seq, K=K, m=m, k_grid=k_grid,
                                           terms=terms)
            floor = FLOOR_REL * max(1.0, seminorm(f, K, m))
            ok = fit.exact_zero or fit.peak < floor or fit.slope <= bound
            rate[(name, m)] = SweepVerdict(fit, bound, floor, ok)
            rate_ok = rate_ok and ok

    growth: dict = {}
    growth_ok = True
    xs = np.linspace(K.lo, K.hi, 33)
    for m in orders:
        vals = []
        for k in k_grid:
            ker = seq.at(k)
            worst = 0.0
            for x in xs:
                w = ker.y_window(float(x))
                ys = np.linspace(w.lo, w.hi, 65)
                J = ker.jets(float(x), m, ys, m)
                for i in range(m + 1):
                    for j in range(m + 1 - i):
                        worst = max(worst, float(np.max(np.abs(J[i, j]))))
            vals.append(worst)
        fit = fit_order(vals, k_grid)
        ok = fit.exact_zero or fit.slope <= MODERATE_BOUND
        growth[m] = SweepVerdict(fit, MODERATE_BOUND, 0.0, ok)
        growth_ok = growth_ok and ok

    weak: dict = {}
    weak_ok = True
    mid = 0.5 * (K.lo + K.hi)
    sing = [("delta", delta(mid, domain=seq.domain)),
            ("step", heaviside(seq.domain, jump_at=mid))]
    battery = default_test_battery(seq.domain, n_centers=2, n_radii=2)
    for uname, u in sing:
        fns = {k: eval_basic(Iota(u), seq.at(k)) for k in k_grid}
        ws = {k: _window_radius(seq, k, mid) for k in k_grid}
        for idx, phi in enumerate(battery):
            target = pair(u, phi).value
            vals = [_windowed_residual(fns[k], u, phi, mid, ws[k])
                    for k in k_grid]
            fit = fit_order(vals, k_grid)
            scale = max(1.0, abs(target))
            ok = fit.exact_zero or fit.peak < FLOOR_REL * scale \
                or fit.slope <= -0.5
            weak[(uname, idx)] = SweepVerdict(fit, -0.5, FLOOR_REL * scale, ok)
            weak_ok = weak_ok and ok

    return TestObjectReport(q, rate, growth, weak, rate_ok, growth_ok, weak_ok)


def _window_radius(seq: KernelSequence, k: int, p: float) -> float:
    rb = seq.radius_bound
    if rb is not None:
        return float(rb(k))
    w = seq.at(k).y_window(p)
    return 1.5 * 0.5 * w.width


def _windowed_residual(fn: SmoothFn, u, phi: TestFn, p: float,
                       w: float) -> float:
    """<fn dx, phi> - <u, phi> for u singular only at p, assuming fn
    agrees with u's density beyond distance w of p.

    Exact for delta combinations and piecewise-constant densities under
    a unit-mass kernel: away from the singular point the smoothing
    reproduces a constant identically, so the residual integrand is
    supported in the window and nowhere else.
    """
    base = sum(t.coeff * (-1.0) ** t.order * phi.jet(t.point, t.order)
               for t in u.deltas)
    lo = max(phi.support.lo, p - w)
    hi = min(phi.support.hi, p + w)
    if hi <= lo:
        return -base

    def ev(xs):
        xs = np.asarray(xs, dtype=float)
        d = np.zeros(xs.shape)
        for t in u.densities:
            d += t.coeff * t.fn.jet(xs, 0)
        return (fn.jet(xs, 0) - d) * phi.jet(xs, 0)

    cuts = [p] + [b for t in u.densities for b in t.fn.breaks]
    res = integrate(ev, (lo, hi), rel_tol=1e-9, abs_tol=1e-13,
                    points=[c for c in cuts if lo < c < hi])
    return res.value - base


# ---------------------------------------------------------------------------
# moderateness and negligibility


@dataclass(frozen=True)
class ClassificationReport:
    verdict: bool
    sweeps: dict  # m -> SweepVerdict
    region: CompactInterval


@lru_cache(maxsize=32)
def default_family(domain: Domain, q: int) -> KernelSequence:
    """The graded probe family used by the classifiers; one per (domain, q)."""
    return standard_sequence(domain, make_mollifier(q))


def is_moderate(R: BasicElement, seq: KernelSequence | None = None, *,
                K: CompactInterval | None = None, k_grid=DEFAULT_K_GRID,
                orders=DEFAULT_ORDERS,
                bound: float = MODERATE_BOUND) -> ClassificationReport:
    """Polynomial growth of all compact seminorms along the family."""
    seq = seq if seq is not None else default_family(R.domain, 3)
    K = K if K is not None else default_region(seq.domain)
    fam = element_family(R, seq)
    sweeps = {}
    verdict = True
    for m in orders:
        fit = sweep_seminorms(fam, K, m, k_grid)
        ok = fit.exact_zero or fit.slope <= bound
        sweeps[m] = SweepVerdict(fit, bound, 0.0, ok)
        verdict = verdict and ok
    return ClassificationReport(verdict, sweeps, K)


def is_negligible(R: BasicElement, seq: KernelSequence | None = None, *,
                  K: CompactInterval | None = None, k_grid=DEFAULT_K_GRID,
                  orders=DEFAULT_ORDERS,
                  slope_bound: float = NEGLIGIBLE_SLOPE) -> ClassificationReport:
    """Vanishing to all orders, at the resolution a seminorm sweep has.

    Each derivative order m is swept along a probe family of grade m+1,
    fine enough to expose a surviving term of that order.  The verdict
    demands genuine decay at every order.  The bound is uniform rather
    than graded: residuals of negligible elements fall under the
    cancellation noise of the evaluating quadrature midway through the
    grid for m >= 2, so steeper fitted slopes cannot be certified, while
    every non-negligible element shows flat or growing seminorms.  The
    per-order fits are kept in the report as evidence.

    A fixed ``seq`` overrides the graded families (useful for probing
    along a specific object).
    """
    K = K if K is not None else default_region(R.domain)
    sweeps = {}
    verdict = True
    for m in orders:
        fam_seq = seq if seq is not None else default_family(R.domain, m + 1)
        fam = element_family(R, fam_seq)
        fit = sweep_seminorms(fam, K, m, k_grid)
        ok = fit.exact_zero or fit.peak < FLOOR_REL or fit.slope <= slope_bound
        sweeps[m] = SweepVerdict(fit, slope_bound, FLOOR_REL, ok)
        verdict = verdict and ok
    return ClassificationReport(verdict, sweeps, K)


# ---------------------------------------------------------------------------
# association


@dataclass(frozen=True)
class AssociationReport:
    verdict: bool
    sweeps: dict  # battery index -> SweepVerdict
    slope_bound: float


ASSOC_FLOOR_REL = 1e-9


def associated(A: BasicElement, B: BasicElement | None = None, *,
               seq: KernelSequence | None = None, battery=None,
               k_grid=DEFAULT_K_GRID,
               slope_bound: float = -0.5) -> AssociationReport:
    """Do A and B converge weakly to the same distribution?

    Measures the pairing of (A - B)(psi_k) against a battery of test
    functions and requires a decaying fit for each.  B omitted means
    "associated to zero".

    The resolution floor of each sweep is calibrated against the size of
    the sides themselves: a difference of evaluations carries the
    relative noise of its parts, so pairings stuck at that level count
    as unresolved zeros instead of polluting the verdict with noise
    slopes.
    """
    R = A if B is None else A - B
    seq = seq if seq is not None else default_family(R.domain, 3)
    battery = battery if battery is not None else default_test_battery(R.domain)
    hints = {k: _hints_at(R, seq, k) for k in k_grid}
    fns = {k: eval_basic(R, seq.at(k)) for k in k_grid}
    # the cancellation noise of a difference scales with its summands, so
    # the floor is calibrated against them individually
    parts = _summands(A) + (_summands(B) if B is not None else [])
    pfns = {k: [eval_basic(P, seq.at(k)) for P in parts] for k in k_grid}
    sweeps = {}
    verdict = True
    for idx, phi in enumerate(battery):
        vals = []
        scale = 0.0
        for k in k_grid:
            vals.append(_pairing(fns[k], phi, hints[k]))
            scale = max(scale, sum(_pair_scale(f, phi, hints[k])
                                   for f in pfns[k]))
        fit = fit_order(vals, k_grid)
        floor = ASSOC_FLOOR_REL * scale + FLOOR_REL
        ok = fit.exact_zero or fit.peak < floor or fit.slope <= slope_bound
        sweeps[idx] = SweepVerdict(fit, slope_bound, floor, ok)
        verdict = verdict and ok
    return AssociationReport(verdict, sweeps, slope_bound)


def _summands(R: BasicElement) -> list[BasicElement]:
    if isinstance(R, Sum):
        return _summands(R.a) + _summands(R.b)
    return [R]


def _pair_scale(fn: SmoothFn, phi: TestFn, hints=()) -> float:
    """Coarse upper-scale of <fn dx, phi>, for noise-floor calibration."""
    lo, hi = phi.support.lo, phi.support.hi
    xs = np.concatenate([np.linspace(lo, hi, 9),
                         [h for h in hints if lo < h < hi]])
    big = float(np.max(np.abs(fn.jet(xs, 0) * phi.jet(xs, 0))))
    return big * (hi - lo)
