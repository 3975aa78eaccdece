"""Generalized functions as smooth maps from kernels to smooth functions.

An element takes a smoothing kernel and returns a smooth function on the
kernel's domain.  Two embeddings generate everything of interest: iota
pairs a distribution against the kernel pointwise, sigma ignores the
kernel altogether.  Elements form an algebra, carry two competing Lie
derivatives, restrict to open subsets, and push forward along
diffeomorphisms; each constructor also tracks a structural locality tag
(how much of the kernel the output at a point can see).

Evaluation is structural: every node knows its own derivative rules, so
kernel-direction differentials, which the hat Lie derivative needs, come
out exact rather than by finite differences.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .dist import Distribution, restrict_dist
from .errors import DomainMismatch, NotContained, WrongTag
from .kernel import (
    AffineComboKernel,
    ConstantKernel,
    Kernel,
    KernelSequence,
    LieKernel,
    PullbackKernel,
    apply_kernel,
    make_mollifier,
    standard_sequence,
)
from .smooth import (
    CompactInterval,
    Domain,
    SmoothFn,
    TestFn,
    VectorField,
    bump,
    combine,
    constant,
    lie_smooth,
    lin_comb,
    restrict_view,
)

# the locality chain, ordered by how little of the kernel an element sees
CHAIN_NONE = 0          # arbitrary smooth dependence
CHAIN_LOCAL = 1         # output on V depends only on the kernel on V
CHAIN_POINT_LOCAL = 2   # output at x depends only on the density at x
CHAIN_POINT_INDEP = 3   # one fixed functional applied to the density at x

_CHAIN_NAMES = ("none", "local", "point-local", "point-independent")


@dataclass(frozen=True)
class LocalityTag:
    """Structural locality bookkeeping for an element.

    ``chain`` is a lower bound certified by the construction, not a
    measurement; ``linear`` means linear in the kernel slot.  Stored
    smooth-module linearity is rare, but every linear point-local
    element is smooth-module linear, so the accessor upgrades.
    """

    chain: int
    linear: bool
    cinf_stored: bool = False

    @property
    def cinf_linear(self) -> bool:
        return self.cinf_stored or (self.linear and self.chain >= CHAIN_POINT_LOCAL)

    @property
    def chain_name(self) -> str:
        return _CHAIN_NAMES[self.chain]

    def meet(self, other: "LocalityTag") -> "LocalityTag":
        return LocalityTag(min(self.chain, other.chain),
                           self.linear and other.linear,
                           self.cinf_stored and other.cinf_stored)


# ---------------------------------------------------------------------------
# element nodes


class BasicElement:
    """Base node; subclasses carry the structure of their construction."""

    domain: Domain

    @property
    def tag(self) -> LocalityTag:
        return tag_of(self)

    def __add__(self, other):
        if isinstance(other, BasicElement):
            return Sum(self, other)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, BasicElement):
            return Sum(self, _scale(-1.0, other))
        return NotImplemented

    def __neg__(self):
        return _scale(-1.0, self)

    def __mul__(self, other):
        if isinstance(other, Sigma):
            return SmoothScale(other.f, self)
        if isinstance(other, BasicElement):
            return Product(self, other)
        if isinstance(other, SmoothFn):
            return SmoothScale(other, self)
        if isinstance(other, (int, float)):
            return _scale(float(other), self)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, SmoothFn):
            return SmoothScale(other, self)
        if isinstance(other, (int, float)):
            return _scale(float(other), self)
        return NotImplemented

    def __call__(self, ker: Kernel) -> SmoothFn:
        return eval_basic(self, ker)

    def restrict(self, V: Domain) -> "BasicElement":
        return restrict_basic(self, V)


def _scale(c: float, a: BasicElement) -> "SmoothScale":
    return SmoothScale(constant(c, a.domain), a)


def _common_domain(a: BasicElement, b: BasicElement) -> Domain:
    if a.domain != b.domain:
        raise DomainMismatch("elements live on different domains")
    return a.domain


@dataclass(frozen=True)
class Iota(BasicElement):
    """The distribution embedding: (iota u)(phi)(x) = <u, phi(x, .)>."""

    u: Distribution

    @property
    def domain(self) -> Domain:
        return self.u.domain


@dataclass(frozen=True)
class Sigma(BasicElement):
    """The constant embedding: (sigma f)(phi) = f, kernel ignored."""

    f: SmoothFn

    @property
    def domain(self) -> Domain:
        return self.f.domain


@dataclass(frozen=True)
class Sum(BasicElement):
    a: BasicElement
    b: BasicElement

    def __post_init__(self):
        _common_domain(self.a, self.b)

    @property
    def domain(self) -> Domain:
        return self.a.domain


@dataclass(frozen=True)
class Product(BasicElement):
    """Pointwise product of evaluated outputs; where new singular objects
    (delta squared and friends) come from."""

    a: BasicElement
    b: BasicElement

    def __post_init__(self):
        _common_domain(self.a, self.b)

    @property
    def domain(self) -> Domain:
        return self.a.domain


@dataclass(frozen=True)
class SmoothScale(BasicElement):
    """f * R for a fixed smooth f; the smooth-module structure."""

    f: SmoothFn
    a: BasicElement

    def __post_init__(self):
        if self.f.domain != self.a.domain:
            if not self.a.domain.is_subset(self.f.domain):
                raise DomainMismatch("coefficient must cover the element's domain")
            object.__setattr__(self, "f", restrict_view(self.f, self.a.domain))

    @property
    def domain(self) -> Domain:
        return self.a.domain


@dataclass(frozen=True)
class LieHat(BasicElement):
    """Geometric Lie derivative: differentiate against the transported
    kernel and add the ambient directional term.  Commutes with both
    embeddings."""

    X: VectorField
    a: BasicElement

    @property
    def domain(self) -> Domain:
        return self.a.domain


@dataclass(frozen=True)
class LieTilde(BasicElement):
    """Naive Lie derivative: post-compose the output with X d/dx.  Smooth-
    module linear in X, but blind to how the kernel moves, which costs
    point-locality."""

    X: VectorField
    a: BasicElement

    @property
    def domain(self) -> Domain:
        return self.a.domain


@dataclass(frozen=True)
class Diffeo1D:
    """A diffeomorphism between two open sets, with an explicit inverse."""

    fwd: SmoothFn
    inv: SmoothFn
    source: Domain
    image: Domain

    def __post_init__(self):
        lo, hi = self.source.hull()
        if math.isfinite(lo) and math.isfinite(hi):
            xs = np.linspace(lo + 1e-6 * (hi - lo), hi - 1e-6 * (hi - lo), 65)
        else:
            xs = np.linspace(-4.0, 4.0, 65)
        xs = xs[self.source.contains(xs)]
        fx = self.fwd.jet(xs, 0)
        if not self.image.contains(fx).all():
            raise NotContained("forward map leaves the stated image")
        back = self.inv.jet(fx, 0)
        if np.max(np.abs(back - xs)) > 1e-9:
            raise DomainMismatch("inverse does not undo the forward map")
        d = self.fwd.jet(xs, 1)
        if np.any(d == 0.0) or (np.sign(d) != np.sign(d[0])).any():
            raise DomainMismatch("map is not a diffeomorphism (critical point)")


def affine_diffeo(scale: float, shift: float, domain: Domain) -> Diffeo1D:
    """mu(x) = scale * x + shift on ``domain``."""
    from .smooth import polynomial

    if scale == 0.0:
        raise DomainMismatch("scale must be nonzero")
    ivs = []
    for lo, hi in domain.intervals:
        a, b = scale * lo + shift, scale * hi + shift
        ivs.append((min(a, b), max(a, b)))
    image = Domain(tuple(sorted(ivs)))
    fwd = polynomial([shift, scale], domain)
    inv = polynomial([-shift / scale, 1.0 / scale], image)
    return Diffeo1D(fwd, inv, domain, image)


@dataclass(frozen=True)
class Pushforward(BasicElement):
    """Transport along a diffeomorphism: evaluate upstairs by pulling the
    kernel back through both slots, then move the output across."""

    a: BasicElement
    mu: Diffeo1D

    def __post_init__(self):
        if self.mu.source != self.a.domain:
            raise DomainMismatch("transport map must start on the element's domain")

    @property
    def domain(self) -> Domain:
        return self.mu.image


@dataclass(frozen=True)
class GenericElement(BasicElement):
    """Escape hatch: an arbitrary kernel -> smooth-function map.

    The evaluator must accept kernels on any open subset of ``dom`` (that
    is how restriction reaches it) and should be smooth in the kernel for
    the finite-difference differential to mean anything.  ``stated_tag``
    is trusted as given; probe_locality can audit it.
    """

    evaluator: object  # Kernel -> SmoothFn
    dom: Domain
    stated_tag: LocalityTag = LocalityTag(CHAIN_NONE, False)
    fd_step: float = 1e-3

    @property
    def domain(self) -> Domain:
        return self.dom


def iota(u: Distribution) -> Iota:
    return Iota(u)


def sigma(f: SmoothFn, domain: Domain | None = None) -> Sigma:
    if domain is not None and domain != f.domain:
        f = restrict_view(f, domain)
    return Sigma(f)


def lie_hat(X: VectorField, a: BasicElement) -> LieHat:
    return LieHat(_field_on(X, a.domain), a)


def lie_tilde(X: VectorField, a: BasicElement) -> LieTilde:
    return LieTilde(_field_on(X, a.domain), a)


def pushforward(a: BasicElement, mu: Diffeo1D) -> Pushforward:
    return Pushforward(a, mu)


def as_generic(a: BasicElement, tag: LocalityTag | None = None) -> GenericElement:
    """Forget structure, keeping only the evaluation map."""
    return GenericElement(lambda ker: eval_basic(a, ker), a.domain,
                          tag if tag is not None else LocalityTag(CHAIN_NONE, False))


def _field_on(X: VectorField, dom: Domain) -> VectorField:
    if X.coef.domain == dom:
        return X
    if not dom.is_subset(X.coef.domain):
        raise DomainMismatch("vector field must cover the element's domain")
    return VectorField(restrict_view(X.coef, dom))


# ---------------------------------------------------------------------------
# structural locality tags


def tag_of(R: BasicElement) -> LocalityTag:
    if isinstance(R, Iota):
        return LocalityTag(CHAIN_POINT_INDEP, linear=True)
    if isinstance(R, Sigma):
        return LocalityTag(CHAIN_POINT_LOCAL, linear=False)
    if isinstance(R, Sum):
        return tag_of(R.a).meet(tag_of(R.b))
    if isinstance(R, Product):
        t = tag_of(R.a).meet(tag_of(R.b))
        return LocalityTag(t.chain, linear=False)
    if isinstance(R, SmoothScale):
        t = tag_of(R.a)
        if R.f.const_value is not None:
            return t
        return LocalityTag(min(t.chain, CHAIN_POINT_LOCAL), t.linear, t.cinf_stored)
    if isinstance(R, LieHat):
        return tag_of(R.a)
    if isinstance(R, LieTilde):
        t = tag_of(R.a)
        return LocalityTag(min(t.chain, CHAIN_LOCAL), t.linear)
    if isinstance(R, Pushforward):
        return tag_of(R.a)
    if isinstance(R, GenericElement):
        return R.stated_tag
    raise TypeError(f"unknown element {type(R).__name__}")


# ---------------------------------------------------------------------------
# evaluation and kernel-direction differentials


def eval_basic(R: BasicElement, ker: Kernel) -> SmoothFn:
    """R applied to one kernel, as a smooth function on the kernel's domain."""
    if isinstance(ker, KernelSequence):
        raise TypeError("pass a single kernel (seq.at(k)), not the sequence")
    if ker.domain != R.domain:
        if ker.domain.is_subset(R.domain):
            R = restrict_basic(R, ker.domain)
        else:
            raise DomainMismatch("kernel domain must sit inside the element's")
    return _eval(R, ker)


def _eval(R: BasicElement, ker: Kernel) -> SmoothFn:
    if isinstance(R, Iota):
        return apply_kernel(ker, R.u)
    if isinstance(R, Sigma):
        return R.f
    if isinstance(R, Sum):
        return _eval(R.a, ker) + _eval(R.b, ker)
    if isinstance(R, Product):
        return _eval(R.a, ker) * _eval(R.b, ker)
    if isinstance(R, SmoothScale):
        return R.f * _eval(R.a, ker)
    if isinstance(R, LieHat):
        moved = d_eval(R.a, ker, (LieKernel(R.X, ker),))
        ambient = lie_smooth(R.X, _eval(R.a, ker), mode="function")
        return ambient - moved
    if isinstance(R, LieTilde):
        return lie_smooth(R.X, _eval(R.a, ker), mode="function")
    if isinstance(R, Pushforward):
        pulled = PullbackKernel(ker, R.mu.fwd, R.mu.inv, R.a.domain)
        up = _eval(R.a, pulled)
        return combine(up, R.mu.inv, "compose")
    if isinstance(R, GenericElement):
        return R.evaluator(ker)
    raise TypeError(f"unknown element {type(R).__name__}")


def d_eval(R: BasicElement, ker: Kernel, dirs: tuple[Kernel, ...]) -> SmoothFn:
    """The n-th kernel-direction differential of R at ker.

    Multilinear and symmetric in ``dirs``; computed from the structure of
    R, so embeddings differentiate exactly (iota is linear, sigma is
    constant) and only GenericElement falls back to finite differences.
    """
    n = len(dirs)
    if n == 0:
        return _eval(R, ker)
    if isinstance(R, Iota):
        if n == 1:
            return apply_kernel(dirs[0], R.u)
        return constant(0.0, ker.domain)
    if isinstance(R, Sigma):
        return constant(0.0, ker.domain)
    if isinstance(R, Sum):
        return d_eval(R.a, ker, dirs) + d_eval(R.b, ker, dirs)
    if isinstance(R, Product):
        idx = range(n)
        parts = []
        for r in range(n + 1):
            for S in itertools.combinations(idx, r):
                Sc = tuple(i for i in idx if i not in S)
                parts.append(d_eval(R.a, ker, tuple(dirs[i] for i in S))
                             * d_eval(R.b, ker, tuple(dirs[i] for i in Sc)))
        return lin_comb(parts, [1.0] * len(parts))
    if isinstance(R, SmoothScale):
        return R.f * d_eval(R.a, ker, dirs)
    if isinstance(R, LieHat):
        X = R.X
        moved = d_eval(R.a, ker, (LieKernel(X, ker),) + dirs)
        cross = []
        for i in range(n):
            repl = dirs[:i] + (LieKernel(X, dirs[i]),) + dirs[i + 1:]
            cross.append(d_eval(R.a, ker, repl))
        ambient = lie_smooth(X, d_eval(R.a, ker, dirs), mode="function")
        out = ambient - moved
        for c in cross:
            out = out - c
        return out
    if isinstance(R, LieTilde):
        return lie_smooth(R.X, d_eval(R.a, ker, dirs), mode="function")
    if isinstance(R, Pushforward):
        pulled = PullbackKernel(ker, R.mu.fwd, R.mu.inv, R.a.domain)
        pdirs = tuple(PullbackKernel(d, R.mu.fwd, R.mu.inv, R.a.domain)
                      for d in dirs)
        up = d_eval(R.a, pulled, pdirs)
        return combine(up, R.mu.inv, "compose")
    if isinstance(R, GenericElement):
        return _fd_differential(R, ker, dirs)
    raise TypeError(f"unknown element {type(R).__name__}")


def _fd_differential(R: GenericElement, ker: Kernel,
                     dirs: tuple[Kernel, ...]) -> SmoothFn:
    """Central differences in kernel space, one Richardson pass."""
    h = R.fd_step
    psi = dirs[0]
    rest = dirs[1:]

    def D(step: float) -> SmoothFn:
        plus = AffineComboKernel([(1.0, ker), (step, psi)])
        minus = AffineComboKernel([(1.0, ker), (-step, psi)])
        if rest:
            a = _fd_differential(R, plus, rest)
            b = _fd_differential(R, minus, rest)
        else:
            a = R.evaluator(plus)
            b = R.evaluator(minus)
        return lin_comb([a, b], [0.5 / step, -0.5 / step])

    d1, d2 = D(h), D(h / 2.0)
    return lin_comb([d2, d1], [4.0 / 3.0, -1.0 / 3.0])


# ---------------------------------------------------------------------------
# restriction (a structural functor, applied eagerly)


def restrict_basic(R: BasicElement, V: Domain) -> BasicElement:
    """R|_V: push the restriction through the construction.

    Transitive by construction: restricting twice is restricting once to
    the smaller set.
    """
    if V == R.domain:
        return R
    if not V.is_subset(R.domain):
        raise NotContained("restriction target must sit inside the domain")
    if isinstance(R, Iota):
        return Iota(restrict_dist(R.u, V))
    if isinstance(R, Sigma):
        return Sigma(restrict_view(R.f, V))
    if isinstance(R, Sum):
        return Sum(restrict_basic(R.a, V), restrict_basic(R.b, V))
    if isinstance(R, Product):
        return Product(restrict_basic(R.a, V), restrict_basic(R.b, V))
    if isinstance(R, SmoothScale):
        return SmoothScale(restrict_view(R.f, V), restrict_basic(R.a, V))
    if isinstance(R, LieHat):
        return LieHat(_field_on(R.X, V), restrict_basic(R.a, V))
    if isinstance(R, LieTilde):
        return LieTilde(_field_on(R.X, V), restrict_basic(R.a, V))
    if isinstance(R, Pushforward):
        W_ivs = []
        for lo, hi in V.intervals:
            a, b = float(R.mu.inv.jet(lo, 0)), float(R.mu.inv.jet(hi, 0))
            W_ivs.append((min(a, b), max(a, b)))
        W = Domain(tuple(sorted(W_ivs)))
        mu = Diffeo1D(restrict_view(R.mu.fwd, W), restrict_view(R.mu.inv, V),
                      W, V)
        return Pushforward(restrict_basic(R.a, W), mu)
    if isinstance(R, GenericElement):
        return GenericElement(R.evaluator, V, R.stated_tag, R.fd_step)
    raise TypeError(f"unknown element {type(R).__name__}")


# ---------------------------------------------------------------------------
# empirical locality probing


@dataclass(frozen=True)
class LocalityReport:
    """Measured consistency with each rung of the locality chain.

    Flags are one-sided: True means the probes could not separate the
    element from that class; False is a witnessed failure.
    """

    local: bool
    point_local: bool
    point_independent: bool
    linear: bool
    defects: dict

    @property
    def chain_estimate(self) -> int:
        if not self.local:
            return CHAIN_NONE
        if not self.point_local:
            return CHAIN_LOCAL
        if not self.point_independent:
            return CHAIN_POINT_LOCAL
        return CHAIN_POINT_INDEP

    def consistent_with(self, tag: LocalityTag) -> bool:
        return self.chain_estimate >= tag.chain and (self.linear or not tag.linear)


class _XReparamKernel(Kernel):
    """Same densities along a reparametrized base point: phi(c + s(x-c), y).

    Agrees with phi at x = c but moves differently with x; separates
    point-local elements from merely local ones.
    """

    def __init__(self, base: Kernel, center: float, slope: float):
        self.base = base
        self.center = center
        self.slope = slope
        self.domain = base.domain
        self.jet_cap = base.jet_cap

    def _warp(self, x: float) -> float:
        return self.center + self.slope * (x - self.center)

    def jets(self, x: float, mx: int, ys, my: int) -> np.ndarray:
        B = self.base.jets(self._warp(x), mx, ys, my)
        scale = self.slope ** np.arange(mx + 1)
        return B * scale[:, None, None]

    def y_window(self, x: float) -> CompactInterval:
        return self.base.y_window(self._warp(x))


def probe_locality(R: BasicElement, *, k: int = 16, tol: float = 1e-8,
                   seed: int = 0) -> LocalityReport:
    """Audit an element's locality empirically.

    Builds kernels that agree on a region, at a point, or differ by a
    linear combination, and checks whether the element can tell them
    apart where it should not.  Probes are seeded but deterministic.
    """
    dom = R.domain
    lo, hi = dom.hull()
    if not (math.isfinite(lo) and math.isfinite(hi)):
        lo, hi = max(lo, -2.0), min(hi, 2.0)
    L = hi - lo
    rng = np.random.default_rng(seed)
    defects: dict[str, float] = {}

    seq_a = standard_sequence(dom, make_mollifier(3))
    seq_b = standard_sequence(dom, make_mollifier(1), mbar=0.7)
    ka, kb = seq_a.at(k), seq_b.at(k)

    def sup_on(f: SmoothFn, a: float, b: float, n: int = 41) -> float:
        xs = np.linspace(a, b, n)
        xs = xs[dom.contains(xs)]
        return float(np.max(np.abs(f.jet(xs, 0)))) if xs.size else 0.0

    # scale reference so tolerances mean "relative to typical output size"
    base_out = _eval(R, ka)
    ref = max(sup_on(base_out, lo + 0.1 * L, hi - 0.1 * L), 1.0)

    # linearity: R(a phi + b psi) vs a R(phi) + b R(psi)
    ca, cb = 0.3, -1.2
    combo = AffineComboKernel([(ca, ka), (cb, kb)])
    lhs = _eval(R, combo)
    rhs = lin_comb([_eval(R, ka), _eval(R, kb)], [ca, cb])
    defect = sup_on(lhs - rhs, lo + 0.1 * L, hi - 0.1 * L)
    defects["linear"] = defect / ref
    linear = defect <= tol * ref

    # point-independence: a kernel with no x-dependence must give a
    # constant output
    mid, rad = 0.5 * (lo + hi), 0.375 * L
    cw = ConstantKernel(TestFn(bump(mid, rad, dom)), dom)
    out = _eval(R, cw)
    xs = np.linspace(lo + 0.1 * L, hi - 0.1 * L, 41)
    xs = xs[dom.contains(xs)]
    vals = out.jet(xs, 0)
    defect = float(np.max(vals) - np.min(vals))
    defects["point_independent"] = defect / ref
    point_independent = defect <= tol * ref

    # point-locality: kernels agreeing at x0 (but moving differently)
    # must agree at x0.  Probe where the output actually varies, or a
    # compactly concentrated element would pass vacuously.
    grid = np.linspace(lo + 0.15 * L, hi - 0.15 * L, 81)
    grid = grid[dom.contains(grid)]
    weight = np.abs(base_out.jet(grid, 0)) + np.abs(base_out.jet(grid, 1))
    picks = list(grid[np.argsort(weight)[::-1][:3]])
    picks += list(rng.uniform(lo + 0.2 * L, hi - 0.2 * L, 2))
    worst = 0.0
    for x0 in picks:
        warped = _XReparamKernel(ka, float(x0), 1.5)
        d = abs(float(base_out.jet(float(x0), 0))
                - float(_eval(R, warped).jet(float(x0), 0)))
        worst = max(worst, d)
    defects["point_local"] = worst / ref
    point_local = worst <= tol * ref

    # locality: kernels agreeing on a left region must give equal output
    # deep inside it
    cut = lo + 0.55 * L
    patched = _PatchedKernel(ka, kb, cut + 0.1 * L)
    defect = sup_on(base_out - _eval(R, patched), lo + 0.1 * L, cut - 0.15 * L)
    defects["local"] = defect / ref
    local = defect <= tol * ref

    return LocalityReport(local, point_local, point_independent, linear, defects)


class _PatchedKernel(Kernel):
    """base left of the seam, other to the right, glued by a smooth ramp
    in x only; agrees with base exactly left of the ramp."""

    def __init__(self, base: Kernel, other: Kernel, seam: float):
        from .smooth import smoothstep

        self.base = base
        self.other = other
        lo, hi = base.domain.hull()
        width = 0.1 * (hi - lo)
        self.ramp = smoothstep(seam, seam + width)
        self.domain = base.domain
        self.jet_cap = min(base.jet_cap, other.jet_cap)

    def jets(self, x: float, mx: int, ys, my: int) -> np.ndarray:
        w = self.ramp.jets(np.array([x]), mx)[:, 0]
        B = self.base.jets(x, mx, ys, my)
        if not w.any():
            return B
        O = self.other.jets(x, mx, ys, my)
        out = np.array(B)
        for i in range(mx + 1):
            for p in range(i + 1):
                if w[p] == 0.0:
                    continue
                out[i] += math.comb(i, p) * w[p] * (O[i - p] - B[i - p])
        return out

    def y_window(self, x: float) -> CompactInterval:
        return self.base.y_window(x).hull(self.other.y_window(x))


# ---------------------------------------------------------------------------
# convenience: check a claimed tag against the probes


def audit_tag(R: BasicElement, **kw) -> LocalityReport:
    report = probe_locality(R, **kw)
    if not report.consistent_with(tag_of(R)):
        raise WrongTag(
            f"structural tag {tag_of(R)} not supported by probes: {report.defects}")
    return report
