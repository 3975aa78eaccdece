"""Smooth layer: domains, jets, cutoffs, quadrature, seminorms."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gfkernel.errors import DomainMismatch, OutOfDomain
from gfkernel.smooth import (
    CompactInterval,
    Domain,
    bump,
    constant,
    constant_field,
    derivative_fn,
    exp_fn,
    extend_by_zero,
    integrate,
    lie_smooth,
    lin_comb,
    partition_of_unity,
    plateau,
    polynomial,
    restrict_view,
    seminorm,
    sin_fn,
    smoothstep,
)
from gfkernel.smooth import TestFn as CompactTestFn


class TestDomains:
    def test_open_interval_excludes_endpoints(self):
        d = Domain.interval(-2.0, 2.0)
        inside = d.contains(np.array([-2.0, -1.999, 0.0, 1.999, 2.0]))
        assert list(inside) == [False, True, True, True, False]

    def test_component_lookup(self):
        d = Domain(((-2.0, -0.5), (0.5, 2.0)))
        assert d.component_of(1.0) == (0.5, 2.0)
        assert d.component_of(-1.0) == (-2.0, -0.5)

    def test_intersection_respects_pieces(self):
        d = Domain(((-2.0, -0.5), (0.5, 2.0)))
        got = d.intersect(Domain.interval(-1.0, 1.0))
        assert got.intervals == ((-1.0, -0.5), (0.5, 1.0))

    def test_subset_and_hull(self):
        d = Domain(((-2.0, -0.5), (0.5, 2.0)))
        assert Domain.interval(0.6, 1.9).is_subset(d)
        assert not Domain.interval(-0.6, 0.6).is_subset(d)
        assert d.hull() == (-2.0, 2.0)

    def test_compact_interval_ops(self):
        K = CompactInterval(-0.5, 0.5)
        assert K.width == 1.0
        assert K.hull(CompactInterval(0.0, 2.0)) == CompactInterval(-0.5, 2.0)
        assert K.intersect(CompactInterval(0.0, 2.0)) == CompactInterval(0.0, 0.5)


class TestJets:
    def test_polynomial_derivatives(self):
        p = polynomial([0.0, 0.0, 0.0, 1.0])  # x^3
        assert p.jet(2.0, 0) == 8.0
        assert p.jet(2.0, 1) == 12.0
        assert p.jet(2.0, 2) == 12.0
        assert p.jet(2.0, 3) == 6.0
        assert p.jet(2.0, 4) == 0.0

    def test_product_jets_match_leibniz(self):
        # (sin x * e^x)''' = 2 e^x (cos x - sin x)
        f = sin_fn() * exp_fn()
        x = 0.7
        want = 2.0 * math.exp(x) * (math.cos(x) - math.sin(x))
        assert abs(f.jet(x, 3) - want) < 1e-12

    def test_sum_and_scalar_scale(self):
        f = 2.0 * sin_fn() + polynomial([1.0])
        xs = np.linspace(-1.0, 1.0, 7)
        np.testing.assert_allclose(f.jet(xs, 0), 2.0 * np.sin(xs) + 1.0,
                                   rtol=0, atol=1e-14)
        np.testing.assert_allclose(f.jet(xs, 1), 2.0 * np.cos(xs),
                                   rtol=0, atol=1e-14)

    def test_derivative_fn_shifts_orders(self):
        g = derivative_fn(sin_fn())
        xs = np.linspace(-1.0, 1.0, 9)
        np.testing.assert_allclose(g.jet(xs, 0), np.cos(xs), rtol=0, atol=1e-14)
        np.testing.assert_allclose(g.jet(xs, 1), -np.sin(xs), rtol=0, atol=1e-14)

    @given(st.floats(-1.5, 1.5), st.integers(0, 4))
    def test_composition_jets_match_closed_form(self, x, m):
        # sin(e^x) has analytic derivatives we can cross-check by FD on
        # the jet one order down; spacing chosen for the central stencil
        from gfkernel.smooth import combine

        f = combine(sin_fn(), exp_fn(), "compose")
        if m == 0:
            assert abs(f.jet(x, 0) - math.sin(math.exp(x))) < 1e-12
        else:
            h = 1e-5
            fd = (f.jet(x + h, m - 1) - f.jet(x - h, m - 1)) / (2 * h)
            scale = max(1.0, abs(f.jet(x, m)))
            assert abs(f.jet(x, m) - fd) / scale < 1e-6


class TestCutoffs:
    def test_bump_support_and_flat_edges(self):
        b = bump(0.3, 0.8)
        assert b.support.lo == pytest.approx(-0.5)
        assert b.support.hi == pytest.approx(1.1)
        assert b.jet(0.3, 0) == 1.0
        for m in range(5):
            assert b.jet(1.1, m) == 0.0
            assert b.jet(2.0, m) == 0.0

    def test_plateau_is_one_inside_zero_outside(self):
        p = plateau(-0.5, 0.5, 0.2)
        xs = np.array([-0.8, -0.5, 0.0, 0.5, 0.8])
        np.testing.assert_array_equal(p.jet(xs, 0), [0.0, 1.0, 1.0, 1.0, 0.0])
        # flat to all orders where it is flat
        assert p.jet(0.0, 3) == 0.0

    def test_smoothstep_monotone(self):
        s = smoothstep(0.0, 1.0)
        xs = np.linspace(0.0, 1.0, 101)
        vals = s.jet(xs, 0)
        assert vals[0] == 0.0 and vals[-1] == 1.0
        assert np.all(np.diff(vals) >= 0.0)

    def test_partition_of_unity_sums_to_one(self):
        cover = [(-2.0, -0.4), (-1.1, 1.1), (0.4, 2.0)]
        pou = partition_of_unity(cover)
        xs = np.linspace(-1.95, 1.95, 81)
        tot = sum(pou.chi(i).jet(xs, 0) for i in range(3))
        np.testing.assert_allclose(tot, 1.0, rtol=0, atol=1e-12)

    def test_partition_members_respect_cover(self):
        cover = [(-2.0, -0.4), (-1.1, 1.1), (0.4, 2.0)]
        pou = partition_of_unity(cover)
        # probe points inside the union but outside each piece
        outside = {0: [0.5, 1.5], 1: [-1.5, 1.5], 2: [-1.5, -0.5]}
        for i in range(3):
            chi = pou.chi(i)
            np.testing.assert_array_equal(
                chi.jet(np.array(outside[i]), 0), [0.0, 0.0])


class TestRestriction:
    def test_restrict_view_narrows_domain(self):
        f = restrict_view(sin_fn(), Domain.interval(-1.0, 1.0))
        assert f.domain.intervals == ((-1.0, 1.0),)
        assert f.jet(0.5, 0) == pytest.approx(math.sin(0.5))
        with pytest.raises(OutOfDomain):
            f.jet(1.5, 0)

    def test_extend_by_zero(self):
        g = extend_by_zero(bump(0.0, 0.5, Domain.interval(-1.0, 1.0)),
                           Domain.interval(-2.0, 2.0))
        assert g.jet(1.7, 0) == 0.0
        assert g.jet(0.0, 0) == 1.0

    def test_lin_comb(self):
        f = lin_comb([sin_fn(), sin_fn()], [2.0, -1.0])
        xs = np.linspace(-1, 1, 5)
        np.testing.assert_allclose(f.jet(xs, 0), np.sin(xs), rtol=0, atol=1e-14)


class TestQuadrature:
    def test_exact_on_smooth_closed_forms(self):
        got = integrate(np.sin, (0.0, math.pi), rel_tol=1e-12, abs_tol=1e-14)
        assert abs(got.value - 2.0) < 1e-11
        assert got.error < 1e-10

    def test_reported_error_bounds_true_error(self):
        f = lambda x: np.exp(x) * np.cos(3.0 * x)
        got = integrate(f, (0.0, 2.0), rel_tol=1e-11, abs_tol=1e-14)
        true = (math.exp(2.0) * (math.cos(6.0) + 3.0 * math.sin(6.0)) - 1.0) / 10.0
        assert abs(got.value - true) <= max(got.error * 10, 1e-13)

    def test_breakpoints_respected(self):
        f = lambda x: np.abs(x)
        got = integrate(f, (-1.0, 1.0), rel_tol=1e-12, abs_tol=1e-14,
                        points=(0.0,))
        assert abs(got.value - 1.0) < 1e-12

    @given(st.lists(st.floats(-3.0, 3.0), min_size=1, max_size=5))
    def test_polynomial_exactness(self, coeffs):
        # Gauss-Kronrod nodes integrate low-degree polynomials to roundoff
        p = polynomial(coeffs)
        got = integrate(lambda x: p.jet(x, 0), (-1.0, 1.0),
                        rel_tol=1e-13, abs_tol=1e-13)
        want = sum(c * ((1.0) ** (j + 1) - (-1.0) ** (j + 1)) / (j + 1)
                   for j, c in enumerate(coeffs))
        assert abs(got.value - want) < 1e-11 * max(1.0, abs(want))

    @given(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
    def test_linearity(self, a, b):
        f, g = sin_fn(), exp_fn()
        lhs = integrate(lambda x: a * f.jet(x, 0) + b * g.jet(x, 0),
                        (0.0, 1.0), rel_tol=1e-12, abs_tol=1e-14).value
        rhs = (a * integrate(lambda x: f.jet(x, 0), (0.0, 1.0),
                             rel_tol=1e-12, abs_tol=1e-14).value
               + b * integrate(lambda x: g.jet(x, 0), (0.0, 1.0),
                               rel_tol=1e-12, abs_tol=1e-14).value)
        assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(rhs))


class TestSeminorm:
    def test_interior_maximum_found(self):
        K = CompactInterval(0.0, math.pi / 2)
        assert seminorm(sin_fn(), K, 0) == pytest.approx(1.0, abs=1e-9)

    def test_orders_accumulate(self):
        # m=1 includes |cos| which is 1 at the left endpoint
        assert seminorm(sin_fn(), CompactInterval(0.0, 1.0), 1) == \
            pytest.approx(1.0, abs=1e-12)

    def test_zoom_sharpens_narrow_peaks(self):
        # a spike of width ~1e-2 between coarse grid points
        spike = bump(0.123456, 0.01)
        val = seminorm(spike, CompactInterval(0.0, 0.5), 0)
        assert val == pytest.approx(1.0, abs=1e-6)


class TestVectorFields:
    def test_lie_on_smooth_is_directional_derivative(self):
        X = constant_field(2.0)
        g = lie_smooth(X, sin_fn())
        xs = np.linspace(-1.0, 1.0, 9)
        np.testing.assert_allclose(g.jet(xs, 0), 2.0 * np.cos(xs),
                                   rtol=0, atol=1e-14)

    def test_nonconstant_coefficient(self):
        X = polynomial([0.0, 1.0])  # x d/dx
        from gfkernel.smooth import VectorField

        g = lie_smooth(VectorField(X), exp_fn())
        assert g.jet(0.5, 0) == pytest.approx(0.5 * math.exp(0.5), abs=1e-13)


class TestTestFn:
    def test_wraps_compact_support(self):
        phi = CompactTestFn(bump(0.0, 0.8))
        assert phi.support == CompactInterval(-0.8, 0.8)
        assert phi.jet(0.0, 0) == 1.0

    def test_rejects_noncompact(self):
        from gfkernel.errors import UnboundedSupport

        with pytest.raises(UnboundedSupport):
            CompactTestFn(sin_fn())
