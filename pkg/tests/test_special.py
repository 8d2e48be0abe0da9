"""Tests for the Bessel machinery: frozen-value oracles, exact
half-integer degeneration, envelope bounds, and transform round trips."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from besseldet.quadrature import gauss_panels, geometric_edges, oscillation_edges
from besseldet.special import (
    BesselOrder,
    InvalidOrderError,
    ResolutionError,
    asymptotic_coeffs,
    bessel_dpp_kernel,
    bessel_formula_average,
    bessel_j,
    dpp_kernel_diagonal,
    hankel_transform,
    osc_remainder_reduced,
    oscillatory_parts,
    remainder_coeffs,
    remainder_primitive,
    tail_trig_integrals,
)

ROOT_2_OVER_PI = math.sqrt(2.0 / math.pi)


def smooth_bump(x, lo=1.0, hi=5.0):
    """C-infinity bump supported on (lo, hi)."""
    x = np.asarray(x, dtype=float)
    u = (2.0 * x - (lo + hi)) / (hi - lo)
    out = np.zeros_like(x)
    inside = np.abs(u) < 1.0
    with np.errstate(divide="ignore", over="ignore"):
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
    return out


class TestBesselJ:
    def test_frozen_values(self):
        """Reference values computed with mpmath at 30 digits."""
        assert bessel_j(BesselOrder(0.0), 0.0) == pytest.approx(1.0, abs=1e-14)
        assert bessel_j(BesselOrder(1.0), 0.0) == pytest.approx(0.0, abs=1e-14)
        assert bessel_j(BesselOrder(0.0), 1.0) == pytest.approx(
            0.76519768655796655, rel=1e-13
        )
        assert bessel_j(BesselOrder(0.7), 3.2) == pytest.approx(
            0.09772046752530012, rel=1e-13
        )
        assert bessel_j(BesselOrder(1.5), 2.5) == pytest.approx(
            0.52508026466400315, rel=1e-13
        )

    def test_half_integer_trig_form(self):
        """J_{1/2}(x) = sqrt(2/(pi x)) sin x; at x = pi/2 this is 2/pi."""
        assert bessel_j(BesselOrder(0.5), math.pi / 2) == pytest.approx(
            2.0 / math.pi, rel=1e-13
        )
        x = np.linspace(0.3, 40.0, 97)
        expected = np.sqrt(2.0 / (math.pi * x)) * np.sin(x)
        np.testing.assert_allclose(bessel_j(BesselOrder(0.5), x), expected, atol=1e-13)

    def test_rejects_orders_at_or_below_minus_one(self):
        for bad in (-1.0, -1.5, float("nan")):
            with pytest.raises(InvalidOrderError):
                BesselOrder(bad)

    @given(st.floats(min_value=-0.99, max_value=4.0))
    @settings(max_examples=25, deadline=None)
    def test_order_accepts_admissible_range(self, nu):
        assert BesselOrder(nu).nu == nu


class TestOscillatoryParts:
    def test_frak_j_is_scaled_bessel(self):
        order = BesselOrder(0.7)
        x = np.geomspace(0.01, 200.0, 50)
        frak_j, _, _ = oscillatory_parts(order, x)
        np.testing.assert_allclose(frak_j, np.sqrt(x) * bessel_j(order, x), rtol=1e-13)

    def test_remainder_vanishes_at_half_integers(self):
        """frakD and frakD' are identically zero at nu = +-1/2."""
        rng = np.random.default_rng(42)
        x = rng.uniform(1e-3, 100.0, size=1000)
        for nu in (0.5, -0.5):
            _, frak_d, frak_d_prime = oscillatory_parts(BesselOrder(nu), x)
            assert np.all(frak_d == 0.0)
            assert np.all(frak_d_prime == 0.0)

    def test_derivative_against_finite_difference(self):
        order = BesselOrder(0.3)
        x = np.linspace(0.5, 30.0, 40)
        h = 1e-6
        _, dm, _ = oscillatory_parts(order, x - h)
        _, dp, _ = oscillatory_parts(order, x + h)
        _, _, deriv = oscillatory_parts(order, x)
        np.testing.assert_allclose(deriv, (dp - dm) / (2.0 * h), atol=5e-9)

    def test_two_term_expansion(self):
        """frakD(x) + sqrt(2/pi)[k1 sin(x-phi)/x + k2 cos(x-phi)/x^2] = O(x^-3)."""
        order = BesselOrder(0.7)
        k1, k2, _ = remainder_coeffs(order)
        x = np.linspace(80.0, 400.0, 500)
        _, frak_d, _ = oscillatory_parts(order, x)
        arg = x - order.phase
        model = -ROOT_2_OVER_PI * (k1 * np.sin(arg) / x + k2 * np.cos(arg) / x**2)
        assert np.max(np.abs(frak_d - model) * x**3) < 1.0

    def test_reduced_remainder_decay(self):
        """Etilde = frakD' - a cos(x-phi)/x decays like x^-2."""
        order = BesselOrder(0.0)
        x = np.linspace(60.0, 500.0, 800)
        e = osc_remainder_reduced(order, x)
        assert np.max(np.abs(e) * x**2) < 0.2


class TestAsymptoticCoefficients:
    def test_fit_matches_exact_leading_coefficient(self):
        """The fitted a_coeff adjudicates between the two candidate
        normalizations; at nu = 0 the exact value is sqrt(2/pi)/8."""
        ac = asymptotic_coeffs(BesselOrder(0.0))
        exact = ROOT_2_OVER_PI / 8.0
        assert abs(ac.a_coeff - exact) < 1e-3
        assert ac.candidates[0] == pytest.approx(exact, rel=1e-14)
        assert ac.candidates[1] == pytest.approx(2.0 * exact, rel=1e-14)
        assert abs(ac.a_coeff - ac.candidates[0]) < abs(ac.a_coeff - ac.candidates[1])
        assert ac.fit_range == (50.0, 500.0)

    def test_fit_matches_exact_at_generic_order(self):
        order = BesselOrder(0.7)
        _, _, a_exact = remainder_coeffs(order)
        ac = asymptotic_coeffs(order)
        assert abs(ac.a_coeff - a_exact) < 1e-3 * (1.0 + abs(a_exact))

    def test_envelopes_validate_on_wide_grid(self):
        """|frakD| <= C/(sqrt x (1+sqrt x)) and the x^{-3/2} analogue for
        Etilde, with the fitted constants."""
        for nu in (0.0, 0.7, -0.3):
            order = BesselOrder(nu)
            ac = asymptotic_coeffs(order)
            x = np.concatenate([np.geomspace(1e-3, 1.0, 200), np.linspace(1.0, 480.0, 4000)])
            _, frak_d, _ = oscillatory_parts(order, x)
            env = ac.c_envelope / (np.sqrt(x) * (1.0 + np.sqrt(x)))
            assert np.all(np.abs(frak_d) <= env + 1e-15)
            e = osc_remainder_reduced(order, x)
            env_der = ac.c_envelope_der / (x**1.5 * (1.0 + np.sqrt(x)))
            assert np.all(np.abs(e) <= env_der + 1e-15)

    def test_half_integer_coefficients_are_zero(self):
        ac = asymptotic_coeffs(BesselOrder(0.5))
        assert ac.a_coeff == 0.0
        assert ac.c_envelope == 0.0


class TestHankelTransform:
    def test_indicator_closed_form_at_half(self):
        """H applied to chi_[0,1] at nu = 1/2 equals
        sqrt(2/pi)(1 - cos lam)/lam; value at lam = 2 frozen from mpmath."""
        order = BesselOrder(0.5)
        edges = np.linspace(0.0, 1.0, 65)
        nodes, weights = gauss_panels(edges, 8)
        grid = (nodes, weights, np.ones_like(nodes))
        lam = np.array([0.5, 1.0, 2.0, 6.0])
        got = hankel_transform(None, order, lam, grid=grid)
        expected = ROOT_2_OVER_PI * (1.0 - np.cos(lam)) / lam
        np.testing.assert_allclose(got, expected, atol=1e-12)
        assert got[2] == pytest.approx(0.56496084835539193, rel=1e-12)

    @pytest.mark.parametrize("nu", [0.0, 0.7, 0.5, -0.5])
    def test_involution_and_isometry(self, nu):
        """H(Hf) = f and ||Hf||_2 = ||f||_2 for a smooth bump away from 0.

        Geometric head panels absorb the lam^{2 nu + 1} kink at the origin
        of the back transform."""
        order = BesselOrder(nu)
        head = geometric_edges(0.0, 1.0, 10, 1e-4)
        body = oscillation_edges(1.0, 120.0, 6.0, order=12)
        lam_edges = np.concatenate([head, body[1:]])
        lam_nodes, lam_weights = gauss_panels(lam_edges, 12)
        hf = hankel_transform(smooth_bump, order, lam_nodes, x_max=5.0)
        x_test = np.linspace(1.2, 4.8, 25)
        back = hankel_transform(None, order, x_test, grid=(lam_nodes, lam_weights, hf))
        np.testing.assert_allclose(back, smooth_bump(x_test), atol=1e-6)
        x_edges = np.linspace(1.0, 5.0, 41)
        x_nodes, x_weights = gauss_panels(x_edges, 8)
        norm_f = np.sum(x_weights * smooth_bump(x_nodes) ** 2)
        norm_hf = np.sum(lam_weights * hf**2)
        assert norm_hf == pytest.approx(norm_f, rel=1e-6)

    def test_under_resolved_grid_raises(self):
        order = BesselOrder(0.0)
        nodes = np.linspace(0.1, 5.0, 20)
        weights = np.full_like(nodes, 5.0 / 20)
        with pytest.raises(ResolutionError):
            hankel_transform(
                None, order, np.array([50.0]), grid=(nodes, weights, np.ones_like(nodes))
            )

    def test_budget_exceeded_raises(self):
        with pytest.raises(ResolutionError):
            hankel_transform(
                smooth_bump, BesselOrder(0.0), np.array([3000.0]), x_max=50.0, max_nodes=100
            )


class TestRestrictedKernel:
    def test_frozen_off_diagonal_value(self):
        """K at nu = 0.7, (x, y) = (1.3, 2.9); mpmath quadrature oracle."""
        got = bessel_dpp_kernel(BesselOrder(0.7), 1.3, 2.9)
        assert got == pytest.approx(0.24060416870239573, rel=1e-12)

    def test_frozen_diagonal_value(self):
        got = dpp_kernel_diagonal(BesselOrder(0.0), 2.0)
        assert got == pytest.approx(0.38273858486667213, rel=1e-12)

    def test_against_direct_quadrature(self):
        """Closed form vs 64-panel Gauss quadrature of the defining
        integral on a 20 x 20 grid in (0, 30]^2."""
        order = BesselOrder(0.3)
        rng = np.random.default_rng(42)
        x = rng.uniform(0.05, 30.0, size=20)
        y = rng.uniform(0.05, 30.0, size=20)
        nodes, weights = gauss_panels(np.linspace(0.0, 1.0, 65), 10)
        jx = bessel_j(order, np.outer(x, nodes))
        jy = bessel_j(order, np.outer(y, nodes))
        direct = np.sqrt(np.outer(x, y)) * np.einsum(
            "ik,jk,k->ij", jx, jy, weights * nodes
        )
        closed = bessel_dpp_kernel(order, x[:, None], y[None, :])
        np.testing.assert_allclose(closed, direct, atol=1e-8)

    def test_half_integer_closed_form(self):
        """At nu = 1/2 the kernel is (1/pi)[sin(x-y)/(x-y) - sin(x+y)/(x+y)]."""
        rng = np.random.default_rng(42)
        x = rng.uniform(0.1, 20.0, 50)
        y = rng.uniform(0.1, 20.0, 50)
        got = bessel_dpp_kernel(BesselOrder(0.5), x, y)
        expected = (np.sin(x - y) / (x - y) - np.sin(x + y) / (x + y)) / math.pi
        np.testing.assert_allclose(got, expected, rtol=1e-10)

    @given(
        st.floats(min_value=0.1, max_value=50.0),
        st.floats(min_value=0.1, max_value=50.0),
    )
    @settings(max_examples=40, deadline=None)
    def test_symmetry(self, x, y):
        order = BesselOrder(0.7)
        assert bessel_dpp_kernel(order, x, y) == pytest.approx(
            bessel_dpp_kernel(order, y, x), rel=1e-12, abs=1e-15
        )

    def test_diagonal_blend_is_second_order(self):
        """Off the switch, the ratio form agrees with the midpoint diagonal
        formula to O(eps^2); the switch therefore introduces no visible jump."""
        order = BesselOrder(0.7)
        x = 7.3
        for eps in (1e-2, 1e-3, 1e-4):
            ratio = bessel_dpp_kernel(order, x, x + eps)
            midpoint = dpp_kernel_diagonal(order, x + 0.5 * eps)
            assert abs(ratio - midpoint) < 0.1 * eps**2 + 1e-13
        eps_star = 1e-6 * (1.0 + x)
        below = bessel_dpp_kernel(order, x, x + 0.99 * eps_star)
        above = bessel_dpp_kernel(order, x, x + 1.01 * eps_star)
        assert abs(above - below) < 5e-9


class TestRemainderPrimitive:
    @pytest.mark.parametrize("nu,f0", [(0.0, 0.0), (0.7, 0.35), (-0.3, -0.15)])
    def test_value_at_zero(self, nu, f0):
        """F(0) = nu/2: the total defect integral."""
        assert remainder_primitive(BesselOrder(nu), 0.0) == pytest.approx(f0, abs=1e-8)

    def test_decay_envelope(self):
        """|F(xi)| <= c/(1 + xi) with a modest constant."""
        order = BesselOrder(0.7)
        xi = np.concatenate([np.linspace(0.0, 50.0, 120), np.geomspace(50.0, 2000.0, 60)])
        f = remainder_primitive(order, xi)
        assert np.max(np.abs(f) * (1.0 + xi)) < 1.0

    def test_increments_match_direct_quadrature(self):
        """F(b) - F(a) = int_a^b (K(t,t) - 1/pi) dt, checked against an
        independent oscillation-resolved rule."""
        order = BesselOrder(0.7)
        for a, b in [(0.5, 3.7), (10.0, 31.0), (100.0, 130.0), (400.0, 460.0)]:
            nodes, weights = gauss_panels(
                oscillation_edges(a, b, 2.0, order=16, max_panel=1.0), 16
            )
            direct = np.sum(
                weights * (dpp_kernel_diagonal(order, nodes) - 1.0 / math.pi)
            )
            fa = remainder_primitive(order, a)
            fb = remainder_primitive(order, b)
            assert fb - fa == pytest.approx(direct, abs=1e-9)

    def test_continuity_across_tail_cap(self):
        order = BesselOrder(0.3)
        lo = remainder_primitive(order, 419.999)
        hi = remainder_primitive(order, 420.001)
        assert abs(hi - lo) < 1e-6


class TestTailTrigIntegrals:
    def test_frozen_values(self):
        """mpmath quadosc oracles at 30 digits."""
        c, s = tail_trig_integrals(2.0, 5.0, 3)
        assert c[1, 0] == pytest.approx(0.0072882290326643697, rel=1e-10)
        assert s[0, 0] == pytest.approx(-0.08755126742397743, rel=1e-10)
        c, s = tail_trig_integrals(3.0, 2.0, 3)
        assert s[2, 0] == pytest.approx(0.027711287898153406, rel=1e-10)

    def test_zero_frequency_branch(self):
        c, s = tail_trig_integrals(0.0, 4.0, 4)
        assert s[1, 0] == 0.0 and s[3, 0] == 0.0
        assert c[1, 0] == pytest.approx(1.0 / 4.0, rel=1e-14)
        assert c[3, 0] == pytest.approx(4.0 ** (-3) / 3.0, rel=1e-14)

    def test_sign_symmetry(self):
        """C is even and S is odd in the frequency."""
        c_p, s_p = tail_trig_integrals(np.array([2.5]), 3.0, 3)
        c_m, s_m = tail_trig_integrals(np.array([-2.5]), 3.0, 3)
        np.testing.assert_allclose(c_m, c_p, rtol=1e-14)
        np.testing.assert_allclose(s_m, -s_p, rtol=1e-14)


class TestFormulaAverage:
    def test_cross_term_limit(self):
        """Averaged truncation of the frakJ cross integral converges to
        -sin(2 phi)/(pi (x+y))."""
        order = BesselOrder(0.7)
        got = bessel_formula_average(order, 1.0, 2.0)
        expected = -math.sin(2.0 * order.phase) / (math.pi * 3.0)
        assert got == pytest.approx(expected, abs=1e-5)
