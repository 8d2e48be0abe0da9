"""Tests for kernel evaluation: the projection/convolution/reflection
kernels, the seven-piece difference decomposition against direct
subtraction, and the trace-norm bound evaluators against SVD oracles."""

import math

import numpy as np
import pytest

from besseldet.fredholm import build_grid
from besseldet.kernels import (
    DivergenceError,
    KernelKind,
    bessel_envelope_tail,
    corridor_coefficient,
    corridor_trace_bound,
    decomposition_matrices,
    difference_decomposition,
    difference_matrix,
    difference_trace_bounds,
    envelope_tail_profile,
    inverse_envelope_tail,
    kernel_eval,
    kernel_matrix,
    separable_trace_bound,
)
from besseldet.special import BesselOrder, ResolutionError, asymptotic_coeffs
from besseldet.symbols import (
    FunctionSymbol,
    SymbolSpec,
    cosine_transform,
    exp_symbol,
    sobolev_seminorm,
)

GAUSS = SymbolSpec("gaussian", 1.0, 1.0)
FAMILIES = (
    SymbolSpec("gaussian", 0.6),
    SymbolSpec("exp_decay", 0.5, 2.0),
    SymbolSpec("rational", 0.8, 1.5, k=3),
    SymbolSpec("smooth_bump", 1.0, 2.0),
)
ORDERS = (0.0, 0.7, 0.5, -0.5)


def pure_exponential() -> FunctionSymbol:
    """b(x) = e^{-x}: the one test symbol with b'(0) != 0."""
    return FunctionSymbol(
        value_fn=lambda t: np.exp(-t),
        d1=lambda t: -np.exp(-t),
        d2=lambda t: np.exp(-t),
        d3=lambda t: -np.exp(-t),
        radius=36.0,
        label="exp",
    )


def direct_difference(sym, order, x, y):
    """Independent route: projection quadrature minus the convolution hat."""
    bessel = kernel_eval(KernelKind("bessel", sym, order), x, y)
    return bessel - cosine_transform(sym, abs(x - y))


def nuclear_norm(matrix, weights):
    sw = np.sqrt(weights)
    return float(
        np.sum(np.linalg.svd(sw[:, None] * matrix * sw[None, :], compute_uv=False))
    )


class TestKernelKind:
    def test_rejects_unknown_tag(self):
        with pytest.raises(ValueError, match="tag"):
            KernelKind("toeplitz", GAUSS)

    def test_order_required_for_projection_kinds(self):
        for tag in ("bessel", "difference"):
            with pytest.raises(ValueError, match="order"):
                KernelKind(tag, GAUSS)

    def test_piece_label_rules(self):
        with pytest.raises(ValueError, match="piece"):
            KernelKind("decomposition_piece", GAUSS, BesselOrder(0.0))
        with pytest.raises(ValueError, match="piece"):
            KernelKind("wiener_hopf", GAUSS, piece="S")
        KernelKind("decomposition_piece", GAUSS, BesselOrder(0.0), piece="S")

    def test_difference_probes_smoothness(self):
        bad = FunctionSymbol(
            value_fn=lambda t: np.exp(-t),
            d1=lambda t: -np.exp(-t),
            d2=lambda t: np.exp(-t),
            d3=lambda t: np.full_like(np.asarray(t, dtype=float), np.nan),
            radius=30.0,
        )
        with pytest.raises(ValueError, match="derivative"):
            KernelKind("difference", bad, BesselOrder(0.0))


class TestPointwiseKernels:
    def test_convolution_kernel_at_zero_offset(self):
        """hat(0) of b = e^{-x} is 1/pi."""
        kind = KernelKind("wiener_hopf", pure_exponential())
        assert kernel_eval(kind, 2.5, 2.5) == pytest.approx(1.0 / math.pi, rel=1e-10)

    def test_convolution_and_reflection_consistency(self):
        wh = KernelKind("wiener_hopf", GAUSS)
        hk = KernelKind("hankel", GAUSS)
        assert kernel_eval(wh, 1.3, 3.1) == pytest.approx(
            cosine_transform(GAUSS, 1.8), rel=1e-12
        )
        assert kernel_eval(hk, 1.3, 3.1) == pytest.approx(
            cosine_transform(GAUSS, 4.4), rel=1e-12
        )

    def test_projection_kernel_half_integer_split(self):
        """At nu = +-1/2 the projection kernel is hat(x-y) -+ hat(x+y)."""
        x, y = 1.1, 2.4
        for nu, sgn in ((0.5, -1.0), (-0.5, 1.0)):
            kind = KernelKind("bessel", GAUSS, BesselOrder(nu))
            expected = cosine_transform(GAUSS, abs(x - y)) + sgn * cosine_transform(
                GAUSS, x + y
            )
            assert kernel_eval(kind, x, y) == pytest.approx(expected, abs=1e-9)

    def test_projection_kernel_symmetric(self):
        kind = KernelKind("bessel", GAUSS, BesselOrder(0.7))
        assert kernel_eval(kind, 2.0, 5.0) == pytest.approx(
            kernel_eval(kind, 5.0, 2.0), rel=1e-13
        )

    def test_rejects_nonpositive_points(self):
        kind = KernelKind("wiener_hopf", GAUSS)
        with pytest.raises(ValueError):
            kernel_eval(kind, 0.0, 1.0)


class TestDecomposition:
    def test_assembly_matches_direct_subtraction(self):
        """Assembled pieces vs the direct route at (2, 3), b = e^{-x^2}."""
        order = BesselOrder(0.0)
        rec = difference_decomposition(GAUSS, order, 2.0, 3.0)
        direct = direct_difference(GAUSS, order, 2.0, 3.0)
        assert rec.assembled == pytest.approx(direct, abs=1e-7)

    def test_assembly_with_nonzero_first_derivative(self):
        """b = e^{-x} exercises the b'(0) terms of the profile and Ztilde."""
        sym = pure_exponential()
        order = BesselOrder(0.7)
        rec = difference_decomposition(sym, order, 1.3, 2.1)
        assert rec.assembled == pytest.approx(
            direct_difference(sym, order, 1.3, 2.1), abs=1e-7
        )

    def test_half_integer_closed_form(self):
        """R_b(x, y) = -+ hat(x+y) at nu = +-1/2."""
        for nu, sgn in ((0.5, -1.0), (-0.5, 1.0)):
            kind = KernelKind("difference", GAUSS, BesselOrder(nu))
            assert kernel_eval(kind, 1.3, 2.2) == pytest.approx(
                sgn * cosine_transform(GAUSS, 3.5), abs=1e-8
            )

    def test_half_integer_pieces_vanish_identically(self):
        rec = difference_decomposition(GAUSS, BesselOrder(0.5), 3.0, 4.0)
        assert (rec.S, rec.T0_xy, rec.T0_yx, rec.T1_xy, rec.T1_yx, rec.Ztilde) == (
            0.0,
        ) * 6
        assert rec.R1 != 0.0

    def test_constant_shift_invariance(self):
        """Adding a complex constant to the symbol leaves every piece alone."""
        g = lambda t: np.exp(-(t**2))
        shifted = FunctionSymbol(
            value_fn=lambda t: g(t) + (0.3 + 0.4j),
            d1=lambda t: -2.0 * t * g(t),
            d2=lambda t: (4.0 * t**2 - 2.0) * g(t),
            d3=lambda t: (12.0 * t - 8.0 * t**3) * g(t),
            radius=10.0,
        )
        order = BesselOrder(0.7)
        rec_shift = difference_decomposition(shifted, order, 1.7, 2.9)
        rec_plain = difference_decomposition(GAUSS, order, 1.7, 2.9)
        assert isinstance(rec_shift.assembled, float)
        for name in ("R1", "S", "T0_xy", "T0_yx", "T1_xy", "T1_yx", "Ztilde"):
            assert getattr(rec_shift, name) == pytest.approx(
                getattr(rec_plain, name), abs=1e-12
            )

    def test_constant_symbol_gives_zero(self):
        zero = lambda t: np.zeros_like(np.asarray(t, dtype=float))
        const = FunctionSymbol(lambda t: 0.3 + zero(t), zero, zero, zero, 5.0)
        rec = difference_decomposition(const, BesselOrder(0.7), 1.0, 2.0)
        assert rec.assembled == 0.0
        assert rec.R1 == 0.0 and rec.S == 0.0 and rec.Ztilde == 0.0

    def test_pointwise_symmetry(self):
        kind = KernelKind("difference", GAUSS, BesselOrder(0.7))
        assert kernel_eval(kind, 2.0, 5.0) == pytest.approx(
            kernel_eval(kind, 5.0, 2.0), abs=1e-13
        )

    def test_piece_dispatch_matches_record(self):
        order = BesselOrder(0.3)
        rec = difference_decomposition(GAUSS, order, 2.0, 3.0)
        for label, value in (
            ("R1", rec.R1),
            ("S", rec.S),
            ("T0", rec.T0_xy),
            ("T1", rec.T1_xy),
            ("Ztilde", rec.Ztilde),
        ):
            kind = KernelKind("decomposition_piece", GAUSS, order, piece=label)
            assert kernel_eval(kind, 2.0, 3.0) == pytest.approx(value, rel=1e-12)

    def test_random_pairs_all_families_and_orders(self):
        """Assembly equals direct subtraction within 1e-7 across the box."""
        rng = np.random.default_rng(42)
        pairs = rng.uniform(0.1, 20.0, size=(50, 2))
        for sym in FAMILIES:
            for nu in ORDERS:
                order = BesselOrder(nu)
                for x, y in pairs:
                    rec = difference_decomposition(sym, order, x, y)
                    assert rec.assembled == pytest.approx(
                        direct_difference(sym, order, x, y), abs=1e-7
                    ), f"{sym.family} nu={nu} (x,y)=({x:.4f},{y:.4f})"

    def test_matrix_route_matches_pointwise(self):
        nodes = np.array([1.5, 4.0, 9.5])
        order = BesselOrder(0.7)
        mat = difference_matrix(GAUSS, order, nodes)
        kind = KernelKind("difference", GAUSS, order)
        for i, x in enumerate(nodes):
            for j, y in enumerate(nodes):
                assert mat[i, j] == pytest.approx(kernel_eval(kind, x, y), abs=1e-9)

    def test_matrix_hermitian_for_real_symbol(self):
        grid = build_grid(2.0, 12.0, 8, 6)
        mat = difference_matrix(GAUSS, BesselOrder(0.7), grid.nodes)
        assert np.max(np.abs(mat - mat.T)) < 1e-12

    def test_extreme_aspect_ratio_raises(self):
        kind = KernelKind("difference", GAUSS, BesselOrder(0.0))
        with pytest.raises(ResolutionError, match="panels"):
            kernel_eval(kind, 0.001, 20.0)

    def test_kernel_matrix_piece_dispatch(self):
        nodes = np.array([2.0, 3.0])
        order = BesselOrder(0.3)
        kind = KernelKind("decomposition_piece", GAUSS, order, piece="T0")
        mat = kernel_matrix(kind, nodes)
        expected = decomposition_matrices(GAUSS, order, nodes)["T0_xy"]
        np.testing.assert_allclose(mat, expected, rtol=1e-12)


class TestTraceBounds:
    def test_envelope_tail_profile_integral(self):
        """2 G(X) equals the exact tail integral of 1/(u (1+sqrt u)^2)."""
        for x0 in (0.1, 1.0, 25.0):
            u = np.geomspace(x0, x0 * 1e8, 400_001)
            numeric = np.trapezoid(1.0 / (u * (1.0 + np.sqrt(u)) ** 2), u)
            assert 2.0 * envelope_tail_profile(x0) == pytest.approx(
                numeric, rel=1e-6
            )

    def test_zero_weight_gives_zero(self):
        bound = separable_trace_bound(
            inverse_envelope_tail(),
            inverse_envelope_tail(),
            lambda t: np.zeros_like(np.asarray(t, dtype=float)),
            4.0,
            support=10.0,
        )
        assert bound == 0.0

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_divergent_weight_reported(self):
        with pytest.raises(DivergenceError):
            separable_trace_bound(
                inverse_envelope_tail(),
                inverse_envelope_tail(),
                lambda t: np.exp(0.1 * np.asarray(t, dtype=float)),
                4.0,
                support=2.0,
            )

    def test_corridor_zero_amplitude(self):
        assert corridor_trace_bound(0.0, 7.0) == 0.0

    def test_corridor_quarter_radius_scaling(self):
        """Quadrupling R halves the sqrt term exactly."""
        a, r = 1.7, 9.0
        c = 3.0 * math.sqrt(3.0)
        sqrt_term = corridor_trace_bound(a, 4.0 * r) - a * c / (4.0 * r)
        assert sqrt_term == pytest.approx(
            0.5 * (corridor_trace_bound(a, r) - a * c / r), rel=1e-13
        )

    def test_per_piece_bounds_dominate_svd_oracle(self):
        """Every piece bound, and their total against the assembled kernel,
        dominates the nuclear norm measured on [R, R+40]."""
        sym = exp_symbol(GAUSS, sign=-1.0)
        order = BesselOrder(0.0)
        for radius in (1.0, 4.0, 16.0, 64.0):
            grid = build_grid(radius, radius + 40.0, 40, 8)
            pieces = decomposition_matrices(sym, order, grid.nodes)
            bounds = difference_trace_bounds(sym, order, radius)
            assert nuclear_norm(pieces["S"], grid.weights) <= bounds.S
            assert nuclear_norm(pieces["T0_xy"], grid.weights) <= bounds.T0
            assert nuclear_norm(pieces["T1_xy"], grid.weights) <= bounds.T1
            assert nuclear_norm(pieces["Ztilde"], grid.weights) <= bounds.Ztilde
            assert nuclear_norm(pieces["R1"], grid.weights) <= bounds.R1
            assembled = difference_matrix(sym, order, grid.nodes)
            assert nuclear_norm(assembled, grid.weights) <= bounds.total

    def test_corridor_bound_on_profile_piece(self):
        """Direct-symbol profile piece against the corridor evaluator."""
        order = BesselOrder(0.0)
        a_const = corridor_coefficient(GAUSS, order)
        for radius in (4.0, 16.0, 64.0):
            grid = build_grid(radius, radius + 40.0, 40, 8)
            piece = decomposition_matrices(GAUSS, order, grid.nodes)["R1"]
            assert nuclear_norm(piece, grid.weights) <= corridor_trace_bound(
                a_const, radius
            )

    def test_separable_chain_inequality(self):
        """The evaluated S bound sits below its closed-form chain value
        4 sqrt(2 pi) C^2 |f|_{H1} / sqrt(R)."""
        sym = exp_symbol(GAUSS, sign=-1.0)
        order = BesselOrder(0.0)
        c_env = asymptotic_coeffs(order).c_envelope
        h1 = sobolev_seminorm(sym, 1)
        for radius in (1.0, 4.0, 16.0):
            bounds = difference_trace_bounds(sym, order, radius)
            chain = 4.0 * math.sqrt(2.0 * math.pi) * c_env**2 * h1 / math.sqrt(radius)
            assert bounds.S <= chain

    def test_half_integer_bounds_collapse_to_profile(self):
        bounds = difference_trace_bounds(GAUSS, BesselOrder(0.5), 4.0)
        assert bounds.S == bounds.T0 == bounds.T1 == bounds.Ztilde == 0.0
        assert bounds.R1 > 0.0
        assert bounds.total == bounds.R1

    def test_envelope_constants_certify_factors(self):
        """The fitted envelope constants really dominate the factors the
        separable bound assumes they dominate."""
        order = BesselOrder(0.7)
        ac = asymptotic_coeffs(order)
        from besseldet.special import oscillatory_parts, osc_remainder_reduced

        u = np.geomspace(1e-2, 400.0, 20_000)
        _, frak_d, _ = oscillatory_parts(order, u)
        assert np.all(
            np.abs(frak_d) <= ac.c_envelope / (np.sqrt(u) * (1.0 + np.sqrt(u)))
        )
        etilde = osc_remainder_reduced(order, u)
        assert np.all(
            np.abs(u * etilde)
            <= ac.c_envelope_der / (np.sqrt(u) * (1.0 + np.sqrt(u)))
        )
