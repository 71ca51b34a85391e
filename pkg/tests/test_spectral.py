from __future__ import annotations

import math

import numpy as np
import pytest

from fkdv.branch.bifurcation import asymptotic_branch, bifurcation_point
from fkdv.errors import BaseMismatchError, GridMismatchError
from fkdv.kernel import build_kernel_table, kernel_series_tail_bound
from fkdv.models import CosineSeries, MultiplierSymbol, SteadyState
from fkdv.spectral import (
    apply_L,
    apply_L_quadrature,
    derivative_on_grid,
    eval_derivative,
    eval_series,
    from_grid,
    half_period_grid,
    holder_proxy,
    jacobian_matrix,
    multiply,
    quadrature_error_bound,
    quadrature_grid,
    rebase,
    residual,
    residual_norm,
    resize,
    rewritten_form_gap,
    shift_half_period,
    sup_norm,
    to_grid,
)

ALPHA_TWO = MultiplierSymbol(2.0)


def _make_series(modes: int, k: int = 1, seed: int = 0, decay: float = 0.6) -> CosineSeries:
    """Random smooth even series with geometrically decaying coefficients."""
    rng = np.random.default_rng(seed)
    coeffs = rng.standard_normal(modes + 1) * decay ** np.arange(modes + 1)
    return CosineSeries(k, coeffs)


def _cos(j: int, modes: int, k: int = 1, amplitude: float = 1.0) -> CosineSeries:
    coeffs = np.zeros(modes + 1)
    coeffs[j] = amplitude
    return CosineSeries(k, coeffs)


class TestEvaluation:
    def test_zero_series(self):
        assert np.all(eval_series(CosineSeries.zeros(1, 5), np.linspace(-3, 3, 7)) == 0)

    def test_single_cosine_at_origin(self):
        assert eval_series(_cos(1, 1), 0.0) == 1.0

    def test_periodic_in_base_period(self):
        phi = _make_series(12, k=3)
        x = np.linspace(-1, 1, 9)
        assert np.allclose(eval_series(phi, x), eval_series(phi, x + 2 * math.pi / 3), atol=1e-13)

    def test_even(self):
        phi = _make_series(10)
        x = np.linspace(0.1, 2.9, 11)
        assert np.allclose(eval_series(phi, x), eval_series(phi, -x), rtol=0, atol=1e-14)

    def test_grid_transform_matches_direct_sum(self):
        phi = _make_series(16, k=2)
        values = to_grid(phi, 32)
        assert np.allclose(values, eval_series(phi, half_period_grid(2, 32)), atol=1e-13)

    def test_grid_transform_inverts(self):
        phi = _make_series(16)
        back = from_grid(to_grid(phi, 40), 1, 16)
        assert np.allclose(back.coeffs, phi.coeffs, atol=1e-14)

    def test_grid_too_coarse(self):
        with pytest.raises(GridMismatchError):
            to_grid(_make_series(16), 8)

    def test_derivatives(self):
        # phi = cos 2x: phi' = -2 sin 2x, phi'' = -4 cos 2x
        phi = _cos(2, 4)
        x = 0.3
        assert eval_derivative(phi, x) == pytest.approx(-2 * math.sin(2 * x), abs=1e-14)
        assert eval_derivative(phi, x, order=2) == pytest.approx(-4 * math.cos(2 * x), abs=1e-14)

    def test_derivative_on_grid_matches_pointwise(self):
        phi = _make_series(12, k=2)
        grid = half_period_grid(2, 48)
        assert np.allclose(derivative_on_grid(phi, 48), eval_derivative(phi, grid), atol=1e-12)

    def test_sup_norm(self):
        # a_0/2 = 0.5, plus cos x: max at 0 is 1.5
        assert sup_norm(CosineSeries(1, [1.0, 1.0])) == pytest.approx(1.5)


class TestSeriesOperations:
    def test_base_mismatch(self):
        with pytest.raises(BaseMismatchError):
            multiply(_make_series(4, k=1), _make_series(4, k=2))
        with pytest.raises(BaseMismatchError):
            _make_series(4, k=1) + _make_series(4, k=2)

    def test_shift_half_period(self):
        phi = _make_series(9, k=2)
        shifted = shift_half_period(phi)
        x = np.linspace(0, 1, 5)
        assert np.allclose(eval_series(shifted, x), eval_series(phi, x + math.pi / 2), atol=1e-13)

    def test_rebase_preserves_values(self):
        phi = _make_series(8, k=3)
        coarse = rebase(phi, 1)
        assert coarse.base_wavenumber == 1
        assert coarse.modes == 24
        x = np.linspace(-2, 2, 13)
        assert np.allclose(eval_series(coarse, x), eval_series(phi, x), atol=1e-13)
        with pytest.raises(BaseMismatchError):
            rebase(phi, 2)

    def test_resize(self):
        phi = _make_series(6)
        assert np.array_equal(resize(resize(phi, 10), 6).coeffs, phi.coeffs)
        assert resize(phi, 3).modes == 3

    def test_holder_proxy(self):
        # 1^1.5 * 1 + 2^1.5 * 0.5
        phi = CosineSeries(1, [7.0, 1.0, -0.5])
        assert holder_proxy(phi, 1.5) == pytest.approx(1 + 0.5 * 2 ** 1.5)


class TestApplyL:
    def test_constant_is_fixed(self):
        c = CosineSeries.constant(0.7, 1, 4)
        assert np.array_equal(apply_L(c, ALPHA_TWO).coeffs, c.coeffs)

    def test_eigenfunction(self):
        # m(2) = 1/5 for alpha=2
        assert apply_L(_cos(2, 3), ALPHA_TWO).coeffs[2] == pytest.approx(0.2)

    def test_linear(self):
        phi, psi = _make_series(8, seed=1), _make_series(8, seed=2)
        lhs = apply_L(2.0 * phi + (-3.0) * psi, ALPHA_TWO)
        rhs = 2.0 * apply_L(phi, ALPHA_TWO) - 3.0 * apply_L(psi, ALPHA_TWO)
        assert np.allclose(lhs.coeffs, rhs.coeffs, atol=1e-14)

    def test_contraction_on_nonconstant_part(self):
        phi = _make_series(8, k=2)
        out = apply_L(phi, ALPHA_TWO)
        assert np.all(np.abs(out.coeffs[1:]) <= ALPHA_TWO(2) * np.abs(phi.coeffs[1:]) + 1e-16)


class TestMultiply:
    def test_product_to_sum(self):
        # cos^2 x = 1/2 + cos(2x)/2, i.e. a_0 = 1, a_2 = 1/2
        product = multiply(_cos(1, 2), _cos(1, 2))
        assert np.allclose(product.coeffs, [1.0, 0.0, 0.5], atol=1e-15)

    def test_constant_two_doubles(self):
        phi = _make_series(6)
        product = multiply(CosineSeries.constant(2.0, 1, 6), phi)
        assert np.allclose(product.coeffs, 2 * phi.coeffs, atol=1e-14)

    def test_alias_free(self):
        phi, psi = _make_series(10, seed=3), _make_series(10, seed=4)
        full = multiply(phi, psi, modes=20)
        grid = half_period_grid(1, 40)
        expected = eval_series(phi, grid) * eval_series(psi, grid)
        assert np.max(np.abs(eval_series(full, grid) - expected)) <= 1e-12


class TestResidual:
    def test_trivial_state(self):
        state = SteadyState(CosineSeries.zeros(1, 8), 0.37)
        assert np.all(residual(state, ALPHA_TWO).coeffs == 0)

    def test_constant_solution(self):
        # L c = c, so F(c, mu) = c (mu - 1 - c/2) vanishes at c = 2(mu - 1)
        rng = np.random.default_rng(11)
        for mu in rng.uniform(0, 1, 20):
            state = SteadyState(CosineSeries.constant(2 * (mu - 1), 1, 8), mu)
            assert residual_norm(state, MultiplierSymbol(1.5)) <= 1e-13

    def test_matches_pointwise_formula(self):
        phi = _make_series(8, seed=5)
        state = SteadyState(phi, 0.8)
        f = residual(state, ALPHA_TWO, modes=16)
        grid = half_period_grid(1, 32)
        values = eval_series(phi, grid)
        l_phi = eval_series(apply_L(phi, ALPHA_TWO), grid)
        expected = 0.8 * values - l_phi - 0.5 * values ** 2
        assert np.allclose(to_grid(f, 32), expected, atol=1e-12)

    def test_rewritten_form_is_negative_residual(self):
        for seed in range(5):
            state = SteadyState(_make_series(8, seed=seed), 0.3 + 0.1 * seed)
            full = residual(state, ALPHA_TWO, modes=16)
            gap = rewritten_form_gap(state, ALPHA_TWO, 32)
            assert np.allclose(gap, -to_grid(full, 32), atol=1e-12)

    def test_asymptotic_residual_is_third_order(self):
        r1 = residual_norm(asymptotic_branch(ALPHA_TWO, 1, 0.02, modes=8), ALPHA_TWO)
        r2 = residual_norm(asymptotic_branch(ALPHA_TWO, 1, 0.01, modes=8), ALPHA_TWO)
        assert r1 / r2 == pytest.approx(8.0, rel=0.2)


class TestJacobian:
    def test_trivial_state_is_diagonal(self):
        state = SteadyState(CosineSeries.zeros(2, 10), 0.3)
        jac = jacobian_matrix(state, ALPHA_TWO)
        expected = 0.3 - ALPHA_TWO(2 * np.arange(11))
        assert np.array_equal(jac, np.diag(expected))

    def test_matches_finite_difference(self):
        state = SteadyState(_make_series(12, seed=7), 0.6)
        v = _make_series(12, seed=8)
        h = 1e-6
        plus = residual(SteadyState(state.phi + h * v, state.mu), ALPHA_TWO)
        minus = residual(SteadyState(state.phi - h * v, state.mu), ALPHA_TWO)
        fd = (plus.coeffs - minus.coeffs) / (2 * h)
        assert np.allclose(jacobian_matrix(state, ALPHA_TWO) @ v.coeffs, fd, atol=1e-8)

    @pytest.mark.parametrize("alpha", [1.1, 1.5, 2.0, 3.0, 5.0])
    def test_trivial_speeds_are_bifurcation_points(self, alpha):
        symbol = MultiplierSymbol(alpha)
        for k in (1, 2, 3, 5, 8):
            jac = jacobian_matrix(SteadyState(CosineSeries.zeros(1, 8 * k), 0.0), symbol)
            # With mu = 0 the diagonal is -m(j), so entry k is -mu_k*
            speed = -np.diag(jac)[k]
            assert abs(speed - bifurcation_point(symbol, k)) <= 1e-12 * bifurcation_point(symbol, k)

    def test_one_dimensional_kernel_at_bifurcation(self):
        mu_star = bifurcation_point(ALPHA_TWO, 1)
        jac = jacobian_matrix(SteadyState(CosineSeries.zeros(1, 6), mu_star), ALPHA_TWO)
        assert np.linalg.matrix_rank(jac) == 6
        assert np.allclose(jac[:, 1], 0)


class TestQuadratureOracle:
    @pytest.mark.parametrize("alpha", [1.5, 2.0, 3.0])
    def test_agrees_with_spectral_operator(self, alpha):
        symbol = MultiplierSymbol(alpha)
        table = build_kernel_table(symbol, 64, 4096)
        x = quadrature_grid(128)
        rng = np.random.default_rng(int(alpha * 10))
        for _ in range(20):
            coeffs = rng.standard_normal(17) * 0.7 ** np.arange(17)
            phi = CosineSeries(1, coeffs)
            l1 = abs(coeffs[0]) / 2 + np.sum(np.abs(coeffs[1:]))
            bound = quadrature_error_bound(symbol, 128, 16, l1, 4096)
            err = np.max(np.abs(apply_L_quadrature(eval_series(phi, x), table) - eval_series(apply_L(phi, symbol), x)))
            assert err <= bound + kernel_series_tail_bound(symbol, 4096) + 1e-12

    def test_constant_maps_to_constant(self):
        table = build_kernel_table(ALPHA_TWO, 64, 4096)
        out = apply_L_quadrature(np.ones(128), table)
        assert np.allclose(out, 1.0, atol=1e-3)

    def test_grid_mismatch(self):
        table = build_kernel_table(ALPHA_TWO, 32, 256)
        with pytest.raises(GridMismatchError):
            apply_L_quadrature(np.ones(100), table)

    def test_odd_input_gives_odd_output(self):
        table = build_kernel_table(ALPHA_TWO, 64, 2048)
        x = quadrature_grid(128)
        out = apply_L_quadrature(np.sin(x) + 0.3 * np.sin(3 * x), table)
        # x_(M-i) = -x_i on this grid
        assert np.allclose(out[1:], -out[1:][::-1], atol=1e-13)

    def test_order_preserving_for_odd_functions(self):
        # f - g = sin x (0.8 - 0.4 sin^2 x) >= 0 on [0, pi]
        table = build_kernel_table(ALPHA_TWO, 64, 2048)
        x = quadrature_grid(128)
        f = np.sin(x)
        g = 0.5 * np.sin(x) - 0.1 * np.sin(3 * x)
        diff = apply_L_quadrature(f, table) - apply_L_quadrature(g, table)
        interior = (x > 0) & (x < math.pi)
        assert np.all(diff[interior] > 0)
