import math

import numpy as np
import pytest

from unso.errors import ParseError
from unso.rng import uniforms
from unso.scalarpoly import (
    BRule,
    CoefficientSet,
    constraint_point,
    constraint_residual,
    derive_b,
    eval_f,
    eval_f_gradient_wrt_a,
    read_coefficients,
    term,
    term_extreme,
    term_gradient,
    write_coefficients,
)


def random_set(order, rule, seed, scale=2.0):
    a = (uniforms(seed, 0, order - 1) * 2.0 - 1.0) * scale
    return CoefficientSet(order, a, rule)


class TestTerm:
    def test_zeroth_term_is_identity(self):
        assert term(0, 0.7) == 0.7

    def test_vanishes_at_one(self):
        for k in range(1, 15):
            assert term(k, 1.0) == 0.0

    def test_value_at_first_extreme(self):
        x = 1.0 / math.sqrt(3.0)
        assert term(1, x) == pytest.approx(0.3849001794597506, abs=1e-15)

    def test_repeated_squaring_matches_naive_power(self):
        grid = np.linspace(0.0, 1.0, 101)
        for k in range(1, 11):
            naive = grid * (1.0 - grid * grid) ** (2 ** (k - 1))
            fast = term(k, grid)
            denom = np.maximum(np.abs(naive), 1e-300)
            assert np.max(np.abs(fast - naive) / denom) < 1e-12

    def test_interior_maximum_is_unique_peak(self):
        for k in range(1, 15):
            x_star, y_star = term_extreme(k)
            assert term(k, x_star) == pytest.approx(y_star, rel=1e-14)
            assert term(k, x_star - 1e-3) < y_star
            assert term(k, x_star + 1e-3) < y_star


class TestTermExtreme:
    def test_known_locations(self):
        assert term_extreme(1)[0] == pytest.approx(1.0 / math.sqrt(3.0), abs=1e-16)
        assert term_extreme(4)[0] == pytest.approx(1.0 / math.sqrt(17.0), abs=1e-16)

    def test_gradient_vanishes_at_extreme(self):
        for k in range(1, 15):
            x_star, _ = term_extreme(k)
            assert abs(term_gradient(k, x_star)) < 1e-9

    def test_locations_decrease_with_k(self):
        xs = [term_extreme(k)[0] for k in range(1, 15)]
        assert all(a > b for a, b in zip(xs, xs[1:]))


class TestTermGradient:
    def test_zeroth_gradient_is_one(self):
        for x in (0.0, 0.31, 1.0):
            assert term_gradient(0, x) == 1.0

    def test_central_difference(self):
        x, k, h = 0.3, 3, 1e-6
        fd = (term(k, x + h) - term(k, x - h)) / (2 * h)
        assert term_gradient(k, x) == pytest.approx(fd, rel=1e-5)


class TestDeriveB:
    def test_exact_order_one(self):
        cs = CoefficientSet(1, np.zeros(0), BRule.EXACT)
        assert derive_b(cs) == pytest.approx(1.0980762113533158, abs=1e-15)

    def test_approx_sum_order_fourteen_zero_a(self):
        cs = CoefficientSet(14, np.zeros(13), BRule.APPROX_SUM)
        assert derive_b(cs) == pytest.approx(209.3876013789163, abs=1e-12)

    def test_abs_and_sum_agree_for_nonnegative_a(self):
        a = uniforms(3, 0, 13) * 2.0
        assert derive_b(CoefficientSet(14, a, BRule.APPROX_SUM)) == derive_b(
            CoefficientSet(14, a, BRule.APPROX_ABS)
        )

    def test_abs_and_sum_differ_for_mixed_signs(self):
        a = np.array([1.0, -1.0, 0.5])
        assert derive_b(CoefficientSet(4, a, BRule.APPROX_SUM)) != derive_b(
            CoefficientSet(4, a, BRule.APPROX_ABS)
        )

    def test_finite_for_random_vectors(self):
        for seed in range(10):
            for rule in BRule:
                assert math.isfinite(derive_b(random_set(14, rule, seed, scale=10.0)))


class TestEvalF:
    @pytest.mark.parametrize("rule", list(BRule))
    def test_boundary_values(self, rule):
        for seed in range(5):
            cs = random_set(11, rule, seed)
            assert abs(eval_f(cs, 1.0) - 1.0) < 1e-12
            assert abs(eval_f(cs, 0.0)) < 1e-12

    def test_pinned_point_under_exact_rule(self):
        cs = random_set(14, BRule.EXACT, 21)
        x = constraint_point(14)
        assert abs(eval_f(cs, x) - 1.0) < 1e-9

    def test_scalar_and_array_agree(self):
        cs = random_set(8, BRule.EXACT, 2)
        grid = np.linspace(0.0, 1.0, 17)
        arr = eval_f(cs, grid)
        for i, x in enumerate(grid):
            assert arr[i] == eval_f(cs, float(x))


class TestConstraintResidual:
    def test_exact_rule_zeroes_residual(self):
        for seed in range(20):
            for order in (2, 8, 14):
                cs = random_set(order, BRule.EXACT, seed)
                assert abs(constraint_residual(cs)) < 1e-9

    def test_approx_rule_is_close_at_large_order(self):
        cs = CoefficientSet(14, np.zeros(13), BRule.APPROX_SUM)
        assert abs(constraint_residual(cs)) <= 1e-2

    def test_approx_rule_is_coarse_at_small_order(self):
        # independent evaluation of f at the pinned point for order 2
        b = math.exp(0.5) * (2.0 - 1.0)
        x = 1.0 / math.sqrt(5.0)
        expected = x + b * x * (1.0 - x * x) ** 2 - 1.0
        cs = CoefficientSet(2, np.zeros(1), BRule.APPROX_SUM)
        assert constraint_residual(cs) == pytest.approx(expected, abs=1e-15)
        assert abs(expected) > abs(
            constraint_residual(CoefficientSet(14, np.zeros(13), BRule.APPROX_SUM))
        )


class TestGradientWrtA:
    def test_zero_at_x_equal_one(self):
        cs = random_set(9, BRule.APPROX_SUM, 4)
        assert np.all(eval_f_gradient_wrt_a(cs, 1.0) == 0.0)

    def test_approx_sum_closed_form(self):
        cs = random_set(7, BRule.APPROX_SUM, 5)
        x = 0.42
        grad = eval_f_gradient_wrt_a(cs, x)
        for k in range(1, 7):
            assert grad[k - 1] == pytest.approx(term(k, x) - term(7, x), abs=1e-15)

    @pytest.mark.parametrize("rule", list(BRule))
    def test_against_central_differences(self, rule):
        # keep coefficients away from 0 so the abs rule stays differentiable
        a = 0.5 + uniforms(6, 0, 5)
        cs = CoefficientSet(6, a, rule)
        x = 0.2
        grad = eval_f_gradient_wrt_a(cs, x)
        h = 1e-6
        for k in range(5):
            d = np.zeros(5)
            d[k] = h
            fd = (eval_f(cs.with_a(a + d), x) - eval_f(cs.with_a(a - d), x)) / (2 * h)
            assert grad[k] == pytest.approx(fd, rel=1e-5)

    def test_gradient_matches_fd_on_grid(self):
        for rule in (BRule.EXACT, BRule.APPROX_SUM):
            cs = random_set(6, rule, 9)
            grid = np.linspace(0.02, 0.98, 50)
            grad = eval_f_gradient_wrt_a(cs, grid)
            h = 1e-6
            for k in range(5):
                d = np.zeros(5)
                d[k] = h
                fd = (eval_f(cs.with_a(cs.a + d), grid) - eval_f(cs.with_a(cs.a - d), grid)) / (2 * h)
                # atol floor = the central-difference noise scale (eps/h)
                assert np.allclose(grad[k], fd, rtol=1e-5, atol=1e-8)


class TestCoefficientSet:
    def test_rejects_wrong_length(self):
        with pytest.raises(ValueError):
            CoefficientSet(5, np.zeros(3))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            CoefficientSet(3, np.array([1.0, np.nan]))

    def test_rejects_non_positive_order(self):
        with pytest.raises(ValueError):
            CoefficientSet(0, np.zeros(0))

    def test_coefficients_are_immutable(self):
        cs = CoefficientSet(3, np.array([1.0, 2.0]))
        with pytest.raises(ValueError):
            cs.a[0] = 5.0


class TestCoefficientFiles:
    def test_round_trip_bit_exact(self, tmp_path):
        cs = random_set(14, BRule.APPROX_ABS, 13)
        path = tmp_path / "c.txt"
        write_coefficients(path, cs)
        back = read_coefficients(path)
        assert back.order == 14
        assert back.b_rule is BRule.APPROX_ABS
        assert np.array_equal(back.a, cs.a)

    def test_header_carries_order_and_rule(self, tmp_path):
        path = tmp_path / "c.txt"
        write_coefficients(path, CoefficientSet(3, np.array([0.5, 1.5]), BRule.EXACT))
        assert path.read_text().split("\n")[0] == "3 exact"

    @pytest.mark.parametrize(
        "content",
        ["", "14\n", "3 bogus-rule\n1\n2\n", "3 exact\n1\n", "3 exact\n1\nx\n"],
    )
    def test_malformed_files(self, tmp_path, content):
        path = tmp_path / "bad.txt"
        path.write_text(content)
        with pytest.raises(ParseError):
            read_coefficients(path)
