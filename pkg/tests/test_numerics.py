from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cohesilab.errors import (
    DivergentIntegral,
    DomainError,
    NonConvergence,
    NonFinite,
    NoSignChange,
    NotUnimodal,
    OutOfRange,
)
from cohesilab.numerics import (
    Bracket,
    MonotoneInverse,
    find_root_bracketed,
    hyp2f1,
    integrate_regular,
    integrate_sqrt_singular,
    invert_monotone,
    maximize_unimodal,
)


class TestIntegrateRegular:
    def test_linear(self):
        assert integrate_regular(lambda x: x, 0.0, 1.0).value == pytest.approx(0.5, abs=1e-15)

    def test_zero_function(self):
        res = integrate_regular(lambda x: np.zeros_like(x), -3.0, 7.0)
        assert res.value == 0.0

    def test_quarter_circle(self):
        res = integrate_regular(lambda x: np.sqrt(np.maximum(2 * x - x * x, 0.0)), 0.0, 1.0, 1e-12)
        assert res.value == pytest.approx(math.pi / 4, abs=1e-10)

    @pytest.mark.parametrize("degree", range(0, 31, 3))
    def test_polynomials_exact(self, degree):
        res = integrate_regular(lambda x: x**degree, 0.0, 1.0)
        assert res.value == pytest.approx(1.0 / (degree + 1), abs=1e-12)

    def test_non_finite_integrand(self):
        with pytest.raises(NonFinite):
            integrate_regular(lambda x: np.where(x > 0.5, np.nan, x), 0.0, 1.0)

    def test_budget_exhausted(self):
        with pytest.raises(NonConvergence):
            integrate_regular(lambda x: np.sin(1.0 / np.maximum(x, 1e-300)), 0.0, 1.0, 1e-14, max_intervals=10)

    def test_relative_tolerance_applies(self):
        res = integrate_regular(lambda x: 1e9 * np.exp(x), 0.0, 1.0, 1e-30, rtol=1e-13)
        assert res.value == pytest.approx(1e9 * (math.e - 1.0), rel=1e-12)


class TestIntegrateSqrtSingular:
    def test_inverse_root(self):
        res = integrate_sqrt_singular(lambda b: 1.0 / np.sqrt(1.0 - b), 0.0, 1.0, "upper")
        assert res.value == pytest.approx(2.0, abs=1e-12)

    def test_weighted_inverse_root(self):
        res = integrate_sqrt_singular(lambda b: b / np.sqrt(1.0 - b), 0.0, 1.0, "upper")
        assert res.value == pytest.approx(4.0 / 3.0, abs=1e-12)

    def test_log_divergence(self):
        with pytest.raises(DivergentIntegral):
            integrate_sqrt_singular(lambda b: 1.0 / b, 0.0, 1.0, "lower")

    def test_distance_is_passed(self):
        # (1 - x) formed by subtraction would lose the tiny distances near 1
        res = integrate_sqrt_singular(lambda x, d: 1.0 / np.sqrt(d), 0.0, 1.0, "upper", pass_distance=True)
        assert res.value == pytest.approx(2.0, abs=1e-12)

    @pytest.mark.parametrize("end", ["lower", "upper"])
    def test_matches_substitution_against_mpmath(self, end):
        def f(x):
            d = x if end == "lower" else 1.0 - x
            return np.cos(3.0 * x) / np.sqrt(d)

        def fm(x):
            d = x if end == "lower" else 1 - x
            return mpmath.cos(3 * x) / mpmath.sqrt(d)

        with mpmath.workdps(30):
            ref = float(mpmath.quad(fm, [0, 1]))
        assert integrate_sqrt_singular(f, 0.0, 1.0, end, 1e-12).value == pytest.approx(ref, abs=1e-10)

    def test_empty_interval(self):
        assert integrate_sqrt_singular(lambda x: x, 0.3, 0.3).value == 0.0


class TestRoots:
    def test_linear(self):
        assert find_root_bracketed(lambda x: x - 0.5, Bracket(0.0, 1.0)) == pytest.approx(0.5, abs=1e-12)

    def test_sqrt_two(self):
        assert find_root_bracketed(lambda x: x * x - 2.0, Bracket(1.0, 2.0)) == pytest.approx(math.sqrt(2), abs=1e-12)

    def test_cosine(self):
        assert find_root_bracketed(math.cos, Bracket(1.0, 2.0)) == pytest.approx(math.pi / 2, abs=1e-12)

    def test_no_sign_change(self):
        with pytest.raises(NoSignChange):
            find_root_bracketed(lambda x: x * x + 1.0, Bracket(-1.0, 1.0))

    def test_bracket_order(self):
        with pytest.raises(ValueError):
            Bracket(1.0, 0.0)


class TestInversion:
    def test_cube(self):
        assert invert_monotone(lambda x: x**3, 0.027, Bracket(0.0, 1.0)) == pytest.approx(0.3, abs=1e-12)

    def test_out_of_range(self):
        with pytest.raises(OutOfRange):
            invert_monotone(lambda x: x**3, 2.0, Bracket(0.0, 1.0))

    @pytest.mark.parametrize("kind_value", [(1.0, 0.0), (0.0, 1.0)])
    def test_linear_kernel_endpoints(self, fns, kind_value):
        # lambda^{-1} of L1 maps lambda = 1 to alpha = 0 and lambda = 0 to alpha = 1
        lam_value, alpha_expected = kind_value
        model = fns("L1").model
        alpha_of_lam = lambda lam: float(model.meta["alpha_of_lam"](np.array([lam]))[0])
        got = invert_monotone(lambda a: float(model.lam(a)), lam_value, Bracket(0.0, 1.0))
        assert got == pytest.approx(alpha_expected, abs=1e-9)
        assert alpha_of_lam(lam_value) == pytest.approx(alpha_expected, abs=1e-12)

    def test_random_roundtrip(self):
        f = lambda x: np.expm1(2.0 * x) + x
        fp = lambda x: 2.0 * np.exp(2.0 * x) + 1.0
        inv = MonotoneInverse(f, fp, 0.0, 1.0)
        x = np.random.default_rng(7).uniform(0.0, 1.0, 100)
        assert np.max(np.abs(inv(f(x)) - x)) <= 1e-12
        for xi in x[:10]:
            assert invert_monotone(lambda t: float(f(t)), float(f(xi)), Bracket(0.0, 1.0)) == pytest.approx(xi, abs=1e-11)

    def test_tiny_targets_keep_relative_accuracy(self):
        f = lambda x: x**3
        inv = MonotoneInverse(f, lambda x: 3 * x * x, 0.0, 1.0)
        y = np.array([1e-30, 1e-20, 1e-12])
        assert np.allclose(inv(y), np.cbrt(y), rtol=1e-10, atol=0.0)


class TestMaximize:
    def test_parabola(self):
        x, v = maximize_unimodal(lambda x: -((x - 0.3) ** 2), Bracket(0.0, 1.0), 1e-10)
        assert x == pytest.approx(0.3, abs=1e-8)
        assert v == pytest.approx(0.0, abs=1e-15)

    def test_logistic_parabola(self):
        x, v = maximize_unimodal(lambda x: x * (1 - x), Bracket(0.0, 1.0), 1e-10)
        assert x == pytest.approx(0.5, abs=1e-8)
        assert v == pytest.approx(0.25, abs=1e-15)

    def test_two_bumps(self):
        with pytest.raises(NotUnimodal):
            maximize_unimodal(lambda x: math.sin(4 * math.pi * x), Bracket(0.0, 1.0))


class TestHyp2f1:
    def test_origin(self):
        assert hyp2f1(0.3, -1.7, 2.2, 0.0) == 1.0

    def test_log_closed_form(self):
        assert hyp2f1(1.0, 1.0, 2.0, 0.5) == pytest.approx(-math.log(0.5) / 0.5, abs=1e-14)

    def test_against_series(self):
        a, b, c, z = -0.25, 1.0, 0.5, 0.75
        term, total = 1.0, 1.0
        for n in range(10_000):
            term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * z
            total += term
        assert hyp2f1(a, b, c, z) == pytest.approx(total, rel=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            hyp2f1(1.0, 1.0, 2.0, 1.0)
        with pytest.raises(DomainError):
            hyp2f1(1.0, 1.0, -2.0, 0.5)

    @settings(max_examples=60, deadline=None)
    @given(
        a=st.floats(-2.0, 2.0),
        b=st.floats(-2.0, 2.0),
        c=st.floats(0.2, 3.0),
        z=st.floats(0.0, 0.9),
    )
    def test_contiguous_relation(self, a, b, c, z):
        # F(a+1, b; c; z) - F(a, b; c; z) = (b z / c) F(a+1, b+1; c+1; z)
        lhs = c * hyp2f1(a + 1, b, c, z) - c * hyp2f1(a, b, c, z) - b * z * hyp2f1(a + 1, b + 1, c + 1, z)
        scale = max(1.0, abs(c * hyp2f1(a, b, c, z)), abs(b * z * hyp2f1(a + 1, b + 1, c + 1, z)))
        assert abs(lhs) <= 1e-9 * scale
