from __future__ import annotations

import math

import numpy as np
import pytest

from cohesilab import model_functions
from cohesilab.catalog import KINDS, REFERENCE_BAR, bilinear_derive, make_model, tsl_closed_form
from cohesilab.identification import (
    NondimensionalLaw,
    admissibility_check,
    constraint_residual,
    framework_constants,
    nondimensional_tsl,
    solve_ks,
)


class TestFrameworkConstants:
    def test_reference_values(self):
        c = framework_constants(REFERENCE_BAR)
        assert c.k == pytest.approx(0.0016, rel=1e-14)
        assert c.K == pytest.approx(720.0, rel=1e-14)
        assert c.failure_s == pytest.approx(0.04, rel=1e-14)
        assert c.eps == pytest.approx(0.0016 * 10.0 / 200.0, rel=1e-14)


class TestNondimensionalLaw:
    def test_linear(self):
        ks = 0.5 / 0.0016
        law = nondimensional_tsl(tsl_closed_form("L12"), ks)
        s = np.linspace(0.0, 2.0 * law.s_bar, 50)
        expected = np.clip(1.0 - ks * s / 0.08, 0.0, None)
        assert np.allclose(law.g0_prime(s), expected, atol=1e-15)

    def test_dugdale(self):
        ks = 0.0016
        law = nondimensional_tsl(tsl_closed_form("D1"), ks)
        s_bar = 0.04 / ks
        assert law.s_bar == pytest.approx(s_bar)
        assert np.all(law.g0_prime(np.linspace(0.0, s_bar, 20)) == 1.0)
        assert np.all(law.g0_prime(np.linspace(1.01 * s_bar, 3 * s_bar, 20)) == 0.0)

    @pytest.mark.parametrize("kind", KINDS)
    def test_unit_initial_slope(self, kind):
        extra = bilinear_derive(0.3, 2.5) if kind == "B" else None
        law = nondimensional_tsl(tsl_closed_form(kind, REFERENCE_BAR, extra), 3.7)
        assert float(law.g0_prime(0.0)) == 1.0

    def test_running_integral(self):
        law = nondimensional_tsl(tsl_closed_form("E"), 625.0)
        s = 1.3e-4
        # sigma_c exp(-sigma_c ks s / Gc) integrated in s
        rate = 3.0 * 625.0 / 0.12
        assert law.g0(s) == pytest.approx((1.0 - math.exp(-rate * s)) / rate, rel=1e-12)

    def test_rejects_nonpositive_factor(self):
        with pytest.raises(ValueError):
            nondimensional_tsl(tsl_closed_form("E"), 0.0)


class TestSolveKs:
    @pytest.mark.parametrize("kind", ["L1", "L2", "L12"])
    def test_linear_family(self, kind):
        assert solve_ks(kind) * 0.0016 == pytest.approx(0.5, rel=1e-8)

    @pytest.mark.parametrize("kind", ["E", "H2"])
    def test_unit_product(self, kind):
        assert abs(solve_ks(kind) * 0.0016 - 1.0) <= 1e-6

    def test_hyperbolic(self):
        assert solve_ks("H1") * 0.0016 == pytest.approx(2.0 * math.log(2.0) - 1.0, rel=1e-6)

    @pytest.mark.parametrize("kind", ["D1", "D2"])
    def test_dugdale_equals_k(self, kind):
        assert solve_ks(kind) == pytest.approx(0.0016, rel=1e-12)

    def test_bilinear_area_consistent_value(self):
        # with Gc_I = Gc / gamma the opening scale is fixed by the tail slope
        kks = solve_ks("B", REFERENCE_BAR, bilinear_derive(0.3, 2.5)) * 0.0016
        assert kks == pytest.approx(1.25, rel=1e-6)

    @pytest.mark.parametrize("kind", KINDS)
    def test_constraint_satisfied(self, kind):
        extra = bilinear_derive(0.3, 2.5) if kind == "B" else None
        assert abs(constraint_residual(make_model(kind, REFERENCE_BAR, extra), REFERENCE_BAR)) <= 1e-10


class TestReconstruction:
    def test_pristine_degradation(self):
        assert model_functions("L12").g_ell(0.0) == pytest.approx(1.0, abs=1e-15)

    def test_full_crack_degradation(self):
        fns = model_functions("D2")
        assert fns.g_ell(1.0) == 0.0
        assert fns.g_ell(1.0 - 1e-9) < 1e-6

    @pytest.mark.parametrize("kind", KINDS)
    def test_psi_free_of_internal_length(self, kind):
        a = np.linspace(0.01, 0.99, 99)
        ref = model_functions(kind).psi(a)
        for ell in (5.0, 1.0):
            other = model_functions(kind, REFERENCE_BAR.with_ell(ell))
            assert np.allclose(other.psi(a), ref, rtol=1e-14)
            assert np.allclose(ell * other.phi(a), ref, rtol=1e-13)

    @pytest.mark.parametrize("kind", KINDS)
    def test_degradation_decreasing(self, kind):
        g = model_functions(kind).g_ell(np.linspace(0.0, 1.0, 401))
        assert np.all(np.diff(g) <= 0)

    @pytest.mark.parametrize("kind", ["L12", "E", "D1"])
    def test_degradation_slope(self, kind):
        fns = model_functions(kind)
        a = np.linspace(0.1, 0.9, 9)
        h = 1e-6
        fd = (fns.g_ell(a + h) - fns.g_ell(a - h)) / (2 * h)
        assert np.allclose(fns.g_ell_prime(a), fd, rtol=1e-5, atol=1e-10)


class TestAdmissibility:
    def test_linear_law_passes(self):
        rep = admissibility_check(nondimensional_tsl(tsl_closed_form("L12"), 312.5))
        assert rep.passed
        assert rep["auxiliary_convexity"] is None

    def test_dugdale_strict_decrease_fails(self):
        rep = admissibility_check(nondimensional_tsl(tsl_closed_form("D1"), 0.0016))
        assert rep["concave"]
        assert not rep["strict_slope_decrease"]
        assert not rep.passed

    def test_convex_increasing_slope_fails_monotone(self):
        law = NondimensionalLaw(
            g0_prime=lambda s: 1.0 - 2.0 * np.asarray(s) + np.asarray(s) ** 2 * 0.5,
            g0=lambda s: s,
            ks=1.0,
            s_bar=3.0,
        )
        rep = admissibility_check(law)
        assert not rep["monotone"]
        assert not rep.passed

    def test_heavy_tail_is_unbounded(self):
        law = NondimensionalLaw(lambda s: 1.0 / (1.0 + np.asarray(s)), np.log1p, 1.0, np.inf)
        assert not admissibility_check(law)["bounded"]

    @pytest.mark.parametrize("kind", ["E", "H1", "H2"])
    def test_smooth_laws_pass(self, kind):
        rep = admissibility_check(nondimensional_tsl(tsl_closed_form(kind), solve_ks(kind)))
        assert rep.passed
