from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest

from cohesilab.catalog import (
    DUGDALE_KINDS,
    KINDS,
    REFERENCE_BAR,
    arc_g,
    arc_q,
    bilinear_derive,
    make_model,
    normalization_cw,
    tsl_closed_form,
)
from cohesilab.errors import InvalidRatio, MissingBilinearParams, UnknownKind


def _model(kind):
    extra = bilinear_derive(0.3, 2.5) if kind == "B" else None
    return make_model(kind, REFERENCE_BAR, extra)


class TestDissipation:
    def test_l12_full_crack(self):
        assert float(make_model("L12").w(1.0)) == pytest.approx(1.0 / math.pi**2, rel=1e-14)

    def test_l1_full_crack(self):
        assert float(make_model("L1").w(1.0)) == pytest.approx(9.0 / 64.0, rel=1e-14)

    def test_exponential_vanishes_at_origin(self):
        assert float(make_model("E").w(0.0)) == 0.0

    @pytest.mark.parametrize("kind", KINDS)
    def test_w_increasing(self, kind):
        a = np.linspace(0.0, 1.0, 501)
        assert np.all(np.diff(_model(kind).w(a)) >= 0)

    @pytest.mark.parametrize("kind", KINDS)
    def test_derivative_matches_difference(self, kind):
        m = _model(kind)
        a = np.linspace(0.05, 0.95, 19)
        h = 1e-6
        left = (m.w(a) - m.w(a - h)) / h
        right = (m.w(a + h) - m.w(a)) / h
        # the bilinear dissipation has a slope jump at the kink; compare only smooth points
        smooth = np.isclose(left, right, rtol=1e-3, atol=1e-9)
        assert smooth.sum() >= 17
        fd = (m.w(a + h) - m.w(a - h)) / (2 * h)
        assert np.allclose(m.w_prime(a)[smooth], fd[smooth], rtol=1e-5, atol=1e-9)


class TestKernel:
    @pytest.mark.parametrize("kind", KINDS)
    def test_endpoints(self, kind):
        m = _model(kind)
        assert float(m.lam(0.0)) == pytest.approx(1.0, abs=1e-14)
        assert float(m.lam(1.0)) == pytest.approx(0.0, abs=1e-14)

    @pytest.mark.parametrize("kind", KINDS)
    def test_complement(self, kind):
        m = _model(kind)
        a = np.linspace(0.0, 1.0, 201)
        assert np.allclose(m.lam(a) + m.lam_c(a), 1.0, atol=1e-14)

    @pytest.mark.parametrize("kind", KINDS)
    def test_decreasing_and_slope(self, kind):
        m = _model(kind)
        a = np.linspace(0.02, 0.98, 49)
        assert np.all(np.diff(m.lam(a)) < 0)
        h = 1e-6
        fd = (m.lam(a + h) - m.lam(a - h)) / (2 * h)
        assert np.allclose(m.lam_prime(a), fd, rtol=1e-5, atol=1e-9)

    @pytest.mark.parametrize("kind", ["L12", "L1", "D2"])
    def test_gap_is_cancellation_free(self, kind):
        m = _model(kind)
        a_star = 0.4
        d = np.array([1e-12, 1e-8, 1e-3, 0.2])
        direct = m.lam(a_star - d) - m.lam(a_star)
        gap = m.lam_gap(a_star, d)
        assert np.allclose(gap[2:], direct[2:], rtol=1e-9)
        # first order: gap ~ -lam'(a*) d
        slope = -float(m.lam_prime(a_star))
        assert gap[0] == pytest.approx(slope * d[0], rel=1e-6)

    def test_inverse_form_against_arcs(self):
        # L1: alpha = Q(1 - lambda)^(2/3)
        m = make_model("L1")
        a = np.linspace(0.05, 0.95, 10)
        s = 1.0 - m.lam(a)
        assert np.allclose(arc_q(s) ** (2.0 / 3.0), a, atol=1e-12)

    def test_arcs_against_mpmath(self):
        xs = [1e-8, 1e-3, 0.1, 0.5, 0.9, 1.0 - 1e-9]
        for x in xs:
            with mpmath.workdps(40):
                xm = mpmath.mpf(x)
                root = mpmath.sqrt(xm - xm * xm)
                q = 2 / mpmath.pi * (mpmath.asin(mpmath.sqrt(xm)) - root)
                g = 2 / mpmath.pi * (mpmath.asin(mpmath.sqrt(xm)) + root)
            assert float(arc_q(np.array([x]))[0]) == pytest.approx(float(q), rel=1e-12)
            assert float(arc_g(np.array([x]))[0]) == pytest.approx(float(g), rel=1e-12)


class TestNormalization:
    @pytest.mark.parametrize("kind", ["L12", "L1", "E"])
    def test_closed_form_cases(self, kind):
        assert normalization_cw(_model(kind)) == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("kind", KINDS)
    def test_every_kind(self, kind):
        assert abs(normalization_cw(_model(kind)) - 1.0) <= 1e-8


class TestClosedFormLaws:
    def test_linear_ultimate_opening(self):
        assert tsl_closed_form("L12").delta_bar == pytest.approx(0.08, rel=1e-14)

    @pytest.mark.parametrize("kind", DUGDALE_KINDS)
    def test_dugdale_ultimate_opening(self, kind):
        assert tsl_closed_form(kind).delta_bar == pytest.approx(0.04, rel=1e-14)

    def test_hyperbolic_ultimate_opening(self):
        expected = 0.12 / (3.0 * (2.0 * math.log(2.0) - 1.0))
        assert tsl_closed_form("H1").delta_bar == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(0.103548, abs=1e-6)

    @pytest.mark.parametrize("kind", ["E", "H2"])
    def test_unbounded_laws(self, kind):
        assert math.isinf(tsl_closed_form(kind).delta_bar)

    @pytest.mark.parametrize("kind", KINDS)
    def test_area_is_toughness(self, kind):
        law = tsl_closed_form(kind, REFERENCE_BAR, bilinear_derive(0.3, 2.5) if kind == "B" else None)
        top = law.delta_bar if np.isfinite(law.delta_bar) else 200.0
        area = float(mpmath.quad(lambda d: float(law(float(d))), mpmath.linspace(0, top, 40)))
        assert area == pytest.approx(0.12, rel=2e-4)

    def test_scalar_in_scalar_out(self):
        assert isinstance(tsl_closed_form("E")(0.04), float)
        assert tsl_closed_form("E")(0.04) == pytest.approx(3.0 * math.exp(-1.0), rel=1e-14)

    def test_bilinear_needs_parameters(self):
        with pytest.raises(MissingBilinearParams):
            tsl_closed_form("B")


class TestBilinear:
    def test_reference_values(self):
        p = bilinear_derive(0.3, 2.5)
        assert p.Gc_I == pytest.approx(0.048, rel=1e-14)
        assert p.sigma_tilde == pytest.approx(0.9, rel=1e-14)
        assert p.delta_tilde == pytest.approx(0.0224, rel=1e-12)
        assert p.delta_bar == pytest.approx(0.192, rel=1e-12)

    @pytest.mark.parametrize("beta,gamma", [(0.3, 2.5), (0.1, 1.1), (0.9, 10.0), (0.5, 3.0)])
    def test_trapezoid_area(self, beta, gamma):
        assert bilinear_derive(beta, gamma).area(3.0) == pytest.approx(0.12, rel=1e-12)

    @pytest.mark.parametrize("beta,gamma", [(0.0, 2.5), (1.0, 2.5), (0.3, 1.0), (0.3, 0.5)])
    def test_invalid_ratios(self, beta, gamma):
        with pytest.raises(InvalidRatio):
            bilinear_derive(beta, gamma)


class TestFactory:
    def test_unknown_kind(self):
        with pytest.raises(UnknownKind):
            make_model("Q7")

    def test_bilinear_needs_parameters(self):
        with pytest.raises(MissingBilinearParams):
            make_model("B")

    def test_material_validation(self):
        with pytest.raises(ValueError):
            REFERENCE_BAR.with_ell(250.0)
