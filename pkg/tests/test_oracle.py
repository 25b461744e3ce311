from __future__ import annotations

import numpy as np
import pytest

from cohesilab.catalog import REFERENCE_BAR
from cohesilab.errors import StepUnderflow
from cohesilab.oracle import (
    G_FLOOR,
    BarMesh,
    BarState,
    OracleOptions,
    alternate_minimize,
    bar_energy,
    damage_solve,
    elastic_solve,
    seeded_field,
    softening_deviation,
    trace_response,
)
from cohesilab.response import alpha_grid, global_response, limit_stress, phase_profile, softening_branch

from conftest import functions

MESH = BarMesh(401, 200.0)


@pytest.fixture(scope="module")
def l12_trace():
    return trace_response(MESH, np.linspace(0.005, 0.05, 10), REFERENCE_BAR, functions("L12"), OracleOptions())


class TestMesh:
    def test_geometry(self):
        assert MESH.h == pytest.approx(0.5)
        assert MESH.lumped_mass.sum() == pytest.approx(200.0)

    @pytest.mark.parametrize("n", [2, 10.5])
    def test_invalid(self, n):
        with pytest.raises(ValueError):
            BarMesh(n, 200.0)


class TestElasticSolve:
    def test_pristine(self):
        u, sigma = elastic_solve(MESH, np.zeros(MESH.n_nodes), 0.02, REFERENCE_BAR, functions("L12"))
        assert sigma == pytest.approx(3.0, rel=1e-14)
        assert np.allclose(u, 0.02 * MESH.node_x / 200.0, atol=1e-16)

    def test_damaged_field_keeps_end_displacement(self):
        fns = functions("E")
        alpha = 0.6 * np.exp(-(((MESH.node_x - 100.0) / 15.0) ** 2))
        u, sigma = elastic_solve(MESH, alpha, 0.05, REFERENCE_BAR, fns)
        assert u[-1] == 0.05
        assert sigma < 0.05 * 30000.0 / 200.0
        # recompute U from the uniform stress through the element stiffness
        mid = 0.5 * (alpha[:-1] + alpha[1:])
        U = np.sum(MESH.h * sigma / (30000.0 * fns.g_ell(mid, 1.0 - mid)))
        assert U == pytest.approx(0.05, rel=1e-12)

    def test_stress_uniform_per_element(self):
        fns = functions("H1")
        alpha = 0.8 * np.exp(-(((MESH.node_x - 100.0) / 20.0) ** 2))
        u, sigma = elastic_solve(MESH, alpha, 0.04, REFERENCE_BAR, fns)
        mid = 0.5 * (alpha[:-1] + alpha[1:])
        elem = 30000.0 * fns.g_ell(mid, 1.0 - mid) * np.diff(u) / MESH.h
        assert np.max(np.abs(elem - sigma)) <= 1e-8 * sigma

    @pytest.mark.parametrize("alpha", [np.full(401, np.nan), np.full(401, 1.5), np.zeros(7)])
    def test_invalid_field(self, alpha):
        with pytest.raises(ValueError):
            elastic_solve(MESH, alpha, 0.05, REFERENCE_BAR, functions("L12"))

    def test_fully_cracked_keeps_floor_stiffness(self):
        _, sigma = elastic_solve(MESH, np.ones(MESH.n_nodes), 0.05, REFERENCE_BAR, functions("L12"))
        assert 0.0 < sigma <= 30000.0 * 0.05 / 200.0 * G_FLOOR * (1.0 + 1e-12)


class TestDamageSolve:
    @pytest.mark.parametrize("level", [0.0, 0.2])
    def test_no_driving_force(self, level):
        # a uniform field carries no gradient energy, so nothing drives it further
        prev = np.full(MESH.n_nodes, level)
        out = damage_solve(
            MESH, np.zeros(MESH.n_nodes), prev, REFERENCE_BAR, functions("L12"), irreversible=True, boundary="free"
        )
        assert np.array_equal(out, prev)

    def test_below_threshold_stays_intact(self):
        u = 0.9 * 0.02 * MESH.node_x / 200.0
        out = damage_solve(MESH, u, np.zeros(MESH.n_nodes), REFERENCE_BAR, functions("L12"))
        assert np.all(out == 0.0)

    def test_bounds(self):
        u = 0.06 * MESH.node_x / 200.0
        out = damage_solve(MESH, u, np.zeros(MESH.n_nodes), REFERENCE_BAR, functions("L12"), alpha0=seeded_field(MESH))
        assert np.all(out >= 0.0) and np.all(out <= 1.0)
        assert out[0] == 0.0 and out[-1] == 0.0


class TestAlternateMinimize:
    def test_elastic_case(self):
        st = alternate_minimize(MESH, 0.015, REFERENCE_BAR, functions("L12"))
        assert st.converged
        assert st.alpha_max == 0.0
        assert st.sigma == pytest.approx(30000.0 * 0.015 / 200.0, rel=1e-14)

    def test_energy_never_rises(self, l12_trace):
        for st in l12_trace:
            h = np.array(st.energy_history)
            assert np.all(h[2::2] <= h[:-2:2] * (1.0 + 1e-12))

    def test_localized_below_critical_stress(self, l12_trace):
        st = l12_trace[-1]
        assert st.sigma < 3.0
        assert st.alpha_max > 0.1
        assert st.sigma == pytest.approx(limit_stress(functions("L12"), st.alpha_max), rel=1e-3)

    def test_profile_matches_semi_analytic(self, l12_trace):
        st = l12_trace[-1]
        prof = phase_profile(functions("L12"), st.alpha_max, n_points=201)
        ref = np.interp(MESH.node_x, prof.x, prof.alpha)
        assert np.max(np.abs(st.alpha - ref)) <= 0.02 * st.alpha_max

    def test_energy_matches_state(self, l12_trace):
        st = l12_trace[-1]
        assert bar_energy(MESH, st.u, st.alpha, REFERENCE_BAR, functions("L12")) == pytest.approx(st.energy, rel=1e-14)


class TestTrace:
    def test_elastic_slope(self, l12_trace):
        elastic = [s for s in l12_trace if s.alpha_max == 0.0]
        assert len(elastic) >= 3
        for s in elastic:
            assert s.sigma / s.U == pytest.approx(30000.0 / 200.0, rel=1e-3)

    def test_rejects_decreasing_schedule(self):
        with pytest.raises(ValueError):
            trace_response(MESH, [0.02, 0.01], REFERENCE_BAR, functions("L12"))

    def test_underflow_carries_progress(self):
        opts = OracleOptions(max_am_iterations=1, seed=0.0, min_step=1e-3)
        with pytest.raises(StepUnderflow) as info:
            trace_response(BarMesh(101, 200.0), [0.01, 0.03, 0.06], REFERENCE_BAR, functions("L12"), opts)
        err = info.value
        assert 0.01 <= err.U_reached < 0.03
        assert err.states and err.states[-1].U == err.U_reached

    def test_irreversible_field_never_decreases(self):
        opts = OracleOptions(irreversible=True)
        states = trace_response(BarMesh(201, 200.0), np.linspace(0.01, 0.06, 8), REFERENCE_BAR, functions("L12"), opts)
        for a, b in zip(states, states[1:]):
            assert np.all(b.alpha >= a.alpha)


class TestDeviation:
    def _state(self, U, sigma):
        return BarState(np.zeros(3), np.zeros(3), U, sigma, 0.0, 1, True)

    def test_normalized_by_critical_stress(self):
        rep = softening_deviation(
            [self._state(0.03, 2.0), self._state(0.05, 1.0), self._state(0.2, 0.0)],
            np.array([0.02, 0.06]), np.array([3.0, 1.0]), REFERENCE_BAR,
        )
        assert rep.n_compared == 2
        assert rep.max_deviation == pytest.approx(0.5 / 3.0)
        assert rep.U_at_max == pytest.approx(0.03)
        assert not rep.passed(0.1) and rep.passed(0.2)

    def test_nothing_to_compare(self):
        rep = softening_deviation([self._state(0.5, 0.0)], np.array([0.02, 0.06]), np.array([3.0, 1.0]), REFERENCE_BAR)
        assert rep.n_compared == 0 and not rep.passed(1.0)

    def test_requires_increasing_reference(self):
        with pytest.raises(ValueError):
            softening_deviation([], np.array([0.02, 0.01]), np.array([3.0, 1.0]), REFERENCE_BAR)

    def test_coarse_trace_against_semi_analytic(self, l12_trace):
        curve = global_response(functions("L12"), alpha_grid(200), with_energies=False, with_support=False)
        U_ref, s_ref = softening_branch(curve)
        rep = softening_deviation(l12_trace, U_ref, s_ref, REFERENCE_BAR)
        assert rep.n_compared >= 5
        assert rep.passed(0.02)
