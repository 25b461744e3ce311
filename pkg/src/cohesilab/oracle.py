"""Finite-difference bar solved by alternate minimization.

The engineering energy of a bar of length ``L`` clamped at ``x = 0`` and pulled
to ``U`` at ``x = L``::

    Pi(u, alpha) = int E g(alpha) u'^2 / 2 + Gc (w(alpha) / ell + ell alpha'^2) dx

is discretized with linear elements for ``u`` and ``alpha``. The degradation of
an element is evaluated at its midpoint value of ``alpha`` and ``w`` is lumped
to the nodes. The solver is deliberately independent of the semi-analytic
integrals in :mod:`cohesilab.response` so it can serve as a check on them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .catalog import MaterialParams
from .errors import NonConvergence, NonFinite, SingularCompliance, StepUnderflow
from .identification import EngineeringFunctions

G_FLOOR = 1e-12
FD_STEP = 1e-6


@dataclass(frozen=True)
class BarMesh:
    """Uniform mesh of ``n_nodes`` nodes on ``[0, length]``."""

    n_nodes: int
    length: float

    def __post_init__(self):
        if int(self.n_nodes) != self.n_nodes or self.n_nodes < 3:
            raise ValueError("n_nodes must be an integer of at least 3")
        if not self.length > 0:
            raise ValueError("length must be positive")

    @property
    def h(self) -> float:
        return self.length / (self.n_nodes - 1)

    @property
    def node_x(self) -> np.ndarray:
        return np.linspace(0.0, self.length, self.n_nodes)

    @property
    def lumped_mass(self) -> np.ndarray:
        m = np.full(self.n_nodes, self.h)
        m[0] = m[-1] = 0.5 * self.h
        return m


@dataclass(frozen=True)
class BarState:
    """Equilibrium state at one imposed end displacement.

    ``energy_history`` holds the total energy after every half step of the
    alternate minimization, starting with the initial elastic solve.
    """

    u: np.ndarray
    alpha: np.ndarray
    U: float
    sigma: float
    energy: float
    am_iterations: int
    converged: bool
    energy_history: tuple = field(default=(), repr=False)

    @property
    def alpha_max(self) -> float:
        return float(np.max(self.alpha))


@dataclass(frozen=True)
class OracleOptions:
    """Solver settings.

    Attributes
    ----------
    boundary : str
        ``"zero"`` pins ``alpha = 0`` at both ends, ``"free"`` leaves them free.
    am_tol : float
        Sup-norm change of ``alpha`` between sweeps that ends the alternation.
    kkt_tol : float
        Bound on the projected, ``Gc / ell``-scaled damage residual.
    max_jump : float
        Largest sup-norm change of ``alpha`` accepted over one load step; a
        larger jump is treated like a failed step and the step is halved.
    """

    boundary: str = "zero"
    irreversible: bool = False
    seed: float = 1e-3
    am_tol: float = 1e-7
    max_am_iterations: int = 3000
    kkt_tol: float = 1e-8
    max_newton_iterations: int = 200
    max_jump: float = 0.25
    min_step: float = 1e-6
    energy_slack: float = 1e-12

    def __post_init__(self):
        if self.boundary not in ("zero", "free"):
            raise ValueError("boundary must be 'zero' or 'free'")


def seeded_field(mesh: BarMesh, seed: float = 1e-3) -> np.ndarray:
    """Undamaged field with ``alpha = seed`` at the center node."""
    alpha = np.zeros(mesh.n_nodes)
    alpha[mesh.n_nodes // 2] = seed
    return alpha


# ---------------------------------------------------------------------------
# Element quantities
# ---------------------------------------------------------------------------

def _midpoints(alpha: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mid = 0.5 * (alpha[:-1] + alpha[1:])
    comp = 0.5 * ((1.0 - alpha[:-1]) + (1.0 - alpha[1:]))
    return mid, comp


def _element_g(fns: EngineeringFunctions, alpha: np.ndarray) -> np.ndarray:
    mid, comp = _midpoints(alpha)
    return np.maximum(np.asarray(fns.g_ell(mid, comp), dtype=float), G_FLOOR)


def _fd_second(first, x: np.ndarray) -> np.ndarray:
    """Central difference of a first derivative, one-sided at the bounds."""
    lo = np.clip(x - FD_STEP, 0.0, 1.0)
    hi = np.clip(x + FD_STEP, 0.0, 1.0)
    with np.errstate(all="ignore"):
        out = (np.asarray(first(hi), dtype=float) - np.asarray(first(lo), dtype=float)) / (hi - lo)
    return np.where(np.isfinite(out), out, 0.0)


def elastic_solve(
    mesh: BarMesh, alpha: np.ndarray, U: float, material: MaterialParams, fns: EngineeringFunctions
) -> tuple[np.ndarray, float]:
    """Displacements and stress for a fixed phase field.

    The stress is uniform, ``sigma = E U / sum(h / g_e)``, and the displacement
    is accumulated element by element so that ``u[-1] = U``.

    Raises
    ------
    ValueError
        ``alpha`` has the wrong size, is not finite or leaves ``[0, 1]``.
    SingularCompliance
        The compliance sum is not finite.
    """
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (mesh.n_nodes,):
        raise ValueError(f"alpha must have {mesh.n_nodes} nodal values")
    if not np.all(np.isfinite(alpha)) or np.any(alpha < 0.0) or np.any(alpha > 1.0):
        raise ValueError("alpha must be finite and lie in [0, 1]")
    g = _element_g(fns, alpha)
    compliance = mesh.h * np.sum(1.0 / g)
    if not np.isfinite(compliance) or compliance <= 0:
        raise SingularCompliance("bar compliance is not finite")
    sigma = material.E * U / compliance
    strain = sigma / (material.E * g)
    u = np.concatenate([[0.0], np.cumsum(mesh.h * strain)])
    u[-1] = U
    return u, float(sigma)


def bar_energy(
    mesh: BarMesh, u: np.ndarray, alpha: np.ndarray, material: MaterialParams, fns: EngineeringFunctions
) -> float:
    """Discrete total energy (elastic plus dissipated) per unit cross-section."""
    return _DamageEnergy(mesh, u, material, fns).value(np.asarray(alpha, dtype=float))


class _DamageEnergy:
    """Energy as a function of ``alpha`` at fixed displacements."""

    def __init__(self, mesh: BarMesh, u: np.ndarray, material: MaterialParams, fns: EngineeringFunctions):
        self.mesh = mesh
        self.fns = fns
        h = mesh.h
        strain = np.diff(np.asarray(u, dtype=float)) / h
        # elastic energy of element e is Y_e g(mid_e)
        self.Y = 0.5 * material.E * h * strain**2
        self.m = mesh.lumped_mass
        self.c_w = material.Gc / material.ell
        self.c_grad = material.Gc * material.ell / h

    def value(self, alpha: np.ndarray) -> float:
        w = np.asarray(self.fns.model.w(alpha, 1.0 - alpha), dtype=float)
        total = (
            np.sum(self.Y * _element_g(self.fns, alpha))
            + self.c_w * np.sum(self.m * w)
            + self.c_grad * np.sum(np.diff(alpha) ** 2)
        )
        return float(total)

    def gradient(self, alpha: np.ndarray) -> np.ndarray:
        mid, comp = _midpoints(alpha)
        gp = np.asarray(self.fns.g_ell_prime(mid, comp), dtype=float)
        elem = 0.5 * self.Y * gp
        grad = np.zeros_like(alpha)
        grad[:-1] += elem
        grad[1:] += elem
        grad += self.c_w * self.m * np.asarray(self.fns.model.w_prime(alpha, 1.0 - alpha), dtype=float)
        da = np.diff(alpha)
        grad[:-1] -= 2.0 * self.c_grad * da
        grad[1:] += 2.0 * self.c_grad * da
        if not np.all(np.isfinite(grad)):
            raise NonFinite("damage gradient is not finite")
        return grad

    def hessian_bands(self, alpha: np.ndarray) -> np.ndarray:
        """Tridiagonal convexified Hessian in ``solve_banded`` layout."""
        n = alpha.size
        mid, _ = _midpoints(alpha)
        gpp = np.maximum(_fd_second(self.fns.g_ell_prime, mid), 0.0)
        wpp = np.maximum(_fd_second(self.fns.model.w_prime, alpha), 0.0)
        elem = 0.25 * self.Y * gpp
        diag = self.c_w * self.m * wpp
        diag[:-1] += elem + 2.0 * self.c_grad
        diag[1:] += elem + 2.0 * self.c_grad
        off = elem - 2.0 * self.c_grad
        # keep the matrix definite when every curvature term is clipped away
        diag += 1e-12 * self.c_w * self.m
        bands = np.zeros((3, n))
        bands[0, 1:] = off
        bands[1] = diag
        bands[2, :-1] = off
        return bands


def _kkt_residual(alpha, grad, lower, scale, free) -> float:
    step = np.clip(alpha - grad / scale, lower, 1.0)
    return float(np.max(np.abs(alpha - step)[free])) if np.any(free) else 0.0


def damage_solve(
    mesh: BarMesh,
    u: np.ndarray,
    alpha_prev: np.ndarray,
    material: MaterialParams,
    fns: EngineeringFunctions,
    irreversible: bool = False,
    *,
    alpha0: np.ndarray | None = None,
    boundary: str = "zero",
    tol: float = 1e-8,
    max_iter: int = 200,
) -> np.ndarray:
    """Minimize the energy over ``alpha`` at fixed displacements.

    Bound-constrained Newton with a primal-dual active set: nodes whose
    diagonal Newton step crosses a bound are moved onto it, the others take a
    Newton step on a convexified tridiagonal Hessian, and an Armijo search runs
    along the projected path.
    Stops when the scaled residual ``|alpha - P(alpha - grad / (m Gc / ell))|``
    is at most ``tol`` on every free node.

    Raises
    ------
    NonConvergence
        ``max_iter`` iterations without meeting ``tol``.
    """
    alpha_prev = np.asarray(alpha_prev, dtype=float)
    energy = _DamageEnergy(mesh, u, material, fns)
    n = mesh.n_nodes
    lower = alpha_prev.copy() if irreversible else np.zeros(n)
    lower = np.clip(lower, 0.0, 1.0)
    free = np.ones(n, dtype=bool)
    if boundary == "zero":
        free[0] = free[-1] = False
        lower[0] = lower[-1] = 0.0
    alpha = np.array(alpha_prev if alpha0 is None else alpha0, dtype=float)
    alpha = np.clip(alpha, lower, 1.0)
    alpha[~free] = 0.0
    scale = energy.c_w * energy.m
    f0 = energy.value(alpha)
    for _ in range(max_iter):
        grad = energy.gradient(alpha)
        res = _kkt_residual(alpha, grad, lower, scale, free)
        if res <= tol:
            return alpha
        bands = energy.hessian_bands(alpha)
        diag = bands[1].copy()
        # nodes whose diagonal Newton step would cross a bound are sent to it
        guess = alpha - grad / diag
        to_lower = free & (grad > 0) & (guess <= lower)
        to_upper = free & (grad < 0) & (guess >= 1.0)
        held = ~free | to_lower | to_upper
        d_held = np.zeros(n)
        d_held[to_lower] = lower[to_lower] - alpha[to_lower]
        d_held[to_upper] = 1.0 - alpha[to_upper]
        # free rows: H_ff d_f = -g_f - H_fh d_h
        upper_off, lower_off = bands[0, 1:].copy(), bands[2, :-1].copy()
        rhs = -grad.copy()
        rhs[:-1] -= upper_off * d_held[1:]
        rhs[1:] -= lower_off * d_held[:-1]
        couple = held[:-1] | held[1:]
        bands[0, 1:][couple] = 0.0
        bands[2, :-1][couple] = 0.0
        bands[1][held] = 1.0
        rhs[held] = d_held[held]
        d = solve_banded((1, 1), bands, rhs)
        d[~free] = 0.0
        t = 1.0
        accepted = False
        while t >= 1e-12:
            trial = np.clip(alpha + t * d, lower, 1.0)
            trial[~free] = 0.0
            f1 = energy.value(trial)
            pred = float(np.dot(grad, trial - alpha))
            if np.isfinite(f1) and (f1 - f0 <= 1e-4 * pred or abs(pred) <= 1e-15 * max(abs(f0), 1e-300)):
                accepted = True
                break
            t *= 0.5
        if not accepted:
            raise NonConvergence(f"damage line search failed (residual {res:.3e})")
        alpha, f0 = trial, f1
    raise NonConvergence(f"damage solver did not reach residual {tol:g} in {max_iter} iterations")


def alternate_minimize(
    mesh: BarMesh,
    U: float,
    material: MaterialParams,
    fns: EngineeringFunctions,
    opts: OracleOptions = OracleOptions(),
    *,
    alpha0: np.ndarray | None = None,
    alpha_prev: np.ndarray | None = None,
) -> BarState:
    """Alternate elastic and damage solves at fixed ``U`` until ``alpha`` settles.

    ``alpha0`` is the starting field (the seeded pristine bar by default) and
    ``alpha_prev`` the lower bound used in irreversible mode. A state with
    ``converged=False`` is returned when the iteration budget runs out.

    Raises
    ------
    NonConvergence
        The energy increased between sweeps by more than the round-off slack.
    """
    alpha = seeded_field(mesh, opts.seed) if alpha0 is None else np.array(alpha0, dtype=float)
    prev = alpha if alpha_prev is None else np.asarray(alpha_prev, dtype=float)
    history = []
    u, sigma = elastic_solve(mesh, alpha, U, material, fns)
    history.append(bar_energy(mesh, u, alpha, material, fns))
    converged = False
    it = 0
    for it in range(1, opts.max_am_iterations + 1):
        new = damage_solve(
            mesh, u, prev, material, fns, opts.irreversible,
            alpha0=alpha, boundary=opts.boundary, tol=opts.kkt_tol, max_iter=opts.max_newton_iterations,
        )
        history.append(bar_energy(mesh, u, new, material, fns))
        change = float(np.max(np.abs(new - alpha)))
        alpha = new
        u, sigma = elastic_solve(mesh, alpha, U, material, fns)
        history.append(bar_energy(mesh, u, alpha, material, fns))
        slack = opts.energy_slack * max(abs(history[-3]), 1e-300)
        if history[-1] > history[-3] + slack:
            raise NonConvergence("energy increased during alternate minimization")
        if change <= opts.am_tol:
            converged = True
            break
    return BarState(
        u=u, alpha=alpha, U=float(U), sigma=sigma, energy=history[-1],
        am_iterations=it, converged=converged, energy_history=tuple(history),
    )


def trace_response(
    mesh: BarMesh,
    U_schedule,
    material: MaterialParams,
    fns: EngineeringFunctions,
    opts: OracleOptions = OracleOptions(),
) -> list[BarState]:
    """Warm-started alternate minimization along an increasing load schedule.

    A step that does not converge, or whose phase field jumps by more than
    ``opts.max_jump``, is retried at half the increment.

    Raises
    ------
    StepUnderflow
        The increment fell below ``opts.min_step``; the states reached so far
        are attached as ``error.states`` and the last accepted load as
        ``error.U_reached``.
    """
    targets = [float(x) for x in U_schedule]
    if np.any(np.diff(targets) <= 0) or (targets and targets[0] < 0):
        raise ValueError("U_schedule must be non-negative and increasing")
    alpha = seeded_field(mesh, opts.seed)
    states: list[BarState] = []
    U_last = 0.0
    i = 0
    while i < len(targets):
        U = targets[i]
        try:
            st = alternate_minimize(
                mesh, U, material, fns, opts, alpha0=alpha, alpha_prev=alpha if opts.irreversible else None
            )
            ok = st.converged and float(np.max(np.abs(st.alpha - alpha))) <= opts.max_jump
        except NonConvergence:
            ok = False
        if ok:
            states.append(st)
            alpha = st.alpha
            U_last = U
            i += 1
            continue
        half = 0.5 * (U - U_last)
        if half < opts.min_step:
            err = StepUnderflow(f"load step fell below {opts.min_step:g} mm at U = {U_last:.6g} mm")
            err.states = states
            err.U_reached = U_last
            raise err
        targets.insert(i, U_last + half)
    return states


@dataclass(frozen=True)
class DeviationReport:
    """Largest stress gap between oracle states and a reference curve.

    Deviations are divided by the critical stress. Only states whose load lies
    on the reference softening branch are compared.
    """

    max_deviation: float
    U_at_max: float
    n_compared: int
    U_range: tuple

    def passed(self, tol: float) -> bool:
        return self.n_compared > 0 and self.max_deviation <= tol


def softening_deviation(
    states: list[BarState], U_ref: np.ndarray, sigma_ref: np.ndarray, material: MaterialParams
) -> DeviationReport:
    """Compare ``(U, sigma)`` of the states against a reference softening branch.

    ``U_ref`` must be increasing; the reference is interpolated linearly.
    """
    U_ref = np.asarray(U_ref, dtype=float)
    sigma_ref = np.asarray(sigma_ref, dtype=float)
    if U_ref.size < 2 or np.any(np.diff(U_ref) <= 0):
        raise ValueError("reference displacements must be increasing with at least two samples")
    U = np.array([s.U for s in states])
    sigma = np.array([s.sigma for s in states])
    inside = (U >= U_ref[0]) & (U <= U_ref[-1])
    if not np.any(inside):
        return DeviationReport(np.nan, np.nan, 0, (float(U_ref[0]), float(U_ref[-1])))
    dev = np.abs(sigma[inside] - np.interp(U[inside], U_ref, sigma_ref)) / material.sigma_c
    i = int(np.argmax(dev))
    return DeviationReport(float(dev[i]), float(U[inside][i]), int(inside.sum()), (float(U_ref[0]), float(U_ref[-1])))
