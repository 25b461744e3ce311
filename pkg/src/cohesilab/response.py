"""Semi-analytical response of the bar, parameterized by the peak phase-field value.

With ``lam* = lambda(alpha*)`` every quantity reduces to an integral over
``beta in [0, alpha*]`` whose integrand has a ``1/sqrt`` singularity at
``beta = alpha*``:

* stress        ``sigma = sigma_c sqrt(lam*)``
* opening       ``delta = (4 Gc / sigma_c) int sqrt(w) sqrt(lam*) / (sqrt(lam) sqrt(lam - lam*))``
* half-width    ``D = ell int sqrt(lam) / (sqrt(w) sqrt(lam - lam*))``
* local energy  ``2 Gc int sqrt(w) sqrt(lam) / sqrt(lam - lam*)``
* gradient      ``2 Gc int sqrt(w) sqrt(lam - lam*) / sqrt(lam)``

None of these depends on ``ell`` except ``D``, which is ``ell`` times an
``ell``-free integral. The gap ``lam - lam*`` comes from the model's
cancellation-free ``lam_gap``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .catalog import DUGDALE_KINDS, MaterialParams
from .errors import DivergentIntegral, DomainError, InconclusiveLimit, IntegrationError
from .identification import EngineeringFunctions, framework_constants
from .numerics import (
    QUAD_TOL,
    Bracket,
    find_root_bracketed,
    integrate_regular,
    integrate_sqrt_singular,
    maximize_unimodal,
)

ALPHA_MAX = 1.0 - 1e-6
RTOL = 1e-12
TAIL_LEVEL = 1e-6


class BarFitWarning(UserWarning):
    """The localization is wider than the bar."""


def alpha_grid(count: int = 200, clustering: str = "cosine", lo: float = 1e-6, hi: float = ALPHA_MAX) -> np.ndarray:
    """Grid of peak values on ``[lo, hi]``, clustered toward both ends by default."""
    if count < 2:
        raise ValueError("grid needs at least 2 points")
    if not 0.0 < lo < hi <= 1.0:
        raise ValueError("grid bounds must satisfy 0 < lo < hi <= 1")
    if clustering == "cosine":
        t = 0.5 * (1.0 - np.cos(np.linspace(0.0, np.pi, count)))
    elif clustering == "uniform":
        t = np.linspace(0.0, 1.0, count)
    else:
        raise ValueError(f"unknown clustering {clustering!r}")
    return lo + (hi - lo) * t


def _check_alpha(alpha_star: float, allow_one: bool = True) -> None:
    if not (0.0 < alpha_star < 1.0 or (allow_one and alpha_star == 1.0)):
        raise DomainError(f"alpha_star must lie in (0, 1], got {alpha_star!r}")


class _Kernel:
    """Pieces of the integrands at fixed ``alpha*``."""

    def __init__(self, fns: EngineeringFunctions, alpha_star: float):
        self.m = fns.model
        self.a = float(alpha_star)
        self.c = 1.0 - self.a
        self.lam_star = float(self.m.lam(self.a, self.c))
        self.root_lam_star = np.sqrt(self.lam_star)

    def parts(self, d: np.ndarray, beta: np.ndarray | None = None):
        """``sqrt(w)``, ``sqrt(lam)`` and ``sqrt(lam - lam*)`` at ``beta = alpha* - d``.

        Pass ``beta`` as well when it is known more accurately than ``alpha* - d``.
        """
        if beta is None:
            beta = self.a - d
        cb = self.c + d
        sw = np.sqrt(self.m.w(beta, cb))
        joint = self.m.meta.get("lam_and_gap")
        if joint is not None:
            lam, gap = joint(self.a, d, beta)
        else:
            lam, gap = self.m.lam(beta, cb), self.m.lam_gap(self.a, d)
        return sw, np.sqrt(lam), np.sqrt(gap)

    def integrate(self, which: str, lo: float = 0.0, tol: float = QUAD_TOL, detect: bool = False) -> float:
        """Integrate one of the kernels over ``[lo, alpha*]`` (upper end singular)."""

        def f(beta, d):
            sw, sl, sg = self.parts(d)
            with np.errstate(divide="ignore", invalid="ignore"):
                if which == "open":
                    return sw * self.root_lam_star / (sl * sg)
                if which == "profile":
                    return sl / (sw * sg)
                if which == "local":
                    return sw * sl / sg
                if which == "gradient":
                    return np.where(sl > 0, sw * sg / sl, 0.0)
                if which == "psi_profile":
                    # psi(beta) times the profile kernel, up to the factor A
                    return sw / (sl * sg)
            raise ValueError(which)

        return integrate_sqrt_singular(
            f, lo, self.a, "upper", tol, pass_distance=True, detect_divergence=detect, rtol=RTOL
        ).value

    def profile_lower(self, hi: float, tol: float = QUAD_TOL) -> float:
        """Profile kernel over ``[0, hi]`` with divergence detection at ``beta = 0``."""

        def f(beta):
            d = self.a - beta
            sw, sl, sg = self.parts(d, beta)
            with np.errstate(divide="ignore", invalid="ignore"):
                return sl / (sw * sg)

        return integrate_sqrt_singular(f, 0.0, hi, "lower", tol, rtol=RTOL).value


def limit_stress(fns: EngineeringFunctions, alpha_star: float) -> float:
    """Bar stress compatible with a localization of peak ``alpha_star``.

    Evaluated as ``sqrt(K w / phi)``; where ``w / lambda`` is not finite the
    equivalent limit ``sigma_c sqrt(lambda)`` is used.

    Raises
    ------
    DomainError
        ``alpha_star`` outside ``(0, 1]``.
    """
    _check_alpha(alpha_star)
    return float(limit_stress_array(fns, np.array([alpha_star]))[0])


def limit_stress_array(fns: EngineeringFunctions, alpha: np.ndarray) -> np.ndarray:
    """Vectorized ``limit_stress`` without the domain check (``alpha = 0`` allowed)."""
    alpha = np.asarray(alpha, dtype=float)
    K = framework_constants(fns.material).K
    w = np.asarray(fns.model.w(alpha), dtype=float)
    phi = np.asarray(fns.phi(alpha), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = np.sqrt(K * w / phi)
    fallback = fns.material.sigma_c * np.sqrt(np.asarray(fns.model.lam(alpha), dtype=float))
    ok = np.isfinite(direct) & (w > 0) & np.isfinite(phi)
    return np.where(ok, direct, fallback)


def crack_opening(fns: EngineeringFunctions, alpha_star: float, tol: float = QUAD_TOL) -> float:
    """Displacement jump carried by the localization of peak ``alpha_star``."""
    _check_alpha(alpha_star)
    if alpha_star == 1.0:
        return ultimate_opening(fns)
    k = _Kernel(fns, alpha_star)
    mat = fns.material
    return 4.0 * mat.Gc / mat.sigma_c * k.integrate("open", tol=tol)


def half_width(fns: EngineeringFunctions, alpha_star: float, ell: float | None = None, tol: float = QUAD_TOL) -> float:
    """Half the support length of the localization, ``inf`` if unbounded."""
    _check_alpha(alpha_star, allow_one=False)
    ell = fns.material.ell if ell is None else float(ell)
    return ell * _unit_half_width(fns, alpha_star, tol)


def _unit_half_width(fns: EngineeringFunctions, alpha_star: float, tol: float = QUAD_TOL) -> float:
    k = _Kernel(fns, alpha_star)
    mid = 0.5 * alpha_star
    try:
        lower = k.profile_lower(mid, tol)
    except DivergentIntegral:
        return np.inf
    return lower + k.integrate("profile", lo=mid, tol=tol)


def energy_decomposition(
    fns: EngineeringFunctions, alpha_star: float, ell: float | None = None, tol: float = QUAD_TOL
) -> tuple[float, float, float]:
    """Local and gradient parts of the surface energy of the localization.

    Returns
    -------
    (E_local, E_gradient, E_total) in N/mm, with ``E_total = E_local + E_gradient``.
    The result does not depend on ``ell``.
    """
    _check_alpha(alpha_star, allow_one=False)
    k = _Kernel(fns, alpha_star)
    Gc = fns.material.Gc
    e_loc = 2.0 * Gc * k.integrate("local", tol=tol)
    e_grad = 2.0 * Gc * k.integrate("gradient", tol=tol)
    return e_loc, e_grad, e_loc + e_grad


def ultimate_opening(fns: EngineeringFunctions, *, j_min: int = 4, j_max: int = 36) -> float:
    """Limit of the opening as ``alpha* -> 1``, or ``inf`` when it diverges.

    Openings on ``alpha* = 1 - 2**-j`` are accelerated with Aitken's delta-squared
    process; increments that do not shrink geometrically mean divergence.

    Raises
    ------
    InconclusiveLimit
        The sequence neither settles nor grows.
    """
    mat = fns.material
    js = np.arange(j_min, j_max + 1)
    seq = []
    for j in js:
        a = 1.0 - 2.0 ** (-float(j))
        k = _Kernel(fns, a)
        seq.append(4.0 * mat.Gc / mat.sigma_c * k.integrate("open"))
    x = np.array(seq)
    dx = np.diff(x)
    scale = max(np.max(np.abs(x)), 1e-300)
    tail = dx[-8:]
    if np.all(np.abs(tail) <= 1e-13 * scale):
        return float(x[-1])
    ratios = tail[1:] / tail[:-1]
    if np.all(tail > 0) and np.all(ratios >= 0.98):
        return np.inf
    if np.all(np.abs(ratios) < 0.97):
        den = dx[-1] - dx[-2]
        if den == 0.0:
            return float(x[-1])
        # openings are non-negative; clip round-off below zero
        return max(float(x[-1] - dx[-1] ** 2 / den), 0.0)
    raise InconclusiveLimit(f"opening sequence not settling: last increments {tail}")


@dataclass(frozen=True)
class ResponseSample:
    """One point of the global response."""

    alpha_star: float
    sigma: float
    delta: float
    U: float
    D: float
    E_local: float
    E_gradient: float
    E_surface_total: float


ELASTIC, STABLE, POST_CRITICAL = 0, 1, 2


@dataclass(frozen=True)
class ResponseCurve:
    """Sampled response over a grid of peak values.

    ``branch`` tags each row as elastic (0), stable (1) or post-critical (2);
    post-critical rows lie beyond a snap-back and are not reachable under
    displacement control.
    """

    kind: str
    alpha_star: np.ndarray
    sigma: np.ndarray
    delta: np.ndarray
    U: np.ndarray
    D: np.ndarray
    E_local: np.ndarray
    E_gradient: np.ndarray
    E_total: np.ndarray
    branch: np.ndarray
    ell: float
    snap_back: "SnapBackState | None" = None
    warnings: tuple = field(default=())

    COLUMNS = ("alpha_star", "sigma", "delta", "U", "D", "E_local", "E_gradient", "E_total", "branch")
    UNITS = ("-", "MPa", "mm", "mm", "mm", "N/mm", "N/mm", "N/mm", "-")

    def table(self) -> np.ndarray:
        return np.column_stack([getattr(self, c) for c in self.COLUMNS]).astype(float)

    def samples(self) -> list[ResponseSample]:
        return [
            ResponseSample(*(float(getattr(self, c)[i]) for c in self.COLUMNS[:-1]))
            for i in range(self.alpha_star.size)
        ]

    def observable(self) -> tuple[np.ndarray, np.ndarray]:
        """``(U, sigma)`` as seen under displacement control.

        Elastic and stable rows, followed by a vertical drop to zero stress at the
        snap-back displacement when one occurs.
        """
        keep = self.branch != POST_CRITICAL
        U = self.U[keep]
        s = self.sigma[keep]
        if self.snap_back is not None:
            U = np.append(U, [self.snap_back.U_crit, self.snap_back.U_crit])
            s = np.append(s, [limit_stress_array_from_curve(self), 0.0])
        return U, s


def softening_branch(curve: ResponseCurve) -> tuple[np.ndarray, np.ndarray]:
    """``(U, sigma)`` from the elastic limit along the stable rows.

    Samples that do not advance ``U`` are dropped so the result can be
    interpolated in ``U``.
    """
    keep = curve.branch == STABLE
    U = np.concatenate([[curve.U[1]], curve.U[keep]])
    sigma = np.concatenate([[curve.sigma[1]], curve.sigma[keep]])
    advance = np.concatenate([[True], U[1:] > np.maximum.accumulate(U)[:-1]])
    return U[advance], sigma[advance]


def limit_stress_array_from_curve(curve: ResponseCurve) -> float:
    sb = curve.snap_back
    return float(np.interp(sb.alpha_crit, curve.alpha_star, curve.sigma))


@dataclass(frozen=True)
class SnapBackState:
    """Critical state at the maximum opening of a non-monotone evolution."""

    alpha_crit: float
    delta_crit: float
    U_crit: float
    dissipated: float


def openings(fns: EngineeringFunctions, grid: np.ndarray) -> np.ndarray:
    return np.array([crack_opening(fns, float(a)) for a in grid])


def tsl_parametric(fns: EngineeringFunctions, grid: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Traction-separation law traced by the peak value.

    Returns
    -------
    delta, sigma : ndarray
    post_critical : ndarray of bool
        True beyond the maximum opening when the opening is not monotone.
    """
    grid = np.asarray(grid, dtype=float)
    if np.any(grid <= 0) or np.any(grid >= 1):
        raise DomainError("grid must lie inside (0, 1)")
    delta = openings(fns, grid)
    sigma = limit_stress_array(fns, grid)
    post = np.zeros(grid.size, dtype=bool)
    if np.any(np.diff(delta) < -1e-12 * np.max(delta)):
        post[int(np.argmax(delta)) + 1:] = True
    return delta, sigma, post


def snap_back_state(fns: EngineeringFunctions, material: MaterialParams | None = None, n_scan: int = 200) -> SnapBackState | None:
    """Maximum of a non-monotone opening, ``None`` when the opening never decreases."""
    mat = fns.material if material is None else material
    grid = alpha_grid(n_scan)
    delta = openings(fns, grid)
    if np.all(np.diff(delta) >= -1e-12 * np.max(delta)):
        return None
    i = int(np.argmax(delta))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    a_crit, d_crit = maximize_unimodal(lambda a: crack_opening(fns, a), Bracket(lo, hi), tol=1e-10, n_scan=20)
    sigma = limit_stress(fns, a_crit)
    U = sigma * mat.L / mat.E + d_crit
    return SnapBackState(a_crit, d_crit, U, dissipated_up_to(fns, a_crit))


def dissipated_up_to(fns: EngineeringFunctions, alpha_star: float, n: int = 400) -> float:
    """``int sigma d(delta)`` along the evolution from the elastic limit to ``alpha_star``.

    The path starts at ``delta = 0`` with the critical stress, so a jump of the
    opening at the onset is counted at that stress.
    """
    grid = alpha_grid(n, lo=1e-9, hi=alpha_star)
    delta = np.concatenate([[0.0], openings(fns, grid)])
    sigma = np.concatenate([[fns.material.sigma_c], limit_stress_array(fns, grid)])
    return float(np.sum(0.5 * (sigma[1:] + sigma[:-1]) * np.diff(delta)))


def dissipated_energy_curve(fns: EngineeringFunctions, grid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Energy ``G(delta) = int_0^delta sigma`` along the rising-opening branch.

    Returns ``(delta, G)`` restricted to samples before the maximum opening.
    """
    grid = np.asarray(grid, dtype=float)
    delta, sigma, post = tsl_parametric(fns, grid)
    keep = ~post
    d = np.concatenate([[0.0], delta[keep]])
    s = np.concatenate([[fns.material.sigma_c], sigma[keep]])
    G = np.concatenate([[0.0], np.cumsum(0.5 * (s[1:] + s[:-1]) * np.diff(d))])
    return d[1:], G[1:]


def fracture_energy_area(fns: EngineeringFunctions, grid: np.ndarray | None = None) -> float:
    """Area ``int_0^sigma_c delta d(sigma)`` under the traced law.

    Integrates in ``t = sigma / sigma_c`` with ``alpha* = lambda^{-1}(t^2)``, so
    the quadrature sees a smooth integrand. A user grid of peak values switches to trapezoid integration over
    the sampled curve.

    Raises
    ------
    IntegrationError
        Fewer than two grid samples.
    """
    mat = fns.material
    if grid is not None:
        grid = np.asarray(grid, dtype=float)
        if grid.size < 2:
            raise IntegrationError("at least two samples are needed")
        delta = openings(fns, grid)
        sigma = limit_stress_array(fns, grid)
        return float(-np.trapezoid(delta, sigma))

    alpha_of_lam = fns.model.meta["alpha_of_lam"]

    def integrand(t: np.ndarray) -> np.ndarray:
        alpha = np.atleast_1d(alpha_of_lam(t * t))
        return np.array([crack_opening(fns, float(a)) if 0.0 < a < 1.0 else 0.0 for a in alpha])

    # the opening may grow like t**-0.5 as the stress vanishes (rational law)
    lower = integrate_sqrt_singular(integrand, 0.0, 0.5, "lower", 1e-10, detect_divergence=False)
    upper = integrate_sqrt_singular(integrand, 0.5, 1.0, "upper", 1e-10, detect_divergence=False)
    total = lower.value + upper.value
    return mat.sigma_c * total


def global_response(
    fns: EngineeringFunctions,
    grid: np.ndarray | None = None,
    *,
    with_energies: bool = True,
    with_support: bool = True,
) -> ResponseCurve:
    """Global response on a grid of peak values, preceded by the elastic segment.

    The first two rows are the origin and the elastic limit ``(sigma_c L / E, sigma_c)``.
    """
    mat = fns.material
    grid = alpha_grid() if grid is None else np.asarray(grid, dtype=float)
    delta, sigma, post = tsl_parametric(fns, grid)
    U = sigma * mat.L / mat.E + delta
    n = grid.size
    D = np.full(n, np.nan)
    if with_support:
        unit = np.array([_unit_half_width(fns, float(a)) for a in grid])
        D = mat.ell * unit
    E_loc = np.full(n, np.nan)
    E_grad = np.full(n, np.nan)
    if with_energies:
        for i, a in enumerate(grid):
            E_loc[i], E_grad[i], _ = energy_decomposition(fns, float(a))
    sb = None
    if np.any(post):
        sb = snap_back_state(fns)
    notes = []
    if with_support and np.any(D > 0.5 * mat.L):
        notes.append("localization half-width exceeds L/2 for some samples")
        warnings.warn(notes[-1], BarFitWarning, stacklevel=2)
    elastic_U = mat.sigma_c * mat.L / mat.E
    head = lambda v0, v1: np.concatenate([[v0, v1]])
    branch = np.where(post, POST_CRITICAL, STABLE)
    return ResponseCurve(
        kind=fns.model.kind,
        alpha_star=np.concatenate([head(0.0, 0.0), grid]),
        sigma=np.concatenate([head(0.0, mat.sigma_c), sigma]),
        delta=np.concatenate([head(0.0, 0.0), delta]),
        U=np.concatenate([head(0.0, elastic_U), U]),
        D=np.concatenate([head(0.0, 0.0), D]),
        E_local=np.concatenate([head(0.0, 0.0), E_loc]),
        E_gradient=np.concatenate([head(0.0, 0.0), E_grad]),
        E_total=np.concatenate([head(0.0, 0.0), E_loc + E_grad]),
        branch=np.concatenate([[ELASTIC, ELASTIC], branch]),
        ell=mat.ell,
        snap_back=sb,
        warnings=tuple(notes),
    )


# ---------------------------------------------------------------------------
# Profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Profile:
    """Phase-field and displacement along the bar for one peak value.

    Arrays are sorted by ``x``. ``truncated`` is set when the localization is
    unbounded or wider than the bar and the profile covers a window only.
    """

    alpha_star: float
    ell: float
    x: np.ndarray
    alpha: np.ndarray
    u: np.ndarray
    half_width: float
    truncated: bool


def _half_profile(
    fns: EngineeringFunctions, alpha_star: float, n_points: int, edge: float | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray, bool]:
    """Unit-length distances ``x(alpha)/ell`` and strain excess ``int psi`` on levels.

    Returns levels decreasing from ``alpha*`` to the support edge (0) or to the
    tail level, the ``ell``-free distances and ``ell``-free extra elongation
    ``int phi dx / ell`` accumulated from the center. ``edge`` overrides the
    lowest level.
    """
    k = _Kernel(fns, alpha_star)
    unbounded = not np.isfinite(_unit_half_width(fns, alpha_star))
    floor = min(TAIL_LEVEL, 1e-3 * alpha_star) if unbounded else 0.0
    if edge is not None:
        floor = edge
    # levels clustered near the peak and near the edge
    t = 0.5 * (1.0 - np.cos(np.linspace(0.0, np.pi, n_points)))
    levels = alpha_star - (alpha_star - floor) * t
    dist = np.zeros(n_points)
    extra = np.zeros(n_points)

    def piece(which: str, lo: float, hi: float) -> float:
        if hi <= lo:
            return 0.0
        if hi == alpha_star:
            return k.integrate(which, lo=lo)

        def f(beta):
            d = alpha_star - beta
            sw, sl, sg = k.parts(d, beta)
            with np.errstate(divide="ignore", invalid="ignore"):
                return sl / (sw * sg) if which == "profile" else sw / (sl * sg)

        if lo == 0.0:
            return integrate_sqrt_singular(f, lo, hi, "lower", detect_divergence=False, rtol=RTOL).value
        return integrate_regular(f, lo, hi, rtol=RTOL).value

    for i in range(1, n_points):
        lo, hi = levels[i], levels[i - 1]
        dist[i] = dist[i - 1] + piece("profile", lo, hi)
        extra[i] = extra[i - 1] + piece("psi_profile", lo, hi)
    # psi * profile kernel = A sqrt(w) / (sqrt(lam) sqrt(gap))
    extra *= fns.A
    return levels, dist, extra, unbounded


def phase_profile(fns: EngineeringFunctions, alpha_star: float, ell: float | None = None, n_points: int = 101) -> Profile:
    """Phase-field profile ``alpha(x)`` of the localization centered at ``L/2``.

    ``n_points`` levels are placed between the peak and the support edge; the
    result is mirrored about the center and padded with the undamaged bar.
    """
    return displacement_profile(fns, alpha_star, ell, n_points)


def displacement_profile(fns: EngineeringFunctions, alpha_star: float, ell: float | None = None, n_points: int = 101) -> Profile:
    """Phase-field and displacement profiles for one peak value.

    ``u(x) = (sigma / E) int_0^x (1 + phi)`` with ``u(0) = 0``. When the
    localization fits inside the bar, ``u(L)`` equals the end displacement
    ``sigma L / E + delta``. Unbounded or oversized localizations are reported on
    a symmetric window no wider than the bar, flagged ``truncated``.
    """
    _check_alpha(alpha_star, allow_one=False)
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    mat = fns.material
    ell = mat.ell if ell is None else float(ell)
    levels, dist, extra, unbounded = _half_profile(fns, alpha_star, n_points)
    if not unbounded:
        # pin the accumulated elongation to the opening integral itself
        kern = _Kernel(fns, alpha_star)
        total = fns.A * kern.integrate("open") / kern.root_lam_star
        extra = extra * (total / extra[-1])
    x_half = ell * dist
    half_L = 0.5 * mat.L
    truncated = unbounded
    full_width = np.inf if unbounded else float(x_half[-1])
    if x_half[-1] > half_L:
        warnings.warn(
            f"localization half-width {x_half[-1]:.4g} mm exceeds L/2 at alpha*={alpha_star:.4g}",
            BarFitWarning,
            stacklevel=2,
        )
        # resample between the peak and the level reached at the bar ends
        i = int(np.searchsorted(x_half, half_L))
        kern = _Kernel(fns, alpha_star)
        edge = find_root_bracketed(
            lambda lv: ell * kern.integrate("profile", lo=lv) - half_L, Bracket(levels[i], levels[i - 1])
        )
        levels, dist, extra, _ = _half_profile(fns, alpha_star, n_points, edge=edge)
        x_half = ell * dist
        x_half[-1] = half_L
        truncated = True
    sigma = limit_stress(fns, alpha_star)
    strain = sigma / mat.E
    X, ext = x_half[-1], extra[-1]
    # walk in from the left end: elastic part, then the localization
    xl = half_L - x_half[::-1]
    ul = strain * ((half_L - X) + (X - x_half[::-1]) + (ext - extra[::-1]))
    xr = half_L + x_half[1:]
    ur = strain * (half_L + ext + x_half[1:] + extra[1:])
    x = np.concatenate([xl, xr])
    alpha = np.concatenate([levels[::-1], levels[1:]])
    u = np.concatenate([ul, ur])
    if not truncated:
        x = np.concatenate([[0.0], x, [mat.L]])
        alpha = np.concatenate([[0.0], alpha, [0.0]])
        u = np.concatenate([[0.0], u, [strain * (mat.L + 2.0 * ext)]])
        x, first = np.unique(x, return_index=True)
        alpha, u = alpha[first], u[first]
    return Profile(alpha_star, ell, x, alpha, u, full_width, truncated)


@dataclass(frozen=True)
class IrreversibilityReport:
    """Pointwise monotonicity of the profiles along the evolution.

    ``violations`` holds ``(x, alpha_star)`` pairs where the phase field would
    have to decrease; ``trend`` summarizes the support evolution. Supports of
    unbounded width are tracked through the distance at which the tail drops to
    ``TAIL_LEVEL``; ``half_widths`` holds the measured widths.
    """

    violations: list
    half_widths: np.ndarray
    trend: str
    relative_change: float


def irreversibility_diagnostic(
    fns: EngineeringFunctions, grid: np.ndarray, ell: float | None = None, n_x: int = 801, rtol: float = 1e-6
) -> IrreversibilityReport:
    """Compare consecutive profiles on a shared grid of distances from the center."""
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be increasing")
    ell = fns.material.ell if ell is None else float(ell)
    D = np.array([half_width(fns, float(a), ell) for a in grid])
    profiles = []
    for a in grid:
        levels, dist, _, _ = _half_profile(fns, float(a), 121)
        profiles.append((ell * dist, levels))
    finite = np.isfinite(D)
    span = np.max(D[finite]) if np.any(finite) else max(p[0][-1] for p in profiles)
    xs = np.linspace(0.0, span, n_x)

    def alpha_at(prof) -> np.ndarray:
        xd, lv = prof
        # sqrt(alpha) is close to linear in x near a contact edge
        keep = np.concatenate([[True], np.diff(xd) > 0])
        root = PchipInterpolator(xd[keep], np.sqrt(lv[keep]), extrapolate=False)(xs)
        return np.where(np.isnan(root), 0.0, root) ** 2

    violations = []
    prev = alpha_at(profiles[0])
    for a, prof in zip(grid[1:], profiles[1:]):
        cur = alpha_at(prof)
        bad = cur < prev - 1e-9
        violations.extend((float(x), float(a)) for x in xs[bad])
        prev = cur
    # unbounded supports are measured where the tail drops to TAIL_LEVEL
    W = D.copy()
    for i in np.flatnonzero(~finite):
        a = float(grid[i])
        W[i] = ell * _Kernel(fns, a).integrate("profile", lo=TAIL_LEVEL) if a > TAIL_LEVEL else 0.0
    dW = np.diff(W)
    rel = float((W[-1] - W[0]) / W[0]) if W[0] > 0 else np.inf
    if np.all(np.abs(dW) <= rtol * W[0]):
        trend = "constant"
    elif np.all(dW <= rtol * W[0]):
        trend = "shrinking"
    elif np.all(dW >= -rtol * W[0]):
        trend = "growing"
    else:
        trend = "mixed"
    return IrreversibilityReport(violations, W, trend, rel)
