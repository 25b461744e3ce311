"""Numerical kernels: adaptive quadrature, root finding, monotone inversion,
unimodal maximization and the Gauss hypergeometric function.

All integrands and monotone functions passed to this module are expected to be
vectorized: they receive a 1-D ``numpy`` array and return an array of the same
shape.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize, special
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator

from .errors import (
    DivergentIntegral,
    DomainError,
    NoSignChange,
    NonConvergence,
    NonFinite,
    NotUnimodal,
    OutOfRange,
)

ArrayFn = Callable[[np.ndarray], np.ndarray]

QUAD_TOL = 1e-10
ROOT_TOL = 1e-12
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureResult:
    """Value of a definite integral with its absolute error estimate."""

    value: float
    error_estimate: float
    evaluations: int


@dataclass(frozen=True)
class Bracket:
    """Closed interval ``[lo, hi]`` with ``lo < hi``."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ValueError(f"bracket requires lo < hi, got [{self.lo}, {self.hi}]")


# 21-point Kronrod rule with its embedded 10-point Gauss rule (abscissae on [0, 1],
# mirrored for the negative half).
_XK = np.array([
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0,
])
_WK = np.array([
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077729345016890, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_KWEIGHTS = np.concatenate([_WK[:-1], _WK[::-1]])
_GWEIGHTS = np.zeros(21)
# Gauss nodes are the odd-indexed Kronrod abscissae (x[1], x[3], ..., x[9]).
_GWEIGHTS[[1, 3, 5, 7, 9]] = _WG
_GWEIGHTS[[19, 17, 15, 13, 11]] = _WG


def _gk21(f: ArrayFn, lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Apply the 21-point Kronrod rule on many intervals in one vectorized call."""
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = center[:, None] + half[:, None] * _NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    if not np.all(np.isfinite(fx)):
        bad = x[~np.isfinite(fx)][0]
        raise NonFinite(f"integrand is not finite at x={bad!r}")
    kron = half * (fx @ _KWEIGHTS)
    gauss = half * (fx @ _GWEIGHTS)
    # error heuristic of the classical QUADPACK rule
    mean = kron / (2.0 * half) if np.all(half > 0) else np.zeros_like(kron)
    resasc = np.abs(half) * (np.abs(fx - mean[:, None]) @ _KWEIGHTS)
    resabs = np.abs(half) * (np.abs(fx) @ _KWEIGHTS)
    err = np.abs(kron - gauss)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = np.where(resasc > 0, resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5), err)
    floor = 50.0 * _EPS * resabs
    # the third output marks intervals whose estimate is pure roundoff
    return kron, np.maximum(scaled, floor), scaled <= floor


def _adaptive(
    f: ArrayFn, a: float, b: float, tol: float, max_intervals: int, rtol: float = 0.0
) -> QuadratureResult:
    if a == b:
        return QuadratureResult(0.0, 0.0, 1)
    lo = np.array([a], dtype=float)
    hi = np.array([b], dtype=float)
    val, err, at_floor = _gk21(f, lo, hi)
    evaluations = 21
    width = b - a
    done_val = 0.0
    done_err = 0.0
    abs_tol = tol
    while True:
        total_err = done_err + err.sum()
        tol = max(abs_tol, rtol * abs(done_val + val.sum()))
        if total_err <= tol:
            break
        # split every interval whose error exceeds its share of the tolerance
        split = err > tol * (hi - lo) / width
        # intervals at the resolution limit cannot be refined further
        tiny = (hi - lo) <= 64.0 * _EPS * np.maximum(np.abs(lo), np.abs(hi))
        # neither can those whose error is already at the roundoff floor
        tiny |= at_floor
        frozen = split & tiny
        if np.any(frozen):
            done_val += val[frozen].sum()
            done_err += err[frozen].sum()
            live = ~frozen
            lo, hi, val, err, at_floor, split = lo[live], hi[live], val[live], err[live], at_floor[live], split[live]
        if not np.any(split):
            if total_err <= max(tol, 1e3 * _EPS * abs(done_val + val.sum())):
                break
            raise NonConvergence(
                f"quadrature stalled on [{a}, {b}]: error {total_err:.3e} > tol {tol:.3e}"
            )
        keep = ~split
        mid = 0.5 * (lo[split] + hi[split])
        new_lo = np.concatenate([lo[split], mid])
        new_hi = np.concatenate([mid, hi[split]])
        new_val, new_err, new_floor = _gk21(f, new_lo, new_hi)
        evaluations += 21 * new_lo.size
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        val = np.concatenate([val[keep], new_val])
        err = np.concatenate([err[keep], new_err])
        at_floor = np.concatenate([at_floor[keep], new_floor])
        if lo.size > max_intervals:
            raise NonConvergence(
                f"quadrature budget of {max_intervals} intervals exhausted on [{a}, {b}]"
            )
    return QuadratureResult(float(done_val + val.sum()), float(done_err + err.sum()), evaluations)


def integrate_regular(
    f: ArrayFn, a: float, b: float, tol: float = QUAD_TOL, *, rtol: float = 0.0, max_intervals: int = 4000
) -> QuadratureResult:
    """Integrate a smooth vectorized function over ``[a, b]``.

    Parameters
    ----------
    f : callable
        Vectorized integrand.
    a, b : float
        Integration limits, ``a <= b``.
    tol : float
        Absolute tolerance on the summed error estimate.
    rtol : float
        Optional relative tolerance; the looser of the two applies.

    Raises
    ------
    NonConvergence
        The error estimate still exceeds ``tol`` after ``max_intervals`` subintervals.
    NonFinite
        The integrand returned NaN or an infinity.
    """
    if not a <= b:
        raise ValueError("integrate_regular requires a <= b")
    if tol <= 0:
        raise ValueError("tol must be positive")
    return _adaptive(f, float(a), float(b), float(tol), max_intervals, rtol)


def endpoint_exponent(f: ArrayFn, a: float, b: float, end: str, *, probe: float = 1e-4) -> float:
    """Estimate ``p`` in ``f ~ d**p`` where ``d`` is the distance to an endpoint.

    Three nested samples at distances ``probe*(b-a)``, ``/16`` and ``/256`` give two
    slope estimates in log-log scale; the larger (less singular) one is returned.
    """
    d = probe * (b - a) * np.array([1.0, 1.0 / 16.0, 1.0 / 256.0])
    x = a + d if end == "lower" else b - d
    with np.errstate(all="ignore"):
        fx = np.abs(np.asarray(f(x), dtype=float))
    if not np.all(np.isfinite(fx)) or np.any(fx == 0):
        return 0.0 if np.all(np.isfinite(fx)) else -np.inf
    p = np.log(fx[1:] / fx[:-1]) / np.log(d[1:] / d[:-1])
    return float(np.max(p))


def integrate_sqrt_singular(
    f: Callable[..., np.ndarray],
    a: float,
    b: float,
    singular_end: str = "upper",
    tol: float = QUAD_TOL,
    *,
    pass_distance: bool = False,
    detect_divergence: bool = True,
    rtol: float = 0.0,
    max_intervals: int = 4000,
) -> QuadratureResult:
    """Integrate ``f`` with an inverse-square-root singularity at one endpoint.

    The substitution ``u**2 = d`` (``d`` being the distance to the singular
    endpoint) turns ``f ~ d**-0.5`` into a regular integrand on
    ``[0, sqrt(b - a)]``, which is then handled by the adaptive rule.

    Parameters
    ----------
    f : callable
        Vectorized integrand. With ``pass_distance=True`` it is called as
        ``f(x, d)`` where ``d = u**2`` is the exact distance to the singular end,
        so the caller can avoid forming ``b - x`` by subtraction.
    singular_end : {"lower", "upper"}
        Which endpoint carries the singularity.
    detect_divergence : bool
        Probe the local exponent first and raise for ``p <= -1``.

    Raises
    ------
    DivergentIntegral
        The integrand behaves like ``d**p`` with ``p <= -1`` at the flagged end.
    """
    if singular_end not in ("lower", "upper"):
        raise ValueError("singular_end must be 'lower' or 'upper'")
    if not a <= b:
        raise ValueError("integrate_sqrt_singular requires a <= b")
    if a == b:
        return QuadratureResult(0.0, 0.0, 1)
    a = float(a)
    b = float(b)
    lower = singular_end == "lower"

    def at_distance(d: np.ndarray) -> np.ndarray:
        x = a + d if lower else b - d
        return f(x, d) if pass_distance else f(x)

    if detect_divergence:
        p = endpoint_exponent(lambda x: at_distance(x - a), a, b, "lower")
        # allow for the O(d) drift of a finite-distance estimate of p = -1
        if p <= -1.0 + 2e-2:
            raise DivergentIntegral(
                f"integrand behaves like d**{p:.3f} at the {singular_end} endpoint"
            )

    def g(u: np.ndarray) -> np.ndarray:
        return 2.0 * u * at_distance(u * u)

    return _adaptive(g, 0.0, float(np.sqrt(b - a)), float(tol), max_intervals, rtol)


def find_root_bracketed(f: Callable[[float], float], bracket: Bracket, tol: float = ROOT_TOL) -> float:
    """Root of a continuous scalar function inside a sign-changing bracket (Brent)."""
    flo = f(bracket.lo)
    fhi = f(bracket.hi)
    if flo == 0.0:
        return bracket.lo
    if fhi == 0.0:
        return bracket.hi
    if np.sign(flo) == np.sign(fhi):
        raise NoSignChange(f"f({bracket.lo})={flo:.3e} and f({bracket.hi})={fhi:.3e} share a sign")
    try:
        root, info = optimize.brentq(
            f, bracket.lo, bracket.hi, xtol=tol, rtol=1e-15, maxiter=200, full_output=True
        )
    except RuntimeError as exc:
        raise NonConvergence(str(exc)) from exc
    if not info.converged:
        raise NonConvergence(info.flag)
    return float(root)


def invert_monotone(
    f: Callable[[float], float], y: float, domain: Bracket, tol: float = ROOT_TOL
) -> float:
    """Solve ``f(x) = y`` for a strictly monotone ``f`` on ``domain``."""
    flo = f(domain.lo)
    fhi = f(domain.hi)
    ymin, ymax = min(flo, fhi), max(flo, fhi)
    if not ymin <= y <= ymax:
        raise OutOfRange(f"y={y!r} outside [{ymin!r}, {ymax!r}]")
    return find_root_bracketed(lambda x: f(x) - y, domain, tol)


class MonotoneInverse:
    """Cached inverse of an increasing function on ``[lo, hi]``.

    A cubic Hermite interpolant of the inverse through cosine-clustered samples
    supplies the initial guess; each query is then polished by safeguarded Newton steps inside
    the bracketing table cell. Below the first positive sample the guess comes from
    a power-law fit, which keeps the relative accuracy for tiny targets.

    Parameters
    ----------
    f, fprime : callable
        Vectorized increasing function and its derivative.
    lo, hi : float
        Domain.
    nodes : int
        Table size.
    """

    def __init__(self, f: ArrayFn, fprime: ArrayFn, lo: float, hi: float, nodes: int = 2048):
        theta = np.linspace(0.0, np.pi, nodes)
        x = lo + (hi - lo) * 0.5 * (1.0 - np.cos(theta))
        y = np.asarray(f(x), dtype=float)
        if not np.all(np.diff(y) > 0):
            raise ValueError("MonotoneInverse requires a strictly increasing function")
        self._f = f
        self._fp = fprime
        self.lo, self.hi = float(lo), float(hi)
        self._x = x
        self._y = y
        with np.errstate(divide="ignore"):
            slope = 1.0 / np.asarray(fprime(x), dtype=float)
        if not np.isfinite(slope[0]):
            # the first cell is guessed from the power law; any finite slope will do
            slope[0] = (x[1] - x[0]) / (y[1] - y[0])
        if np.all(np.isfinite(slope)):
            # Hermite data from the exact inverse slopes: fourth-order accurate
            self._guess = CubicHermiteSpline(y, x, slope, extrapolate=False)
        else:
            self._guess = PchipInterpolator(y, x, extrapolate=False)
        # power law y - y0 ~ A (x - x0)**p near the lower end
        self._p = np.log((y[2] - y[0]) / (y[1] - y[0])) / np.log((x[2] - x[0]) / (x[1] - x[0]))

    @property
    def y_range(self) -> tuple[float, float]:
        return float(self._y[0]), float(self._y[-1])

    def __call__(self, yq: np.ndarray | float) -> np.ndarray:
        yq = np.asarray(yq, dtype=float)
        shape = yq.shape
        yq = yq.ravel()
        y, x = self._y, self._x
        if np.any(yq < y[0]) or np.any(yq > y[-1]):
            raise OutOfRange(f"inverse query outside [{y[0]!r}, {y[-1]!r}]")
        cell = np.clip(np.searchsorted(y, yq, side="right") - 1, 0, y.size - 2)
        blo = x[cell].copy()
        bhi = x[cell + 1].copy()
        guess = self._guess(yq)
        first = cell == 0
        if np.any(first):
            ratio = (yq[first] - y[0]) / (y[1] - y[0])
            guess[first] = x[0] + (x[1] - x[0]) * ratio ** (1.0 / self._p)
        xq = np.clip(guess, blo, bhi)
        exact_lo = yq == y[cell]
        active = ~exact_lo
        xq[exact_lo] = blo[exact_lo]
        for _ in range(100):
            if not np.any(active):
                break
            xa = xq[active]
            r = self._f(xa) - yq[active]
            # keep the bracket around the root
            pos = r > 0
            lo_a, hi_a = blo[active], bhi[active]
            hi_a = np.where(pos, xa, hi_a)
            lo_a = np.where(~pos, xa, lo_a)
            fp = self._fp(xa)
            with np.errstate(divide="ignore", invalid="ignore"):
                step = r / fp
            xn = xa - step
            done = (r == 0) | (np.abs(step) <= 4 * _EPS * np.abs(xa)) | (hi_a - lo_a <= 4 * _EPS * np.abs(xa))
            bad = ~done & (~np.isfinite(xn) | (xn <= lo_a) | (xn >= hi_a))
            xn = np.where(bad, 0.5 * (lo_a + hi_a), xn)
            xn = np.where(r == 0, xa, xn)
            idx = np.flatnonzero(active)
            xq[idx] = xn
            blo[idx] = lo_a
            bhi[idx] = hi_a
            active[idx[done]] = False
        else:
            raise NonConvergence("monotone inversion did not converge")
        return xq.reshape(shape)


def maximize_unimodal(
    f: Callable[[float], float],
    bracket: Bracket,
    tol: float = ROOT_TOL,
    *,
    n_scan: int = 200,
    noise: float = 1e-10,
) -> tuple[float, float]:
    """Maximizer and maximum of a unimodal scalar function on ``bracket``.

    A coarse scan locates the best sample and rejects functions with several
    interior local maxima (bumps below ``noise`` times the largest sample are
    ignored); bounded Brent refinement then polishes the argmax.

    Raises
    ------
    NotUnimodal
        The scan found more than one interior local maximum.
    """
    xs = np.linspace(bracket.lo, bracket.hi, n_scan)
    fs = np.array([f(x) for x in xs])
    if not np.all(np.isfinite(fs)):
        raise NonFinite("objective is not finite on the scan grid")
    # bumps smaller than the relative noise level are not counted as maxima
    margin = noise * np.max(np.abs(fs))
    interior = (fs[1:-1] > fs[:-2] + margin) & (fs[1:-1] > fs[2:] + margin)
    if np.count_nonzero(interior) > 1:
        raise NotUnimodal(f"{np.count_nonzero(interior)} interior local maxima on the scan grid")
    i = int(np.argmax(fs))
    lo = xs[max(i - 1, 0)]
    hi = xs[min(i + 1, n_scan - 1)]
    res = optimize.minimize_scalar(
        lambda x: -f(x), bounds=(lo, hi), method="bounded", options={"xatol": tol}
    )
    best_x, best_f = float(res.x), float(-res.fun)
    if fs[i] > best_f:
        best_x, best_f = float(xs[i]), float(fs[i])
    return best_x, best_f


def hyp2f1(a: float, b: float, c: float, z: np.ndarray | float) -> np.ndarray | float:
    """Gauss hypergeometric function for real parameters and ``0 <= z < 1``.

    Raises
    ------
    DomainError
        ``z`` outside ``[0, 1)`` or ``c`` a non-positive integer.
    """
    zz = np.asarray(z, dtype=float)
    if np.any(zz < 0) or np.any(zz >= 1) or np.any(np.isnan(zz)):
        raise DomainError("hyp2f1 is implemented for 0 <= z < 1")
    if c <= 0 and float(c).is_integer():
        raise DomainError("c must not be a non-positive integer")
    out = special.hyp2f1(a, b, c, zz)
    if not np.all(np.isfinite(out)):
        raise NonConvergence("hyp2f1 evaluation failed")
    return float(out) if np.ndim(z) == 0 else out
