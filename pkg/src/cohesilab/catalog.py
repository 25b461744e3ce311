"""Closed-form phase-field models and traction-separation laws for a 1D bar.

Every model is a pair ``(lambda, w)``: the degradation kernel ``lambda``
decreases from 1 to 0 and the local dissipation ``w`` grows from 0. All model
callables take ``alpha`` and an optional ``c``, the complement ``1 - alpha``
known to full relative precision, which matters close to a fully developed crack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import special

from .errors import InvalidRatio, MissingBilinearParams, UnknownKind
from .numerics import MonotoneInverse, integrate_sqrt_singular

KINDS = ("L1", "L2", "L12", "B", "E", "H1", "H2", "D1", "D2")
LINEAR_KINDS = ("L1", "L2", "L12")
DUGDALE_KINDS = ("D1", "D2")

ModelFn = Callable[..., np.ndarray]


@dataclass(frozen=True)
class MaterialParams:
    """Bar geometry and constitutive constants in mm, MPa and N/mm.

    The defaults are the reference bar: 200 mm long, E = 30 GPa,
    Gc = 0.12 N/mm, critical stress 3 MPa, internal length 10 mm.
    """

    L: float = 200.0
    E: float = 30000.0
    Gc: float = 0.12
    sigma_c: float = 3.0
    ell: float = 10.0

    def __post_init__(self) -> None:
        for name in ("L", "E", "Gc", "sigma_c", "ell"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
        if not self.ell < self.L:
            raise ValueError("ell must be smaller than L")

    def with_ell(self, ell: float) -> MaterialParams:
        return replace(self, ell=float(ell))


REFERENCE_BAR = MaterialParams()


@dataclass(frozen=True)
class BilinearParams:
    """Bilinear softening law: a steep first segment to the kink, then a long tail.

    ``beta`` fixes the kink stress ``sigma_tilde = beta * sigma_c`` and
    ``gamma = Gc / Gc_I`` the share of toughness spent on the first segment.
    """

    beta: float
    gamma: float
    Gc_I: float
    sigma_tilde: float
    delta_tilde: float
    delta_bar: float
    k1: float
    k2: float
    Gc_II: float

    @property
    def eta(self) -> float:
        """Slope ratio ``k1 / k2``."""
        return self.k1 / self.k2

    def area(self, sigma_c: float) -> float:
        """Trapezoid area under the two segments."""
        return 0.5 * (sigma_c + self.sigma_tilde) * self.delta_tilde + 0.5 * self.sigma_tilde * (
            self.delta_bar - self.delta_tilde
        )


def bilinear_derive(beta: float, gamma: float, material: MaterialParams = REFERENCE_BAR) -> BilinearParams:
    """Derive the bilinear constants from the two ratios.

    Uses ``Gc_I = Gc / gamma``; the kink opening follows from the first
    segment's linear-law toughness and the ultimate opening from the total area.

    Raises
    ------
    InvalidRatio
        ``beta`` outside ``(0, 1)`` or ``gamma <= 1``.
    """
    if not 0.0 < beta < 1.0:
        raise InvalidRatio(f"beta must lie in (0, 1), got {beta!r}")
    if not gamma > 1.0:
        raise InvalidRatio(f"gamma must exceed 1, got {gamma!r}")
    sc, Gc = material.sigma_c, material.Gc
    Gc_I = Gc / gamma
    sigma_tilde = beta * sc
    delta_tilde = (1.0 - beta) * 2.0 * Gc_I / sc
    delta_bar = 2.0 * (Gc - Gc_I * (1.0 - beta)) / (beta * sc)
    k1 = (sc - sigma_tilde) / delta_tilde
    k2 = sigma_tilde / (delta_bar - delta_tilde)
    Gc_II = 0.5 * sigma_tilde * (delta_bar - delta_tilde)
    return BilinearParams(beta, gamma, Gc_I, sigma_tilde, delta_tilde, delta_bar, k1, k2, Gc_II)


DEFAULT_BILINEAR = (0.3, 2.5)


@dataclass(frozen=True)
class PhaseFieldModel:
    """A degradation kernel and local dissipation pair.

    Attributes
    ----------
    kind : str
        Catalog name.
    lam, lam_c, lam_prime : callable
        ``lambda(alpha)``, its complement ``1 - lambda`` and ``d lambda / d alpha``.
    w, w_prime : callable
        Local dissipation and its derivative.
    lam_gap : callable
        ``lam_gap(alpha_star, d)`` returns ``lambda(alpha_star - d) - lambda(alpha_star)``
        without cancellation for small ``d``.
    meta : dict
        Provenance notes: scaling constant ``k_ks``, lambda source, support hints.
    """

    kind: str
    lam: ModelFn
    lam_c: ModelFn
    w: ModelFn
    lam_prime: ModelFn
    w_prime: ModelFn
    lam_gap: Callable[[float, np.ndarray], np.ndarray]
    meta: dict = field(default_factory=dict, compare=False)


def _prep(alpha, c=None) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(alpha, dtype=float)
    cc = 1.0 - a if c is None else np.asarray(c, dtype=float)
    return a, cc


def _out(template, value: np.ndarray):
    return float(value) if np.ndim(template) == 0 else value


# ---------------------------------------------------------------------------
# Arc functions behind the inverse-defined models.
#   G(x) = (2/pi)(asin(sqrt x) + sqrt(x - x^2)),  Q(x) = (2/pi)(asin(sqrt x) - sqrt(x - x^2))
#   G(x) + Q(1 - x) = 1
# ---------------------------------------------------------------------------

# phi - sin(phi) = sum_k (-1)^k phi^(2k+3) / (2k+3)!, highest power first
_SINE_TAIL = np.array([(-1.0) ** k / special.factorial(2 * k + 3) for k in range(10)])[::-1].copy()


def arc_q(x: np.ndarray) -> np.ndarray:
    """``(2/pi)(asin(sqrt x) - sqrt(x - x^2))``; series for small ``x`` avoids cancellation.

    With ``phi = 2 asin(sqrt x)`` the bracket equals ``(phi - sin phi) / 2``,
    whose series converges factorially.
    """
    x = np.asarray(x, dtype=float)
    y = np.sqrt(x)
    small = x < 0.09
    out = np.empty_like(x)
    if np.any(small):
        phi = 2.0 * np.arcsin(y[small])
        out[small] = 0.5 * phi**3 * np.polyval(_SINE_TAIL, phi * phi)
    big = ~small
    out[big] = _asin_sqrt(x[big]) - y[big] * np.sqrt(1.0 - x[big])
    return out * (2.0 / np.pi)


def _asin_sqrt(x: np.ndarray) -> np.ndarray:
    """``asin(sqrt x)``, reflected above 1/2 where ``1 - x`` is exact."""
    return np.where(x > 0.5, 0.5 * np.pi - np.arcsin(np.sqrt(np.clip(1.0 - x, 0.0, None))), np.arcsin(np.sqrt(x)))


def arc_g(x: np.ndarray) -> np.ndarray:
    """``(2/pi)(asin(sqrt x) + sqrt(x - x^2))``."""
    x = np.asarray(x, dtype=float)
    return (2.0 / np.pi) * (_asin_sqrt(x) + np.sqrt(x) * np.sqrt(1.0 - x))


def arc_q_prime(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return (2.0 / np.pi) * np.sqrt(x / (1.0 - x))


def arc_g_prime(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return (2.0 / np.pi) * np.sqrt((1.0 - x) / x)


@lru_cache(maxsize=None)
def _arc_inverse(name: str) -> MonotoneInverse:
    if name == "Q":
        return MonotoneInverse(arc_q, arc_q_prime, 0.0, 0.5)
    # G' is infinite at 0; the inverse never evaluates it there
    return MonotoneInverse(arc_g, lambda x: arc_g_prime(np.maximum(x, 1e-300)), 0.0, 0.5)


_ARC = {"Q": arc_q, "G": arc_g}
_ARC_PRIME = {"Q": arc_q_prime, "G": arc_g_prime}
_OTHER = {"Q": "G", "G": "Q"}

# alpha = Y(1 - lambda)**e
_INVERSE_FORMS = {"L1": ("Q", 2.0 / 3.0), "L2": ("Q", 0.5), "D1": ("G", 2.0 / 3.0), "D2": ("G", 0.5)}


class _InverseKernel:
    """Degradation kernel defined through ``alpha = Y(s)**e`` with ``s = 1 - lambda``.

    For ``s <= 1/2`` the kernel inverts ``Y`` directly; otherwise it works with
    ``t = lambda`` and ``1 - alpha**(1/e) = Yc(t)``, ``Yc`` being the other arc
    function, so that both ends of ``[0, 1]`` keep full relative precision.
    """

    def __init__(self, arc: str, e: float):
        self.arc, self.e = arc, e
        self.comp = _OTHER[arc]
        self.alpha_half = float(_ARC[arc](np.array([0.5]))[0] ** e)
        self._star_cache = None

    def alpha_of_s(self, s: np.ndarray) -> np.ndarray:
        """Printed-style forward map ``lambda^{-1}`` expressed through ``s = 1 - lambda``."""
        s = np.asarray(s, dtype=float)
        out = np.empty_like(s)
        lo = s <= 0.5
        out[lo] = _ARC[self.arc](s[lo]) ** self.e
        out[~lo] = (1.0 - _ARC[self.comp](1.0 - s[~lo])) ** self.e
        return out

    def split(self, a: np.ndarray, c: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return ``(mask_s, s, t)``: ``s`` filled where ``mask_s``, ``t`` elsewhere."""
        a = np.atleast_1d(a)
        c = np.atleast_1d(c)
        mask = a <= self.alpha_half
        s = np.full(a.shape, np.nan)
        t = np.full(a.shape, np.nan)
        if np.any(mask):
            target = np.clip(a[mask], 0.0, 1.0) ** (1.0 / self.e)
            s[mask] = _arc_inverse(self.arc)(np.minimum(target, _arc_inverse(self.arc).y_range[1]))
        if np.any(~mask):
            cm = np.clip(c[~mask], 0.0, 1.0)
            target = -np.expm1(np.log1p(-cm) / self.e)
            inv = _arc_inverse(self.comp)
            t[~mask] = inv(np.clip(target, 0.0, inv.y_range[1]))
        return mask, s, t

    def lam(self, alpha, c=None):
        a, cc = _prep(alpha, c)
        mask, s, t = self.split(a, cc)
        return _out(alpha, np.where(mask, 1.0 - s, t).reshape(a.shape))

    def lam_c(self, alpha, c=None):
        a, cc = _prep(alpha, c)
        mask, s, t = self.split(a, cc)
        return _out(alpha, np.where(mask, s, 1.0 - t).reshape(a.shape))

    def lam_prime(self, alpha, c=None):
        a, cc = _prep(alpha, c)
        mask, s, t = self.split(a, cc)
        e = self.e
        with np.errstate(all="ignore"):
            ys = _ARC[self.arc](np.nan_to_num(s))
            dads = e * ys ** (e - 1.0) * _ARC_PRIME[self.arc](np.nan_to_num(s))
            yt = _ARC[self.comp](np.nan_to_num(t))
            dadt = -e * (1.0 - yt) ** (e - 1.0) * _ARC_PRIME[self.comp](np.nan_to_num(t))
            out = np.where(mask, -1.0 / dads, 1.0 / dadt)
        aa = np.atleast_1d(a)
        at_zero = aa <= 0.0
        if np.any(at_zero):
            # alpha ~ s**(1.5 e) (Q) or s**(0.5 e) (G) as s -> 0
            p = (1.5 if self.arc == "Q" else 0.5) * e
            lead = (4.0 / (3.0 * np.pi)) ** e if self.arc == "Q" else (4.0 / np.pi) ** e
            out[at_zero] = -1.0 / lead if p == 1.0 else 0.0
        at_one = np.atleast_1d(cc) <= 0.0
        if np.any(at_one):
            # the complement arc is Q (slope 0 at 0) for G-kernels, G (infinite slope) for Q-kernels
            out[at_one] = -np.inf if self.comp == "Q" else 0.0
        return _out(alpha, out.reshape(a.shape))

    def _split_star(self, a_star: float):
        cached = self._star_cache
        if cached is None or cached[0] != a_star:
            cached = (a_star, self.split(np.array([a_star]), np.array([1.0 - a_star])))
            self._star_cache = cached
        return cached[1]

    def lam_gap(self, alpha_star: float, d: np.ndarray) -> np.ndarray:
        return self.lam_and_gap(alpha_star, d)[1]

    def lam_and_gap(self, alpha_star: float, d: np.ndarray, beta: np.ndarray | None = None):
        """``lambda(alpha* - d)`` and ``lambda(alpha* - d) - lambda(alpha*)`` sharing one inversion."""
        d = np.asarray(d, dtype=float)
        a_star = float(alpha_star)
        c_star = 1.0 - a_star
        beta = a_star - d if beta is None else np.asarray(beta, dtype=float)
        cb = c_star + d
        ms, ss, ts = self._split_star(a_star)
        mb, sb, tb = self.split(beta, cb)
        lam_b = np.where(mb, 1.0 - sb, tb)
        lam_star = (1.0 - ss[0]) if ms[0] else ts[0]
        gap = lam_b - lam_star
        if ms[0]:
            same = mb
            x0, arc, sign = ss[0], self.arc, -1.0
            gap = np.where(mb, ss[0] - sb, gap)
        else:
            same = ~mb
            x0, arc, sign = ts[0], self.comp, 1.0
            gap = np.where(~mb, tb - ts[0], gap)
        near = same & (gap < 0.5 * x0) & (d > 0.0)
        if np.any(near) and x0 > 0.0:
            gap[near] = self._gap_newton(arc, x0, sign, a_star, d[near], gap[near])
        return lam_b.reshape(d.shape), np.maximum(gap, 0.0).reshape(d.shape)

    def _gap_newton(self, arc: str, x0: float, sign: float, a_star: float, d: np.ndarray, h0: np.ndarray) -> np.ndarray:
        """Solve ``|Y(x0 + sign h) - Y(x0)| = a*^(1/e) - (a* - d)^(1/e)`` for ``h``.

        The left side is integrated from ``Y'`` so neither side suffers from
        cancellation, which keeps full relative precision as ``d -> 0``.
        """
        target = a_star ** (1.0 / self.e) * -np.expm1(np.log1p(-d / a_star) / self.e)
        yp = _ARC_PRIME[arc]
        slope0 = float(yp(np.array([x0]))[0])
        h = np.where(h0 > 1e-4 * x0, h0, target / slope0)
        h = np.clip(h, 0.0, 0.5 * x0)
        for _ in range(6):
            pts = x0 + sign * 0.5 * h[:, None] * (1.0 + _GL_NODES[None, :])
            rise = 0.5 * h * (yp(pts.ravel()).reshape(pts.shape) @ _GL_WEIGHTS)
            step = (rise - target) / yp(x0 + sign * h)
            h = np.clip(h - step, 0.0, 0.75 * x0)
            if np.all(np.abs(step) <= 4e-16 * h):
                break
        return h


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)


def _quadratic_kernel() -> dict[str, Callable]:
    """``lambda = (1 - alpha)^2`` with its exact gap ``d (2 (1 - alpha*) + d)``."""

    def lam(alpha, c=None):
        a, cc = _prep(alpha, c)
        return _out(alpha, cc * cc)

    def lam_c(alpha, c=None):
        a, cc = _prep(alpha, c)
        return _out(alpha, a * (1.0 + cc))

    def lam_prime(alpha, c=None):
        a, cc = _prep(alpha, c)
        return _out(alpha, -2.0 * cc)

    def lam_gap(alpha_star, d):
        d = np.asarray(d, dtype=float)
        return d * (2.0 * (1.0 - float(alpha_star)) + d)

    return dict(lam=lam, lam_c=lam_c, lam_prime=lam_prime, lam_gap=lam_gap)


# ---------------------------------------------------------------------------
# Local dissipation shapes: w = F(alpha) / (4 pi^2 (k ks)^2)
# ---------------------------------------------------------------------------

H1_KKS = 2.0 * math.log(2.0) - 1.0


def _h1_ratios(a: np.ndarray, c: np.ndarray):
    """Scale-free pieces of the H1 shape: N/a^2, N'/a, D/a^3, D'/a^2."""
    small = a < 0.25
    r1 = np.empty_like(a)
    m = np.arange(3, 60)
    coef = 4.0 / (m * (m - 1.0) * (m - 2.0))
    asm = a[small]
    # N = 2a^2 - sum_{m>=3} 4 a^m / (m (m-1) (m-2))
    r1[small] = 2.0 - asm * np.polynomial.polynomial.polyval(asm, coef)
    al = a[~small]
    cl = c[~small]
    with np.errstate(divide="ignore", invalid="ignore"):
        logc = np.where(cl > 0, np.log(cl), 0.0)
        r1[~small] = (al * (1.0 + cl) + 2.0 * cl * cl * logc) / (al * al)
        log_c = np.where(a < 0.5, np.log1p(-np.minimum(a, 0.5)), np.log(np.where(c > 0, c, 1.0)))
        log_ratio = np.where(a > 0, log_c / np.where(a > 0, a, 1.0), -1.0)
    # N' = -4 c log(c), which vanishes at c = 0
    r2 = np.where(c > 0, -4.0 * c * log_ratio, 0.0)
    r3 = (1.0 + c) ** 3
    r4 = 6.0 * (1.0 + c) ** 2 * c
    return r1, r2, r3, r4


def _h2_merged_coeffs(n: int = 90) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients of ``(F(-1/4,1;1/2;z) - (1-z) F(3/4,1;1/2;z)) / z`` as a power series."""
    a = np.ones(n + 1)
    b = np.ones(n + 1)
    for k in range(n):
        a[k + 1] = a[k] * (-0.25 + k) / (0.5 + k)
        b[k + 1] = b[k] * (0.75 + k) / (0.5 + k)
    d = a - b
    d[1:] += b[:-1]
    r = d[1:]
    return r, r[1:] * np.arange(1, n)


_H2_R, _H2_RP = _h2_merged_coeffs()


def _hyp_reflected(a: float, b: float, c: float, y: np.ndarray) -> np.ndarray:
    """``2F1(a, b; c; 1 - y)`` for ``0 < y <= 1/2`` via the ``z -> 1 - z`` connection.

    ``c - a - b`` must not be an integer, which holds for every call made here.
    """
    m = c - a - b
    A = special.gamma(c) * special.gamma(m) / (special.gamma(c - a) * special.gamma(c - b))
    B = special.gamma(c) * special.gamma(-m) / (special.gamma(a) * special.gamma(b))
    return A * special.hyp2f1(a, b, 1.0 - m, y) + B * y**m * special.hyp2f1(c - a, c - b, m + 1.0, y)


def _h2_ratio(a: np.ndarray, c: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``z``, ``r = Dz / z`` and ``dr/dz`` for the H2 shape ``F = z r^2 / 4``."""
    z = a * (1.0 + c)
    y = c * c
    r = np.empty_like(z)
    rp = np.empty_like(z)
    small = z <= 0.5
    zs = z[small]
    r[small] = np.polynomial.polynomial.polyval(zs, _H2_R)
    rp[small] = np.polynomial.polynomial.polyval(zs, _H2_RP)
    big = ~small & (y > 0)
    if np.any(big):
        zb, yb = z[big], y[big]
        f1 = _hyp_reflected(-0.25, 1.0, 0.5, yb)
        f2 = _hyp_reflected(0.75, 1.0, 0.5, yb)
        f1p = -0.5 * _hyp_reflected(0.75, 2.0, 1.5, yb)
        f2p = 1.5 * _hyp_reflected(1.75, 2.0, 1.5, yb)
        dz = f1 - yb * f2
        dzp = f1p + f2 - yb * f2p
        r[big] = dz / zb
        rp[big] = (dzp * zb - dz) / (zb * zb)
    at_one = ~small & (y <= 0)
    r[at_one] = -np.inf
    rp[at_one] = -np.inf
    return z, r, rp


def shape_function(kind: str, extra: BilinearParams | None = None) -> tuple[ModelFn, ModelFn] | None:
    """Shape ``F`` and ``dF/dalpha`` of the families whose ``w`` carries the scaling factor.

    Returns ``None`` for the ``ks``-free families (L1, L2, D1, D2).
    """
    if kind == "L12":
        return (lambda a, c: a * (1.0 + c)), (lambda a, c: 2.0 * c)
    if kind == "E":
        def F(a, c):
            with np.errstate(divide="ignore", invalid="ignore"):
                x = np.where(c > 0, a / np.where(c > 0, c, 1.0), np.inf)
                A = np.log1p(x + np.sqrt(x * (x + 2.0)))
            return A * A

        def Fp(a, c):
            with np.errstate(divide="ignore", invalid="ignore"):
                x = np.where(c > 0, a / np.where(c > 0, c, 1.0), np.inf)
                A = np.log1p(x + np.sqrt(x * (x + 2.0)))
                root = np.sqrt(a * (1.0 + c))
                out = 2.0 * A / (c * root)
            out = np.where(a <= 0, 2.0, out)
            return np.where(c <= 0, np.inf, out)

        return F, Fp
    if kind == "H1":
        def F(a, c):
            r1, _, r3, _ = _h1_ratios(a, c)
            return a * r1 * r1 / r3

        def Fp(a, c):
            r1, r2, r3, r4 = _h1_ratios(a, c)
            return r1 * (2.0 * r2 * r3 - r1 * r4) / (r3 * r3)

        return F, Fp
    if kind == "H2":
        def F(a, c):
            z, r, _ = _h2_ratio(a, c)
            with np.errstate(invalid="ignore"):
                return np.where(np.isinf(r), np.inf, 0.25 * z * r * r)

        def Fp(a, c):
            z, r, rp = _h2_ratio(a, c)
            with np.errstate(invalid="ignore"):
                dFdz = 0.25 * (r * r + 2.0 * z * r * rp)
                return np.where(np.isinf(r), np.inf, dFdz * 2.0 * c)

        return F, Fp
    if kind == "B":
        if extra is None:
            raise MissingBilinearParams("kind B requires BilinearParams")
        beta, eta = extra.beta, extra.eta

        def F(a, c):
            z = a * (1.0 + c)
            tail = np.sqrt(np.maximum((beta - c) * (beta + c), 0.0))
            second = (np.sqrt(z) + (eta - 1.0) * tail) ** 2
            return np.where(c > beta, z, second)

        def Fp(a, c):
            z = a * (1.0 + c)
            q = np.maximum((beta - c) * (beta + c), 0.0)
            with np.errstate(divide="ignore", invalid="ignore"):
                P = np.sqrt(z) + (eta - 1.0) * np.sqrt(q)
                Pp = c * (1.0 / np.sqrt(z) + (eta - 1.0) / np.sqrt(q))
                second = 2.0 * P * Pp
            return np.where(c > beta, 2.0 * c, second)

        return F, Fp
    return None


def _dissipation(kind: str, kks: float | None, extra: BilinearParams | None) -> tuple[ModelFn, ModelFn]:
    if kind in ("L1", "D1"):
        def w(alpha, c=None):
            a, _ = _prep(alpha, c)
            return _out(alpha, 9.0 / 64.0 * a)

        def wp(alpha, c=None):
            a, _ = _prep(alpha, c)
            return _out(alpha, np.full(np.shape(a), 9.0 / 64.0))

        return w, wp
    if kind in ("L2", "D2"):
        def w(alpha, c=None):
            a, _ = _prep(alpha, c)
            return _out(alpha, 0.25 * a * a)

        def wp(alpha, c=None):
            a, _ = _prep(alpha, c)
            return _out(alpha, 0.5 * a)

        return w, wp
    F, Fp = shape_function(kind, extra)
    scale = 1.0 / (4.0 * np.pi**2 * kks**2)

    def w(alpha, c=None):
        a, cc = _prep(alpha, c)
        return _out(alpha, scale * F(np.atleast_1d(a), np.atleast_1d(cc)).reshape(np.shape(a)))

    def wp(alpha, c=None):
        a, cc = _prep(alpha, c)
        return _out(alpha, scale * Fp(np.atleast_1d(a), np.atleast_1d(cc)).reshape(np.shape(a)))

    return w, wp


# scaling constants k*ks of the families whose w is printed with a numeric factor
PRINTED_KKS = {"L12": 0.5, "E": 1.0, "H1": H1_KKS, "H2": 1.0}


def make_model(
    kind: str, material: MaterialParams = REFERENCE_BAR, extra: BilinearParams | None = None
) -> PhaseFieldModel:
    """Build a catalog model.

    Parameters
    ----------
    kind : str
        One of ``L1, L2, L12, B, E, H1, H2, D1, D2``.
    material : MaterialParams
        Only used by kind ``B``, whose dissipation embeds the scaling factor.
    extra : BilinearParams, optional
        Required for kind ``B``.

    Raises
    ------
    UnknownKind, MissingBilinearParams
    """
    if kind not in KINDS:
        raise UnknownKind(f"unknown model kind {kind!r}; expected one of {', '.join(KINDS)}")
    if kind == "B" and extra is None:
        raise MissingBilinearParams("kind B requires BilinearParams")
    meta: dict = {"kind": kind}
    if kind in _INVERSE_FORMS:
        arc, e = _INVERSE_FORMS[kind]
        kern = _InverseKernel(arc, e)
        funcs = dict(lam=kern.lam, lam_c=kern.lam_c, lam_prime=kern.lam_prime, lam_gap=kern.lam_gap)
        meta["lambda_source"] = f"inverse of alpha = {arc}(1 - lambda)^{e:.6g}"
        meta["alpha_of_s"] = kern.alpha_of_s
        meta["alpha_of_lam"] = lambda lam: kern.alpha_of_s(1.0 - np.asarray(lam, dtype=float))
        meta["lam_and_gap"] = kern.lam_and_gap
        kks = None
    else:
        funcs = _quadratic_kernel()
        meta["lambda_source"] = "closed form (1 - alpha)^2"
        meta["alpha_of_lam"] = lambda lam: 1.0 - np.sqrt(np.asarray(lam, dtype=float))
        if kind == "B":
            from .identification import framework_constants, solve_ks

            kks = solve_ks(kind, material, extra) * framework_constants(material).k
            meta["bilinear"] = extra
        else:
            kks = PRINTED_KKS[kind]
    meta["k_ks"] = kks
    w, wp = _dissipation(kind, kks, extra)
    return PhaseFieldModel(kind=kind, w=w, w_prime=wp, meta=meta, **funcs)


def normalization_cw(model: PhaseFieldModel, tol: float = 1e-12) -> float:
    """Crack density normalization ``4 * int_0^1 sqrt(w)``."""
    return 4.0 * sqrt_w_integral(model.w, tol)


def sqrt_w_integral(w: ModelFn, tol: float = 1e-12) -> float:
    """``int_0^1 sqrt(w)`` split at 1/2 so both ends get the square-root substitution."""
    lower = integrate_sqrt_singular(
        lambda a: np.sqrt(w(a)), 0.0, 0.5, "lower", tol, detect_divergence=False
    )
    upper = integrate_sqrt_singular(
        lambda a, d: np.sqrt(w(a, d)), 0.5, 1.0, "upper", tol, pass_distance=True, detect_divergence=False
    )
    return lower.value + upper.value


# ---------------------------------------------------------------------------
# Traction-separation laws
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TractionSeparationLaw:
    """Closed-form cohesive law ``sigma(delta)`` with its ultimate opening.

    ``delta_bar`` is ``inf`` for laws whose traction never vanishes.
    """

    kind: str
    family: str
    sigma_of_delta: Callable[[np.ndarray], np.ndarray]
    delta_bar: float
    params: dict

    def __call__(self, delta):
        return self.sigma_of_delta(delta)


FAMILY = {
    "L1": "linear", "L2": "linear", "L12": "linear", "B": "bilinear", "E": "exponential",
    "H1": "hyperbolic", "H2": "rational", "D1": "dugdale", "D2": "dugdale",
}


def tsl_closed_form(
    kind: str, material: MaterialParams = REFERENCE_BAR, extra: BilinearParams | None = None
) -> TractionSeparationLaw:
    """Closed-form traction-separation law of the family a model kind belongs to."""
    if kind not in KINDS:
        raise UnknownKind(f"unknown model kind {kind!r}")
    sc, Gc = material.sigma_c, material.Gc
    family = FAMILY[kind]

    def wrap(fn):
        def sigma(delta):
            d = np.asarray(delta, dtype=float)
            return _out(delta, np.asarray(fn(d), dtype=float))
        return sigma

    if family == "linear":
        db = 2.0 * Gc / sc
        return TractionSeparationLaw(kind, family, wrap(lambda d: sc * np.clip(1.0 - d / db, 0.0, None)), db, {})
    if family == "dugdale":
        db = Gc / sc
        return TractionSeparationLaw(kind, family, wrap(lambda d: np.where(d <= db, sc, 0.0)), db, {})
    if family == "exponential":
        return TractionSeparationLaw(kind, family, wrap(lambda d: sc * np.exp(-sc * d / Gc)), np.inf, {})
    if family == "hyperbolic":
        db = Gc / (sc * H1_KKS)
        law = lambda d: sc * np.clip(2.0 / (1.0 + d / db) - 1.0, 0.0, None)
        return TractionSeparationLaw(kind, family, wrap(law), db, {})
    if family == "rational":
        dh = Gc / sc
        return TractionSeparationLaw(kind, family, wrap(lambda d: sc / (1.0 + d / dh) ** 2), np.inf, {"delta_hat": dh})
    if extra is None:
        raise MissingBilinearParams("kind B requires BilinearParams")
    p = extra

    def bilinear(d):
        first = sc - p.k1 * d
        second = p.sigma_tilde - p.k2 * (d - p.delta_tilde)
        return np.where(d <= p.delta_tilde, first, np.clip(second, 0.0, None))

    return TractionSeparationLaw(kind, family, wrap(bilinear), p.delta_bar, {"bilinear": p})
