"""Translation between the mathematical and engineering descriptions of a model.

The pipeline goes from a traction-separation law to a nondimensional cohesive
law, fixes the scaling factor ``ks`` through the crack-density normalization and
rebuilds the degradation function ``g_ell`` from ``(lambda, w)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .catalog import (
    DUGDALE_KINDS,
    KINDS,
    BilinearParams,
    MaterialParams,
    PhaseFieldModel,
    REFERENCE_BAR,
    TractionSeparationLaw,
    make_model,
    shape_function,
    sqrt_w_integral,
)
from .errors import MissingBilinearParams, UnknownKind
from .numerics import Bracket, find_root_bracketed, integrate_regular

KKS_BRACKET = Bracket(0.01, 100.0)


@dataclass(frozen=True)
class FrameworkConstants:
    """Constants linking the two frameworks.

    Attributes
    ----------
    k : float
        ``2 Gc L / E``.
    eps : float
        Regularization parameter ``k ell / L``.
    K : float
        ``2 E Gc / ell`` in MPa^2.
    failure_s : float
        ``2 L sigma_c / E``.
    """

    k: float
    eps: float
    K: float
    failure_s: float


def framework_constants(material: MaterialParams = REFERENCE_BAR) -> FrameworkConstants:
    m = material
    k = 2.0 * m.Gc * m.L / m.E
    return FrameworkConstants(
        k=k, eps=k * m.ell / m.L, K=2.0 * m.E * m.Gc / m.ell, failure_s=2.0 * m.L * m.sigma_c / m.E
    )


@dataclass(frozen=True)
class NondimensionalLaw:
    """Cohesive law with the opening rescaled as ``delta = ks * s``.

    ``g0_prime(s) = sigma(ks s) / sigma(0)`` and ``g0`` is its running integral.
    """

    g0_prime: Callable[[np.ndarray], np.ndarray]
    g0: Callable[[np.ndarray], np.ndarray]
    ks: float
    s_bar: float


def nondimensional_tsl(tsl: TractionSeparationLaw, ks: float) -> NondimensionalLaw:
    """Rescale a traction-separation law by the scaling factor ``ks``."""
    if not ks > 0:
        raise ValueError("ks must be positive")
    sigma0 = float(tsl.sigma_of_delta(0.0))

    def g0_prime(s):
        return tsl.sigma_of_delta(ks * np.asarray(s, dtype=float)) / sigma0

    s_bar = tsl.delta_bar / ks
    kinks = []
    if "bilinear" in tsl.params:
        kinks.append(tsl.params["bilinear"].delta_tilde / ks)
    if np.isfinite(s_bar):
        kinks.append(s_bar)

    def g0(s):
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.empty_like(s_arr)
        for i, si in enumerate(s_arr):
            # split at slope discontinuities so the rule sees smooth pieces
            edges = [0.0] + [x for x in kinks if 0.0 < x < si] + [si]
            out[i] = sum(
                integrate_regular(lambda x: np.atleast_1d(g0_prime(x)), lo, hi, 1e-13).value
                for lo, hi in zip(edges[:-1], edges[1:])
            )
        return float(out[0]) if np.ndim(s) == 0 else out

    return NondimensionalLaw(g0_prime=g0_prime, g0=g0, ks=float(ks), s_bar=float(s_bar))


def _constraint(w: Callable, k: float) -> float:
    """Left side of the normalization constraint ``int sqrt(4 k^2 w)``."""
    return 2.0 * k * sqrt_w_integral(w)


def solve_ks(kind: str, material: MaterialParams = REFERENCE_BAR, extra: BilinearParams | None = None) -> float:
    """Scaling factor ``ks`` that normalizes the family's dissipation.

    For the families whose ``w`` carries ``ks`` the constraint
    ``int_0^1 sqrt(4 k^2 w) = k / 2`` is solved for ``k ks`` in ``[0.01, 100]``.
    For the ``ks``-free families the constraint is checked and the stated value
    is returned: ``1 / (2 k)`` for L1 and L2, ``k`` for the Dugdale kinds.

    Raises
    ------
    NoSignChange
        The constraint cannot be bracketed.
    """
    if kind not in KINDS:
        raise UnknownKind(f"unknown model kind {kind!r}")
    if kind == "B" and extra is None:
        raise MissingBilinearParams("kind B requires BilinearParams")
    k = framework_constants(material).k
    shapes = shape_function(kind, extra)
    if shapes is None:
        w = make_model(kind, material).w
        value = _constraint(w, k)
        if abs(value - 0.5 * k) > 1e-8 * k:
            raise ValueError(f"kind {kind} does not satisfy the normalization constraint")
        return k if kind in DUGDALE_KINDS else 1.0 / (2.0 * k)
    F = shapes[0]
    root_F = sqrt_w_integral(lambda a, c=None: F(np.atleast_1d(a), np.atleast_1d(1.0 - a if c is None else c)))
    # sqrt(w) = sqrt(F) / (2 pi k ks): the constraint scales exactly as 1/(k ks)
    kks = find_root_bracketed(
        lambda x: 2.0 * k * root_F / (2.0 * np.pi * x) - 0.5 * k, KKS_BRACKET, tol=1e-14
    )
    return kks / k


def constraint_residual(model: PhaseFieldModel, material: MaterialParams = REFERENCE_BAR) -> float:
    """``int sqrt(4 k^2 w) - k / 2`` for a constructed model."""
    k = framework_constants(material).k
    return _constraint(model.w, k) - 0.5 * k


@dataclass(frozen=True)
class EngineeringFunctions:
    """Degradation function and its complementary forms for a model and material.

    ``phi = 1/g_ell - 1 = C w / lambda`` with ``C = 2 Gc E / (ell sigma_c^2)`` and
    ``psi = ell * phi``, which does not depend on ``ell``. All callables accept an
    optional accurate complement ``c = 1 - alpha``.
    """

    model: PhaseFieldModel
    material: MaterialParams
    C: float
    A: float

    def ratio(self, alpha, c=None):
        """``w / lambda``, infinite where ``lambda`` vanishes."""
        w = np.asarray(self.model.w(alpha, c), dtype=float)
        lam = np.asarray(self.model.lam(alpha, c), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(lam > 0, w / np.where(lam > 0, lam, 1.0), np.inf)
        return float(r) if np.ndim(alpha) == 0 else r

    def phi(self, alpha, c=None):
        return self.C * self.ratio(alpha, c)

    def psi(self, alpha, c=None):
        return self.A * self.ratio(alpha, c)

    def g_ell(self, alpha, c=None):
        return 1.0 / (1.0 + self.phi(alpha, c))

    def g_ell_prime(self, alpha, c=None):
        """``d g_ell / d alpha`` from the model derivatives."""
        m = self.model
        a = np.asarray(alpha, dtype=float)
        w, wp = np.asarray(m.w(a, c)), np.asarray(m.w_prime(a, c))
        lam, lp = np.asarray(m.lam(a, c)), np.asarray(m.lam_prime(a, c))
        with np.errstate(all="ignore"):
            # d(w/lambda) = (w' lambda - w lambda') / lambda^2, g' = -C r' g^2
            g = lam / (lam + self.C * w)
            out = -self.C * (wp * lam - w * lp) / (lam + self.C * w) ** 2
        out = np.where(np.isfinite(out), out, np.where(np.isfinite(g), 0.0, out))
        return float(out) if np.ndim(alpha) == 0 else out


def engineering_reconstruction(model: PhaseFieldModel, material: MaterialParams = REFERENCE_BAR) -> EngineeringFunctions:
    """Rebuild ``g_ell``, ``phi`` and ``psi`` from the model and material constants."""
    A = 2.0 * material.Gc * material.E / material.sigma_c**2
    return EngineeringFunctions(model=model, material=material, C=A / material.ell, A=A)


@dataclass(frozen=True)
class AdmissibilityReport:
    """Pass/fail per hypothesis; ``None`` marks a check that is not evaluated."""

    checks: dict

    @property
    def passed(self) -> bool:
        return all(v for v in self.checks.values() if v is not None)

    def __getitem__(self, name: str):
        return self.checks[name]


def admissibility_check(law: NondimensionalLaw, n: int = 2001) -> AdmissibilityReport:
    """Check the hypotheses a nondimensional law must meet to be represented.

    Checks: ``bounded`` (g0 has a finite limit), ``monotone`` (g0 non-decreasing),
    ``concave`` (g0' non-increasing), ``initial_slope`` (finite positive g0'(0)),
    ``strict_slope_decrease`` (g0' strictly decreasing on ``[0, s_bar)``) and
    ``auxiliary_convexity``, which is reported as not evaluated.

    An unbounded support counts as bounded when the slope tail decays faster
    than ``1/s``, judged from the local power-law exponent past the window.
    """
    finite = np.isfinite(law.s_bar)
    s_max = law.s_bar
    if not finite:
        # use the scale where the slope has dropped to 1e-3 to size the window
        probe = np.geomspace(1e-6, 1e12, 400)
        slope = law.g0_prime(probe)
        below = probe[slope < 1e-3]
        s_max = 10.0 * below[0] if below.size else probe[-1]
    s = np.linspace(0.0, s_max, n)
    gp = np.asarray(law.g0_prime(s), dtype=float)
    scale = max(np.max(np.abs(gp)), 1.0)
    tol = 1e-12 * scale
    dgp = np.diff(gp)
    checks = {
        "bounded": _bounded_tail(law, s_max, finite),
        "monotone": bool(np.all(gp >= -tol)),
        "concave": bool(np.all(dgp <= tol)),
        "initial_slope": bool(np.isfinite(gp[0]) and gp[0] > 0),
        "strict_slope_decrease": bool(np.all(dgp[: n - 2] < 0)) if finite else bool(np.all(dgp < 0)),
        "auxiliary_convexity": None,
    }
    return AdmissibilityReport(checks)


def _bounded_tail(law: NondimensionalLaw, s_max: float, finite: bool) -> bool:
    if finite:
        return bool(np.isfinite(law.g0(s_max)))
    near, far = (float(law.g0_prime(x)) for x in (s_max, 2.0 * s_max))
    if far <= 0.0:
        return True
    if near <= 0.0:
        return False
    exponent = -np.log(far / near) / np.log(2.0)
    return bool(exponent > 1.1)
