"""Cohesive phase-field fracture models for a one-dimensional bar.

The package builds phase-field models from traction-separation laws, computes
their semi-analytical response and checks it against a discrete
energy-minimization solver.
"""

from __future__ import annotations

from importlib.metadata import PackageNotFoundError, version

from .catalog import KINDS, REFERENCE_BAR, MaterialParams, bilinear_derive, make_model, tsl_closed_form
from .identification import engineering_reconstruction, solve_ks
from .response import (
    crack_opening,
    displacement_profile,
    energy_decomposition,
    global_response,
    half_width,
    limit_stress,
    tsl_parametric,
    ultimate_opening,
)

try:
    __version__ = version("cohesilab")
except PackageNotFoundError:  # pragma: no cover - source tree without install
    __version__ = "0.0.0"


def model_functions(kind: str, material: MaterialParams = REFERENCE_BAR, bilinear: tuple = (0.3, 2.5)):
    """Engineering functions of a catalog kind; ``bilinear`` is ``(beta, gamma)`` for kind ``B``."""
    extra = bilinear_derive(*bilinear, material) if kind == "B" else None
    return engineering_reconstruction(make_model(kind, material, extra), material)


__all__ = [
    "KINDS",
    "REFERENCE_BAR",
    "MaterialParams",
    "bilinear_derive",
    "crack_opening",
    "displacement_profile",
    "energy_decomposition",
    "engineering_reconstruction",
    "global_response",
    "half_width",
    "limit_stress",
    "make_model",
    "model_functions",
    "solve_ks",
    "tsl_closed_form",
    "tsl_parametric",
    "ultimate_opening",
    "__version__",
]
