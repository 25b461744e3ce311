"""
Localization profiles and their support
=======================================

The phase field concentrates in a band around the bar center. Depending on
the kind, the band keeps its width, shrinks as damage grows, or has no
finite edge at all.
"""

from __future__ import annotations

import math

import numpy as np

from cohesilab import REFERENCE_BAR, model_functions
from cohesilab.response import alpha_grid, half_width, irreversibility_diagnostic, phase_profile

for kind in ("L12", "L1", "L2", "E"):
    fns = model_functions(kind, REFERENCE_BAR)
    widths = [half_width(fns, a) for a in (0.01, 0.5, 0.99)]
    text = ", ".join("inf" if math.isinf(w) else f"{w:.2f}" for w in widths)
    trend = irreversibility_diagnostic(fns, alpha_grid(10)).trend
    print(f"{kind}: half-width at alpha* = 0.01, 0.5, 0.99: {text} mm ({trend})")

# the profile abscissas scale with the internal length
for ell in (10.0, 5.0):
    prof = phase_profile(model_functions("L12", REFERENCE_BAR.with_ell(ell)), 0.6, n_points=11)
    inside = prof.alpha > 0
    print(f"ell = {ell:g} mm: damaged band spans x in [{prof.x[inside].min():.3f}, {prof.x[inside].max():.3f}] mm")
    print("  alpha:", np.array2string(prof.alpha[inside][::4], precision=3))
