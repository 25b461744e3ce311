"""
The model catalog
=================

Every catalog kind pairs a degradation kernel with a local dissipation.
This script lists the scaling constants and the cohesive law each kind
reproduces on the reference bar.
"""

from __future__ import annotations

import numpy as np

from cohesilab import KINDS, REFERENCE_BAR, model_functions, tsl_closed_form
from cohesilab.catalog import bilinear_derive, normalization_cw
from cohesilab.identification import framework_constants, solve_ks

bar = REFERENCE_BAR
k = framework_constants(bar).k
print(f"bar: L={bar.L} mm, E={bar.E} MPa, Gc={bar.Gc} N/mm, sigma_c={bar.sigma_c} MPa, k={k:g}")

# the bilinear kind needs its two ratios
extra = bilinear_derive(0.3, 2.5, bar)

print(f"{'kind':5s} {'cw':>10s} {'k*ks':>10s} {'delta_bar [mm]':>15s}")
for kind in KINDS:
    fns = model_functions(kind, bar)
    ks = solve_ks(kind, bar, extra if kind == "B" else None)
    law = tsl_closed_form(kind, bar, extra if kind == "B" else None)
    print(f"{kind:5s} {normalization_cw(fns.model):10.6f} {k * ks:10.6g} {law.delta_bar:15.6g}")

# the degradation g_ell softens the bar more for a smaller internal length
alpha = np.linspace(0.0, 1.0, 6)
for ell in (10.0, 1.0):
    g = model_functions("L12", bar.with_ell(ell)).g_ell(alpha)
    print(f"g_ell for L12, ell={ell:g} mm:", np.array2string(g, precision=4))
