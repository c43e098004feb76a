"""
The nonlinear rectenna
======================

Compare the delivered DC power of a CW tone, an in-phase multisine and
modulated signals with the same average received power.  The quadratic
model (fourth-order term off) cannot tell them apart.
"""

import numpy as np

from wptsim.harvester import RectennaParams, e3, p_dc
from wptsim.signals import ModulationScheme, draw_symbols

params = RectennaParams()
quad = params.quadratic()
p = 1e-5  # received power, W
print(f"beta2 = {params.beta2:.1f}, beta4 = {params.beta4:.3e}")

cases = {
    "CW": [np.sqrt(p)],
    "8-tone multisine": np.full(8, np.sqrt(p / 8)),
    "CSCG": draw_symbols(ModulationScheme("CSCG", p), 200000, 1)[:, None],
    "OOK l=3": draw_symbols(ModulationScheme.ook(3, p), 200000, 2)[:, None],
}
for name, y in cases.items():
    print(f"{name:17s} p_dc {p_dc(y, params):.3e} W  (quadratic {p_dc(y, quad):.3e} W)  e3 {e3(y, params):.2e}")
