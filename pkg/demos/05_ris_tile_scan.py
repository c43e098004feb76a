"""
One-bit RIS configured by power probing
=======================================

A 16-element surface is configured tile by tile from the all-OFF state,
keeping each flip only if the receiver reports more DC power.
"""

import numpy as np

from wptsim.channel import ChannelState, RisLinks
from wptsim.harvester import RectennaParams
from wptsim.optimizer import received_p_dc, ris_probe, ris_tile_scan
from wptsim.signals import FrequencyGrid, uniform_multisine

rng = np.random.default_rng(3)
grid = FrequencyGrid(2.4e9, 5e6, 2)
c = lambda *s: (rng.standard_normal(s) + 1j * rng.standard_normal(s)) / np.sqrt(2)
g_r, g_i, g_d = c(1, 16, 2), c(16, 1, 2), c(1, 1, 2)
# weak direct path: 10% of the cascaded link
g_d *= 0.1 * np.linalg.norm(np.einsum("qrn,rmn->qmn", g_r, g_i)) / np.linalg.norm(g_d)
links = RisLinks(g_d, g_r, g_i, grid)

params = RectennaParams()
x = uniform_multisine(grid, 1e-7)  # keep the receiver in the small-signal regime
probe = ris_probe(links, x, params)
for rows, cols in [(1, 1), (2, 2), (4, 4)]:
    hist = []
    state = ris_tile_scan(links, rows, cols, probe, surface_shape=(4, 4), history=hist)
    print(f"{rows}x{cols} tiles: {len(hist) - 1} probes, p_dc {hist[-1]:.3e} W, bits {''.join(map(str, state.bits))}")
print(f"no RIS: p_dc {received_p_dc(ChannelState(g_d, grid), x, params):.3e} W")
