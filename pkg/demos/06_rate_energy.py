"""
Rate-energy trade-off
=====================

Time switching traces a straight line between its endpoints; power
splitting bows outward at high SNR.  At low SNR the convex harvester
favours time switching instead.
"""

import numpy as np

from wptsim.channel import generate
from wptsim.harvester import RectennaParams
from wptsim.signals import FrequencyGrid, uniform_multisine
from wptsim.swipt import pareto_frontier, re_region

params = RectennaParams()
grid = FrequencyGrid(2.4e9, 1e6, 1)
x = uniform_multisine(grid, 1e-5)
steps = np.linspace(0, 1, 11)

for noise in (1e-13, 1e-5):
    ch = generate(0, "flat", 1, 1, grid, noise_power=noise)
    print(f"SNR {10 * np.log10(1e-5 / noise):.0f} dB")
    ts = {p.param: p for p in re_region(ch, x, "TS", steps, None, params)}
    ps = {p.param: p for p in re_region(ch, x, "PS", steps, None, params)}
    for v in steps:
        print(f"  param {v:.1f}  TS ({ts[v].rate:6.2f} b/s/Hz, {ts[v].energy:.2e} W)"
              f"  PS ({ps[v].rate:6.2f} b/s/Hz, {ps[v].energy:.2e} W)")
    front = pareto_frontier(list(ts.values()) + list(ps.values()))
    print("  frontier:", ", ".join(f"{p.arch}@{p.param:.1f}" for p in front))
