"""
Power probing with limited feedback
===================================

The transmitter probes a nested codebook, the receiver reports the index
with the largest DC output, and the selected codeword powers the device.
More feedback bits bring the result closer to perfect channel knowledge.
"""

import numpy as np

from wptsim.channel import generate
from wptsim.harvester import RectennaParams
from wptsim.optimizer import DEFAULT_BETAS, received_p_dc, smf
from wptsim.protocol import Frame, ProbeModel, build_codebook, run_closed_loop
from wptsim.signals import FrequencyGrid

params = RectennaParams()
grid = FrequencyGrid(2.4e9, 5e6, 2)
frame = Frame(slot_duration=1e-3, wpt_duration=1.0)
p = 1e-5

seeds = range(100)
ref = np.mean([max(received_p_dc(generate(s, "rayleigh", 1, 2, grid), smf(generate(s, "rayleigh", 1, 2, grid), b, p), params)
                   for b in DEFAULT_BETAS) for s in seeds])
for bits in range(1, 7):
    wpt, avg = [], []
    for s in seeds:
        ch = generate(s, "rayleigh", 1, 2, grid)
        book = build_codebook("nested-random", 2, 2, p, bits, seed=s, grid=grid)
        r = run_closed_loop(ch, book, frame, ProbeModel(0.1, seed=s), params)
        wpt.append(r.wpt_p_dc)
        avg.append(r.frame_avg_p_dc)
    print(f"bits={bits}  WPT {np.mean(wpt):.3e} W ({np.mean(wpt) / ref:.0%} of perfect CSIT)  frame avg {np.mean(avg):.3e} W")

print("last frame:", {k: v for k, v in r.to_dict().items() if k != "probed_powers_w"})
