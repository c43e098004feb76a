"""
Multisine waveforms and PAPR
============================

Build in-phase multisines with the same average power and watch the peak
grow with the number of tones, together with the fourth moment that the
rectenna rewards.
"""

import numpy as np

from wptsim.harvester import fourth_moment
from wptsim.signals import FrequencyGrid, papr, synthesize, uniform_multisine

# 1 W spread over N tones, 1 MHz apart, around 2.4 GHz
for n in (1, 2, 4, 8, 16):
    grid = FrequencyGrid(2.4e9, 1e6, n)
    x = uniform_multisine(grid, 1.0)
    ts = synthesize(x)
    print(f"N={n:2d}  mean power {ts.mean_power():.6f} W  PAPR {papr(ts):5.2f} dB"
          f"  (10 log10 2N = {10 * np.log10(2 * n):5.2f})  E[y^4] {fourth_moment(x.weights[0]):.3f}")

# random phases spread the peak out again
rng = np.random.default_rng(0)
grid = FrequencyGrid(2.4e9, 1e6, 16)
x = uniform_multisine(grid, 1.0)
x.weights[0] *= np.exp(2j * np.pi * rng.random(16))
print(f"random phases, N=16: PAPR {papr(synthesize(x)):.2f} dB, E[y^4] {fourth_moment(x.weights[0]):.3f}")
