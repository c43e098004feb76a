import csv

import numpy as np
import pytest

from wptsim.channel import generate
from wptsim.harvester import RectennaParams, p_dc
from wptsim.signals import FrequencyGrid, ModulationScheme, uniform_multisine
from wptsim.swipt import (
    REPoint,
    ReceiverArch,
    energy_arch,
    pareto_frontier,
    ppm_link,
    ppm_maxrate,
    rate_subbands,
    re_region,
    superpose,
    superposed_p_dc,
    throughput,
    write_re_csv,
)

G1 = FrequencyGrid(2.4e9, 1e6, 1)
G4 = FrequencyGrid(2.4e9, 1e6, 4)


def _flat(grid, noise=1e-10):
    return generate(0, "flat", 1, 1, grid, noise_power=noise)


def test_arch_validation():
    with pytest.raises(ValueError):
        ReceiverArch("TS")
    with pytest.raises(ValueError):
        ReceiverArch.ps(1.5)
    with pytest.raises(ValueError):
        ReceiverArch("XX")
    assert ReceiverArch("ts", 0.5).kind == "TS"


def test_rate_formula():
    ch = _flat(G4, noise=1e-6)
    x = uniform_multisine(G4, 4e-6)
    assert rate_subbands(ch, x, ReceiverArch("IDEAL")) == pytest.approx(4.0)
    assert rate_subbands(ch, x, ReceiverArch.ts(0.25)) == pytest.approx(3.0)
    assert rate_subbands(ch, x, ReceiverArch.ps(0.5)) == pytest.approx(4 * np.log2(1.5))
    with pytest.raises(ValueError):
        rate_subbands(ch, x, ReceiverArch("INTEGRATED"))


def test_ps_energy_scaling(params):
    ch = _flat(G1)
    x = uniform_multisine(G1, 1e-4)
    full = energy_arch(ch, x, ReceiverArch("IDEAL"), params)
    half = energy_arch(ch, x, ReceiverArch.ps(0.5), params)
    assert half == pytest.approx(p_dc([np.sqrt(0.5e-4)], params))
    assert half < full / 2  # convex harvester


def test_ts_energy(params):
    ch = _flat(G1)
    x = uniform_multisine(G1, 1e-4)
    e = energy_arch(ch, x, ReceiverArch.ts(0.3), params)
    assert e == pytest.approx(0.3 * p_dc([1e-2], params))
    e2 = energy_arch(ch, x, ReceiverArch.ts(0.3), params, harvest_during_wit=True)
    assert e2 == pytest.approx(p_dc([1e-2], params))


def test_superposed_cscg_oracle():
    # CSCG only: E[y^2] = P, E[y^4] = 3 P^2 on a single tone
    params = RectennaParams()
    p = 1e-4
    wf = superpose(uniform_multisine(G1, 1.0), ModulationScheme("CSCG", 1.0), 0.0, p)
    v = params.beta2 * p + 3 * params.beta4 * p**2
    assert superposed_p_dc(_flat(G1), wf, params, count=400000, seed=1) == pytest.approx(v**2 / params.r_load, rel=0.01)


def test_superposed_endpoints(params):
    x = uniform_multisine(G4, 1e-4)
    wf = superpose(x, ModulationScheme("CSCG", 1.0), 1.0, 1e-4)
    assert superposed_p_dc(_flat(G4), wf, params) == pytest.approx(p_dc(np.full(4, 5e-3), params))
    assert wf.total_power == pytest.approx(1e-4)


def test_ts_region_is_segment(params):
    ch = _flat(G1, noise=1e-12)
    x = uniform_multisine(G1, 1e-4)
    pts = re_region(ch, x, "TS", np.linspace(0, 1, 21), None, params)
    r0 = max(p.rate for p in pts)
    e1 = max(p.energy for p in pts)
    dev = max(abs(p.rate / r0 + p.energy / e1 - 1) for p in pts)
    assert dev <= 1e-9


def test_pareto_frontier():
    pts = [REPoint(1, 1, "a", 0), REPoint(2, 0.5, "a", 0), REPoint(0.5, 0.5, "a", 0), REPoint(0, 2, "a", 0)]
    front = pareto_frontier(pts)
    assert [(p.rate, p.energy) for p in front] == [(2, 0.5), (1, 1), (0, 2)]


def test_write_re_csv(tmp_path):
    path = tmp_path / "re.csv"
    write_re_csv([REPoint(1.5, 2e-6, "TS", 0.5)], path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["arch", "param", "rate_bps_hz", "energy_w"]
    assert float(rows[1][3]) == 2e-6


def test_ppm_zero_noise(params):
    r = ppm_link(4, 5000, 0.0, 1, params)
    assert r.ber == 0 and r.ser == 0


def test_ppm_uniform_guess_limit(params):
    v_pulse = params.beta2 * 4e-5 + 1.5 * params.beta4 * (4e-5) ** 2
    r = ppm_link(4, 200000, 1e3 * v_pulse, 2, params)
    assert r.ber == pytest.approx(0.5, abs=0.01)
    assert r.ser == pytest.approx(0.75, abs=0.01)


def test_ppm_throughput_arithmetic():
    assert ppm_maxrate(4, 10e6) == 5e6
    assert throughput(0.0, ppm_maxrate(4, 10e6)) == 5e6
    assert ppm_maxrate(2) == 0.5


def test_ppm_harvest_higher_than_cw(params):
    # same average power, higher peak: the fourth-order term rewards PPM
    r = ppm_link(8, 100, 0.0, 0, params, rx_power=1e-5)
    assert r.p_dc > p_dc([np.sqrt(1e-5)], params)


def test_ps_beats_ts_at_high_snr():
    from scipy.optimize import brentq
    params = RectennaParams()
    ch = _flat(G1, noise=1e-13)
    x = uniform_multisine(G1, 1e-5)
    e_max = energy_arch(ch, x, ReceiverArch("IDEAL"), params)
    r_max = rate_subbands(ch, x, ReceiverArch("IDEAL"))
    for k in range(1, 20):
        target = k / 20 * e_max
        rho = brentq(lambda r: energy_arch(ch, x, ReceiverArch.ps(r), params) - target, 0, 1, xtol=1e-15)
        assert rate_subbands(ch, x, ReceiverArch.ps(rho)) >= (1 - k / 20) * r_max


def test_ts_beats_ps_at_low_snr():
    # characterization: with a convex harvester and 0 dB SNR, TS wins at mid energies
    from scipy.optimize import brentq
    params = RectennaParams()
    ch = _flat(G1, noise=1e-5)
    x = uniform_multisine(G1, 1e-5)
    e_max = energy_arch(ch, x, ReceiverArch("IDEAL"), params)
    r_max = rate_subbands(ch, x, ReceiverArch("IDEAL"))
    rho = brentq(lambda r: energy_arch(ch, x, ReceiverArch.ps(r), params) - 0.5 * e_max, 0, 1)
    assert rate_subbands(ch, x, ReceiverArch.ps(rho)) < 0.5 * r_max
