import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_force_moments
from wptsim.harvester import (
    LossConfig,
    RectennaParams,
    ReceivedTones,
    dc_combine,
    e3,
    efficiency_chain,
    fourth_moment,
    p_dc,
    rf_combine,
    second_moment,
    v_out,
)
from wptsim.channel import generate
from wptsim.signals import FrequencyGrid, Precoder


def test_default_coefficients():
    p = RectennaParams()
    nvt = 1.05 * 0.02586
    assert p.beta2 == pytest.approx(50 / (2 * nvt))
    assert p.beta4 == pytest.approx(50**2 / (24 * nvt**3))


def test_cw_closed_form(params):
    # single tone of power P: E[y^2] = P, E[y^4] = 3/2 P^2
    p = 1e-5
    y = [np.sqrt(p) * np.exp(0.7j)]
    assert second_moment(y) == pytest.approx(p)
    assert fourth_moment(y) == pytest.approx(1.5 * p**2)
    v = params.beta2 * p + params.beta4 * 1.5 * p**2
    assert p_dc(y, params) == pytest.approx(v**2 / params.r_load)


def test_fourth_moment_vs_brute_force(rng, small_grid):
    for _ in range(50):
        a = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        m2, m4 = brute_force_moments(a, small_grid)
        assert second_moment(a) == pytest.approx(m2, rel=1e-10)
        assert fourth_moment(a) == pytest.approx(m4, rel=1e-10)


def test_inphase_two_tone_closed_form():
    # equal in-phase tones of amplitude a: E[y^4] = 1.5 * (a^4 + 4a^4 + a^4) = 9 a^4
    a = 0.3
    assert fourth_moment([a, a]) == pytest.approx(9 * a**4)


def test_phase_shift_invariance(rng):
    # a linear phase across tones is a time shift and leaves the moments alone
    a = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    shifted = a * np.exp(1j * (0.4 + 1.3 * np.arange(6)))
    assert fourth_moment(shifted) == pytest.approx(fourth_moment(a), rel=1e-12)


def test_realization_averaging():
    rows = np.array([[1.0, 0.0], [0.0, 2.0]])
    assert second_moment(rows) == pytest.approx(2.5)
    assert fourth_moment(rows) == pytest.approx(0.5 * (1.5 + 1.5 * 16))


def test_grid_condition():
    with pytest.raises(ValueError):
        ReceivedTones(np.ones(8), FrequencyGrid(3.0, 1.0, 8))
    ReceivedTones(np.ones(8), FrequencyGrid(4.0, 1.0, 8))
    with pytest.raises(ValueError):
        ReceivedTones([np.nan])


def test_quadratic_model(params):
    q = params.quadratic()
    assert q.beta4 == 0
    assert v_out([1e-3], q) == pytest.approx(params.beta2 * 1e-6)


def test_breakdown_clamp():
    p = RectennaParams(breakdown_power=1e-3)
    assert v_out([1.0], p) == pytest.approx(v_out([np.sqrt(1e-3)], p))


def test_e3(params):
    with pytest.raises(ValueError):
        e3([0.0], params)
    y = [1e-3, 1e-3j]
    assert e3(y, params) == pytest.approx(p_dc(y, params) / 2e-6)


def test_dc_combine_sums_rectifiers(params):
    a = [ReceivedTones([1e-3]), ReceivedTones([2e-3, 0][:1])]
    assert dc_combine(a, params) == pytest.approx(p_dc([1e-3], params) + p_dc([2e-3], params))
    arr = np.array([[1e-3], [2e-3]])
    assert dc_combine(arr, params) == pytest.approx(dc_combine(a, params))


def test_rf_combine_equal_antennas_factor_two():
    q = RectennaParams(beta4_override=0.0)
    y = np.array([[1e-3], [1e-3]])
    w = np.array([1, 1]) / np.sqrt(2)
    assert rf_combine(y, w, q) == pytest.approx(2 * dc_combine(y, q), rel=1e-12)


def test_rf_combine_norm_check(params):
    with pytest.raises(ValueError):
        rf_combine(np.ones((2, 1)) * 1e-3, [1.0, 0.5], params)


def test_efficiency_chain_identity(params):
    g = FrequencyGrid(2.4e9, 1e6, 4)
    ch = generate(0, "flat", 1, 1, g)
    x = Precoder(np.full(4, 0.5), g)
    chain = efficiency_chain(1.0, x, ch, params)
    assert chain.e2_channel == pytest.approx(1.0)
    assert chain.e == pytest.approx(chain.e3)
    assert chain.powers["p_dc_s"] == pytest.approx(chain.powers["p_dc_r"])


def test_efficiency_chain_losses(params):
    g = FrequencyGrid(2.4e9, 1e6, 2)
    ch = generate(0, "flat", 1, 1, g)
    x = Precoder(np.full(2, 0.01), g)
    chain = efficiency_chain(1.0, x, ch, params, LossConfig(0.5, 0.25, 0.8))
    assert chain.powers["p_rf_r"] == pytest.approx(0.25 * 2e-4)
    assert chain.e == pytest.approx(0.5 * 0.25 * chain.e3 * 0.8)


@pytest.mark.parametrize("r_ant, ideality", [(50.0, 1.05), (75.0, 1.2), (25.0, 1.0)])
def test_jensen_across_diode_constants(r_ant, ideality, rng):
    p = RectennaParams(r_ant=r_ant, ideality=ideality)
    for _ in range(50):
        a = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        assert fourth_moment(a) >= second_moment(a) ** 2
        assert v_out(a, p) >= p.beta2 * second_moment(a)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 10), st.floats(0, 2 * math.pi)), min_size=1, max_size=8))
def test_fourth_moment_bounds(pairs):
    a = np.array([r * np.exp(1j * t) for r, t in pairs])
    m2, m4 = second_moment(a), fourth_moment(a)
    # 1.5 P^2 for a single tone is the lower end once tones spread; upper end is all in phase
    assert m4 >= m2**2 * (1 - 1e-9) - 1e-300
    assert m4 <= 1.5 * np.sum(np.abs(a)) ** 4 * (1 + 1e-9) + 1e-300
