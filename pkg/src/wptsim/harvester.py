"""Fourth-order rectenna model.

The rectifier output voltage is ``beta2 * E[y^2] + beta4 * E[y^4]`` where
``y(t) = sqrt(2) Re{sum_n Y_n exp(j 2 pi f_n t)}`` and ``E`` takes the DC
component.  Both moments are computed exactly from the tone amplitudes:
on an equispaced grid the only zero-frequency products in ``y^4`` pair two
positive and two negative tones with ``n0 + n1 = n2 + n3``, which gives

    E[y^4] = 3/2 * sum_k |sum_{n0 + n1 = k} Y_n0 Y_n1|^2

For modulated signals the tone amplitudes carry a leading realization axis
and the moments are averaged jointly over time and realizations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .signals import FrequencyGrid, Precoder

__all__ = [
    "RectennaParams",
    "ReceivedTones",
    "EfficiencyChain",
    "LossConfig",
    "second_moment",
    "fourth_moment",
    "tone_second_moment",
    "tone_fourth_moment",
    "v_out",
    "p_dc",
    "e3",
    "dc_combine",
    "rf_combine",
    "efficiency_chain",
]

_COMBINER_SLACK = 1e-9


@dataclass(frozen=True)
class RectennaParams:
    """Diode and antenna constants.

    Defaults (50 ohm antenna, 25.86 mV thermal voltage, ideality 1.05, 10 kohm
    load) are configuration choices.  ``beta2_override`` / ``beta4_override``
    replace the derived coefficients, e.g. ``beta4_override=0`` for a purely
    quadratic diode.  ``breakdown_power`` (W) enables a clamp on the input
    power; 1e-3 is a reasonable value for a single small-signal Schottky.
    """

    r_ant: float = 50.0
    v_t: float = 0.02586
    ideality: float = 1.05
    r_load: float = 10e3
    breakdown_power: float | None = None
    beta2_override: float | None = None
    beta4_override: float | None = None

    def __post_init__(self):
        for name in ("r_ant", "v_t", "ideality", "r_load"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.breakdown_power is not None and not self.breakdown_power > 0:
            raise ValueError("breakdown_power must be positive")
        for name in ("beta2_override", "beta4_override"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValueError(f"{name} must be non-negative")

    def _beta(self, i: int) -> float:
        return self.r_ant ** (i / 2) / (math.factorial(i) * (self.ideality * self.v_t) ** (i - 1))

    @property
    def beta2(self) -> float:
        return self._beta(2) if self.beta2_override is None else self.beta2_override

    @property
    def beta4(self) -> float:
        return self._beta(4) if self.beta4_override is None else self.beta4_override

    def quadratic(self) -> "RectennaParams":
        """Copy with the fourth-order term switched off."""
        return RectennaParams(
            self.r_ant, self.v_t, self.ideality, self.r_load,
            self.breakdown_power, self.beta2_override, 0.0,
        )


@dataclass
class ReceivedTones:
    """Complex tone amplitudes ``Y_n`` at one rectifier input.

    ``amplitudes`` has shape ``(N,)`` for a deterministic signal or
    ``(S, N)`` for S equiprobable realizations of a modulated one.
    """

    amplitudes: np.ndarray
    grid: FrequencyGrid | None = None

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.ndim not in (1, 2):
            raise ValueError("amplitudes must be (N,) or (S, N)")
        if not np.all(np.isfinite(a)):
            raise ValueError("amplitudes must be finite")
        if self.grid is not None:
            if a.shape[-1] != self.grid.n_tones:
                raise ValueError("amplitudes disagree with the grid tone count")
            # products of three positive and one negative tone must not reach DC
            if 2 * self.grid.carrier_index <= self.grid.n_tones - 1:
                raise ValueError("grid too wide for its carrier: need 2 f0 > (N - 1) delta_f")
        self.amplitudes = a

    def scaled(self, c) -> "ReceivedTones":
        return ReceivedTones(self.amplitudes * c, self.grid)


def _amps(tones) -> np.ndarray:
    if isinstance(tones, ReceivedTones):
        return tones.amplitudes
    return np.asarray(tones, dtype=complex)


def tone_second_moment(amplitudes) -> np.ndarray:
    """Per-realization ``sum_n |Y_n|^2`` over the last axis."""
    return np.sum(np.abs(amplitudes) ** 2, axis=-1)


def tone_fourth_moment(amplitudes) -> np.ndarray:
    """Per-realization DC component of ``y(t)^4`` over the last axis."""
    y = np.asarray(amplitudes, dtype=complex)
    n = y.shape[-1]
    pair_sums = np.zeros(y.shape[:-1] + (2 * n - 1,), dtype=complex)
    for n0 in range(n):
        pair_sums[..., n0 : n0 + n] += y[..., n0, None] * y
    return 1.5 * np.sum(np.abs(pair_sums) ** 2, axis=-1)


def second_moment(tones) -> float:
    """Average received power ``E[y^2] = sum_n |Y_n|^2`` (realization-averaged)."""
    return float(np.mean(tone_second_moment(_amps(tones))))


def fourth_moment(tones) -> float:
    return float(np.mean(tone_fourth_moment(_amps(tones))))


def v_out(tones, params: RectennaParams) -> float:
    """Rectifier output DC voltage, clamped at the breakdown power if configured."""
    y = _amps(tones)
    p_in = second_moment(y)
    if params.breakdown_power is not None and p_in > params.breakdown_power:
        y = y * np.sqrt(params.breakdown_power / p_in)
        p_in = params.breakdown_power
    return params.beta2 * p_in + params.beta4 * fourth_moment(y)


def p_dc(tones, params: RectennaParams) -> float:
    return v_out(tones, params) ** 2 / params.r_load


def e3(tones, params: RectennaParams) -> float:
    """RF-to-DC conversion efficiency ``p_dc / E[y^2]``."""
    p_in = second_moment(tones)
    if p_in == 0:
        raise ValueError("e3 is undefined for zero input power")
    return p_dc(tones, params) / p_in


def _per_antenna(per_antenna_tones) -> np.ndarray:
    if isinstance(per_antenna_tones, np.ndarray):
        return per_antenna_tones
    arrays = [_amps(t) for t in per_antenna_tones]
    # (Q, N) or (Q, S, N) -> move Q next to the tone axis
    stacked = np.stack(arrays)
    return stacked if stacked.ndim == 2 else np.moveaxis(stacked, 0, -2)


def dc_combine(per_antenna_tones: Sequence | np.ndarray, params: RectennaParams) -> float:
    """One rectifier per antenna, DC outputs summed: ``sum_q v_out,q^2 / R_L``.

    Accepts a list of per-antenna :class:`ReceivedTones` or an array whose
    second-to-last axis indexes antennas.
    """
    y = _per_antenna(per_antenna_tones)
    return float(sum(p_dc(y[..., q, :], params) for q in range(y.shape[-2])))


def combine_tones(per_antenna_tones, combiner) -> np.ndarray:
    """Tone amplitudes after an RF combiner: ``sum_q conj(w_q) Y_qn``."""
    y = _per_antenna(per_antenna_tones)
    w = np.asarray(combiner, dtype=complex)
    if w.shape != (y.shape[-2],):
        raise ValueError(f"combiner must have length {y.shape[-2]}")
    return np.einsum("q,...qn->...n", w.conj(), y)


def rf_combine(per_antenna_tones, combiner, params: RectennaParams) -> float:
    """Single rectifier fed by a tone-independent passive combiner (``||w||^2 <= 1``)."""
    w = np.asarray(combiner, dtype=complex)
    if np.sum(np.abs(w) ** 2) > 1 + _COMBINER_SLACK:
        raise ValueError("combiner norm exceeds 1; a passive RF combiner cannot add power")
    return p_dc(combine_tones(per_antenna_tones, w), params)


@dataclass(frozen=True)
class LossConfig:
    """Fixed conversion efficiencies: DC-to-RF (e1), extra RF-to-RF (e2), DC-to-DC (e4)."""

    e1: float = 1.0
    e2: float = 1.0
    e4: float = 1.0


@dataclass
class EfficiencyChain:
    e1: float
    e2: float
    e3: float
    e4: float
    e2_channel: float = float("nan")
    powers: dict = field(default_factory=dict)

    @property
    def e(self) -> float:
        return self.e1 * self.e2 * self.e3 * self.e4


def efficiency_chain(
    p_dc_t: float,
    precoder: Precoder,
    channel,
    params: RectennaParams,
    losses: LossConfig = LossConfig(),
    rx: int = 0,
) -> EfficiencyChain:
    """End-to-end efficiency ledger for one transmitter/receiver pair.

    ``e2`` in the product is the configured RF-to-RF factor; the propagation
    gain ``P_rf^r / P_rf^t`` is reported separately as ``e2_channel``.  The
    rectifier sees the channel output attenuated by the configured ``e2``.
    """
    p_rf_t = precoder.power
    if p_rf_t == 0 or p_dc_t <= 0:
        raise ValueError("transmit powers must be positive")
    y = channel.received(precoder.weights)[rx]
    e2_channel = second_moment(y) / p_rf_t
    tones = ReceivedTones(y * np.sqrt(losses.e2), channel.grid)
    p_rf_r = second_moment(tones)
    p_dc_r = p_dc(tones, params)
    chain = EfficiencyChain(
        losses.e1,
        losses.e2,
        p_dc_r / p_rf_r if p_rf_r > 0 else 0.0,
        losses.e4,
        e2_channel,
        {
            "p_dc_t": p_dc_t,
            "p_rf_t": p_rf_t,
            "p_rf_r": p_rf_r,
            "p_dc_r": p_dc_r,
            "p_dc_s": losses.e4 * p_dc_r,
        },
    )
    return chain
