"""Power probing with limited feedback.

Each frame starts with a training phase in which the transmitter sends one
codeword per slot. The receiver measures its DC output for each slot,
feeds back the index of the best codeword, and the transmitter then uses
that codeword for the WPT phase.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelState
from .harvester import RectennaParams
from .optimizer import DEFAULT_BETAS, received_p_dc, smf
from .signals import FrequencyGrid, Precoder

__all__ = [
    "Codebook",
    "Frame",
    "ProbeModel",
    "ClosedLoopReport",
    "build_codebook",
    "run_closed_loop",
    "perfect_csit_p_dc",
]

_POWER_RTOL = 1e-9


@dataclass
class Codebook:
    entries: list
    bits: int

    def __post_init__(self):
        if self.bits < 1:
            raise ValueError("bits must be >= 1")
        if len(self.entries) > 2**self.bits:
            raise ValueError(f"{len(self.entries)} entries do not fit in {self.bits} bits")

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def check(self, power: float) -> None:
        """Raise if an entry violates the power constraint or duplicates another."""
        for i, x in enumerate(self.entries):
            if abs(x.power - power) > _POWER_RTOL * power:
                raise ValueError(f"entry {i} has power {x.power}, expected {power}")
        for i in range(len(self.entries)):
            for j in range(i):
                if np.allclose(self.entries[i].weights, self.entries[j].weights):
                    raise ValueError(f"entries {j} and {i} coincide")


@dataclass(frozen=True)
class Frame:
    """Training slots (one per codeword) followed by a WPT phase."""

    slot_duration: float = 1e-3
    wpt_duration: float = 1.0
    period: float | None = None

    def __post_init__(self):
        if self.slot_duration <= 0 or self.wpt_duration < 0:
            raise ValueError("durations must be positive")

    def frame_period(self, n_slots: int) -> float:
        minimum = n_slots * self.slot_duration + self.wpt_duration
        if self.period is None:
            return minimum
        if self.period < minimum * (1 - 1e-12):
            raise ValueError(f"period {self.period} is shorter than training + WPT ({minimum})")
        return self.period


@dataclass(frozen=True)
class ProbeModel:
    """Multiplicative lognormal error on each DC measurement (``noise_std`` is relative)."""

    noise_std: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")

    def factors(self, count: int) -> np.ndarray:
        if self.noise_std == 0:
            return np.ones(count)
        # mean 1, std noise_std
        sigma = np.sqrt(np.log1p(self.noise_std**2))
        z = np.random.default_rng(self.seed).standard_normal(count)
        return np.exp(sigma * z - sigma**2 / 2)


@dataclass
class ClosedLoopReport:
    selected_index: int
    probed_powers: list
    wpt_p_dc: float
    frame_avg_p_dc: float
    true_powers: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "selected_index": self.selected_index,
            "probed_powers_w": list(self.probed_powers),
            "wpt_p_dc_w": self.wpt_p_dc,
            "frame_avg_p_dc_w": self.frame_avg_p_dc,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @property
    def energy_ledger(self) -> dict:
        return {"wpt_p_dc_w": self.wpt_p_dc, "frame_avg_p_dc_w": self.frame_avg_p_dc}


def _dft_beams(n_antennas: int, count: int) -> np.ndarray:
    k = np.arange(count)[:, None]
    m = np.arange(1, n_antennas + 1)[None, :]
    return np.exp(2j * np.pi * k * m / count) / np.sqrt(n_antennas)


def _allocations(n_tones: int) -> list:
    allocs = [np.full(n_tones, 1.0 / n_tones)]
    if n_tones > 1:
        allocs += [np.eye(n_tones)[n] for n in range(n_tones)]
    return allocs


def build_codebook(
    kind: str,
    n_antennas: int,
    n_tones: int,
    power: float,
    bits: int,
    seed: int = 0,
    grid: FrequencyGrid | None = None,
    betas=DEFAULT_BETAS,
) -> Codebook:
    """Codebook of at most ``2**bits`` power-feasible precoders.

    ``"dft"``: oversampled DFT beams (the same beam on every tone) crossed
    with tone power allocations (uniform, then each single tone).
    ``"nested-random"``: SMF precoders designed for i.i.d. Rayleigh channel
    draws with ``beta`` cycling through ``betas``; entries come from a single
    seeded stream, so the book for ``b`` bits is a prefix of the book for
    ``b + 1`` bits.
    """
    if bits < 1:
        raise ValueError("bits must be >= 1")
    if grid is None:
        grid = FrequencyGrid(2.4e9, 10e6 / n_tones, n_tones)
    size = 2**bits
    entries = []
    if kind == "dft":
        allocs = _allocations(n_tones)
        n_beams = max(2, -(-size // len(allocs)))
        beams = _dft_beams(n_antennas, n_beams)
        for alloc in allocs:
            for beam in beams:
                if len(entries) == size:
                    break
                entries.append(Precoder(np.outer(beam, np.sqrt(alloc * power)), grid))
    elif kind == "nested-random":
        rng = np.random.default_rng(seed)
        for i in range(size):
            h = (rng.standard_normal((1, n_antennas, n_tones)) + 1j * rng.standard_normal((1, n_antennas, n_tones))) / np.sqrt(2)
            entries.append(smf(ChannelState(h, grid), betas[i % len(betas)], power))
    else:
        raise ValueError(f"unknown codebook kind {kind!r}")
    return Codebook(entries, bits)


def run_closed_loop(
    channel: ChannelState,
    codebook: Codebook,
    frame: Frame,
    probe: ProbeModel,
    params: RectennaParams,
) -> ClosedLoopReport:
    """One training + WPT frame.

    Each codeword is probed once; the measurement is the true DC power times
    lognormal noise.  The receiver feeds back the argmax (lowest index on
    ties).  ``wpt_p_dc`` is the noiseless DC power of the selected codeword
    and ``frame_avg_p_dc`` averages delivered power over the whole frame,
    training slots included.
    """
    if len(codebook) == 0:
        raise ValueError("empty codebook")
    true_powers = np.array([received_p_dc(channel, x, params) for x in codebook.entries])
    probed = true_powers * probe.factors(len(true_powers))
    selected = int(np.argmax(probed))
    wpt = float(true_powers[selected])
    period = frame.frame_period(len(true_powers))
    energy = frame.slot_duration * true_powers.sum() + frame.wpt_duration * wpt
    return ClosedLoopReport(selected, probed.tolist(), wpt, float(energy / period), true_powers.tolist())


def perfect_csit_p_dc(channel: ChannelState, power: float, params: RectennaParams, betas=DEFAULT_BETAS) -> float:
    """Reference with the channel known at the transmitter: best SMF over ``betas``."""
    return max(received_p_dc(channel, smf(channel, b, power), params) for b in betas)
