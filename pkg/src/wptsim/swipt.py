"""SWIPT receivers, subband rates, superposed waveforms, PPM and R-E regions.

Rates use a Gaussian-input AWGN model per subband.  Energies come from the
rectenna model in :mod:`wptsim.harvester`, averaged over symbol draws for
modulated signals.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .channel import ChannelState
from .harvester import RectennaParams, ReceivedTones, p_dc, v_out
from .signals import ModulationScheme, Precoder, draw_symbols, gray_code

__all__ = [
    "ReceiverArch",
    "REPoint",
    "SuperposedWaveform",
    "PPMResult",
    "superpose",
    "received_tones",
    "superposed_p_dc",
    "rate_subbands",
    "energy_arch",
    "re_region",
    "pareto_frontier",
    "write_re_csv",
    "ppm_maxrate",
    "ppm_link",
    "throughput",
]

_ARCHS = ("IDEAL", "TS", "PS", "INTEGRATED")


@dataclass(frozen=True)
class ReceiverArch:
    """Receiver architecture; ``param`` is the WPT time fraction for TS and the harvester power share for PS."""

    kind: str
    param: float | None = None

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        if kind not in _ARCHS:
            raise ValueError(f"unknown receiver architecture {self.kind!r}")
        if kind in ("TS", "PS"):
            if self.param is None or not 0.0 <= self.param <= 1.0:
                raise ValueError(f"{kind} needs a parameter in [0, 1]")

    @classmethod
    def ts(cls, tau: float) -> "ReceiverArch":
        return cls("TS", tau)

    @classmethod
    def ps(cls, rho: float) -> "ReceiverArch":
        return cls("PS", rho)


@dataclass(frozen=True)
class REPoint:
    rate: float
    energy: float
    arch: str = ""
    param: float = float("nan")

    def __post_init__(self):
        if self.rate < 0 or self.energy < 0:
            raise ValueError("rate and energy must be non-negative")


@dataclass(frozen=True)
class SuperposedWaveform:
    """Deterministic multisine plus a modulated multicarrier signal.

    A realization is ``sqrt(ratio) * a + sqrt(1 - ratio) * b * s`` where ``a``
    is ``power_part``, ``b`` is ``info_part`` (both scaled to the total power)
    and ``s`` holds i.i.d. unit-power symbols, one per tone.
    """

    power_part: Precoder
    info_part: Precoder
    scheme: ModulationScheme
    power_ratio: float

    def __post_init__(self):
        if not 0.0 <= self.power_ratio <= 1.0:
            raise ValueError("power_ratio must lie in [0, 1]")
        if self.power_part.weights.shape != self.info_part.weights.shape:
            raise ValueError("power and information parts must have the same shape")

    @property
    def grid(self):
        return self.power_part.grid

    @property
    def total_power(self) -> float:
        return self.power_part.power

    def with_ratio(self, ratio: float) -> "SuperposedWaveform":
        return replace(self, power_ratio=ratio)

    def realizations(self, count: int, seed) -> np.ndarray:
        """(count, M, N) transmit weights."""
        n = self.grid.n_tones
        unit = ModulationScheme(self.scheme.kind, 1.0, self.scheme.param)
        rng = np.random.default_rng(seed)
        if unit.kind == "PPM":
            raise ValueError("PPM is a time-slot modulation; use ppm_link")
        symbols = draw_symbols(unit, count * n, rng).reshape(count, 1, n)
        a = np.sqrt(self.power_ratio) * self.power_part.weights
        b = np.sqrt(1.0 - self.power_ratio) * self.info_part.weights
        return a[None] + b[None] * symbols


def superpose(
    power_precoder: Precoder,
    info_scheme: ModulationScheme,
    ratio: float,
    power: float,
    info_template: Precoder | None = None,
) -> SuperposedWaveform:
    """Combine a WPT multisine with a modulated information signal.

    ``ratio`` is the share of ``power`` on the multisine.  The information
    template defaults to equal power per tone along the multisine's per-tone
    beam direction.
    """
    if not power > 0:
        raise ValueError("power must be positive")
    w = power_precoder.weights
    if info_template is None:
        norms = np.linalg.norm(w, axis=0)
        m = w.shape[0]
        dirs = np.where(norms > 0, w / np.where(norms > 0, norms, 1.0), 1.0 / np.sqrt(m))
        info_template = Precoder(dirs, power_precoder.grid)
    return SuperposedWaveform(
        power_precoder.scaled_to(power),
        info_template.scaled_to(power),
        info_scheme,
        ratio,
    )


def received_tones(channel: ChannelState, waveform, rx: int = 0, count: int = 20000, seed=0) -> ReceivedTones:
    """Rectifier-input tone amplitudes for a precoder or a superposed waveform."""
    if isinstance(waveform, Precoder):
        return ReceivedTones(channel.received(waveform.weights)[rx], channel.grid)
    if isinstance(waveform, SuperposedWaveform):
        if waveform.power_ratio == 1.0:
            return ReceivedTones(channel.received(waveform.power_part.weights)[rx], channel.grid)
        y = channel.received(waveform.realizations(count, seed))[:, rx, :]
        return ReceivedTones(y, channel.grid)
    raise TypeError(f"unsupported waveform {type(waveform).__name__}")


def superposed_p_dc(channel, waveform: SuperposedWaveform, params: RectennaParams, count: int = 20000, seed=0, rx: int = 0) -> float:
    """Expected DC power of a superposed waveform, averaged over ``count`` symbol draws."""
    return p_dc(received_tones(channel, waveform, rx, count, seed), params)


def _info_gains(channel: ChannelState, waveform, rx: int) -> np.ndarray:
    """Received information power per tone."""
    if isinstance(waveform, Precoder):
        y = channel.received(waveform.weights)[rx]
        return np.abs(y) ** 2
    if isinstance(waveform, SuperposedWaveform):
        y = channel.received(waveform.info_part.weights)[rx]
        return (1.0 - waveform.power_ratio) * np.abs(y) ** 2
    raise TypeError(f"unsupported waveform {type(waveform).__name__}")


def rate_subbands(channel: ChannelState, waveform, arch: ReceiverArch, noise_power: float | None = None, rx: int = 0) -> float:
    """Sum over tones of ``log2(1 + kappa * p_n |h_n|^2 / noise)`` in bits/s/Hz.

    ``kappa`` is ``1 - rho`` for PS and 1 otherwise; TS additionally scales
    the sum by ``1 - tau``.
    """
    if arch.kind == "INTEGRATED":
        raise ValueError("the integrated receiver has no coherent decoder; use ppm_link")
    sigma2 = channel.noise_power if noise_power is None else noise_power
    if not sigma2 > 0:
        raise ValueError("noise power must be positive")
    gains = _info_gains(channel, waveform, rx)
    kappa = 1.0 - arch.param if arch.kind == "PS" else 1.0
    rate = float(np.sum(np.log2(1.0 + kappa * gains / sigma2)))
    if arch.kind == "TS":
        rate *= 1.0 - arch.param
    return rate


def energy_arch(
    channel: ChannelState,
    waveform,
    arch: ReceiverArch,
    params: RectennaParams,
    wpt_waveform=None,
    harvest_during_wit: bool = False,
    count: int = 20000,
    seed=0,
    rx: int = 0,
) -> float:
    """Delivered DC power for a receiver architecture.

    PS scales the harvester input amplitudes by ``sqrt(rho)``.  TS harvests
    ``wpt_waveform`` (default: ``waveform``) for a fraction ``tau`` of the
    time; the switch routes the WIT slot entirely to the decoder unless
    ``harvest_during_wit`` is set.
    """
    tones = received_tones(channel, waveform, rx, count, seed)
    if arch.kind in ("IDEAL", "INTEGRATED"):
        return p_dc(tones, params)
    if arch.kind == "PS":
        return p_dc(tones.scaled(np.sqrt(arch.param)), params)
    wpt_tones = tones if wpt_waveform is None else received_tones(channel, wpt_waveform, rx, count, seed)
    energy = arch.param * p_dc(wpt_tones, params)
    if harvest_during_wit:
        energy += (1.0 - arch.param) * p_dc(tones, params)
    return energy


def re_region(
    channel: ChannelState,
    waveform,
    arch_kind: str,
    grid: Sequence[float],
    noise_power: float | None,
    params: RectennaParams,
    wpt_waveform=None,
    ratios: Sequence[float] | None = None,
    harvest_during_wit: bool = False,
    count: int = 20000,
    seed=0,
    rx: int = 0,
) -> list[REPoint]:
    """Rate-energy points for a TS or PS receiver swept over ``grid``.

    With a superposed waveform, ``ratios`` additionally sweeps its power
    ratio.  Points are sorted by energy (ties: higher rate first); use
    :func:`pareto_frontier` to keep the undominated ones.
    """
    kind = arch_kind.upper()
    if kind not in ("TS", "PS"):
        raise ValueError("re_region sweeps TS or PS receivers")
    waveforms = [waveform]
    if ratios is not None:
        if not isinstance(waveform, SuperposedWaveform):
            raise ValueError("ratios requires a superposed waveform")
        waveforms = [waveform.with_ratio(r) for r in ratios]

    points = []
    for wf in waveforms:
        tones = received_tones(channel, wf, rx, count, seed)
        ideal_rate = rate_subbands(channel, wf, ReceiverArch("IDEAL"), noise_power, rx)
        if kind == "TS":
            wpt_tones = tones if wpt_waveform is None else received_tones(channel, wpt_waveform, rx, count, seed)
            e_wpt = p_dc(wpt_tones, params)
            e_wit = p_dc(tones, params) if harvest_during_wit else 0.0
        for value in grid:
            arch = ReceiverArch(kind, float(value))
            if kind == "TS":
                rate = (1.0 - value) * ideal_rate
                energy = value * e_wpt + (1.0 - value) * e_wit
            else:
                rate = rate_subbands(channel, wf, arch, noise_power, rx)
                energy = p_dc(tones.scaled(np.sqrt(value)), params)
            label = kind if ratios is None else f"{kind}@ratio={wf.power_ratio:g}"
            points.append(REPoint(rate, energy, label, float(value)))
    points.sort(key=lambda p: (p.energy, -p.rate))
    return points


def pareto_frontier(points: Iterable[REPoint]) -> list[REPoint]:
    """Points not dominated in both rate and energy, sorted by increasing energy."""
    ordered = sorted(points, key=lambda p: (-p.energy, -p.rate))
    front = []
    best_rate = -np.inf
    for p in ordered:
        if p.rate > best_rate:
            front.append(p)
            best_rate = p.rate
    return front[::-1]


def write_re_csv(points: Iterable[REPoint], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["arch", "param", "rate_bps_hz", "energy_w"])
        for p in points:
            writer.writerow([p.arch, repr(p.param), repr(p.rate), repr(p.energy)])


def ppm_maxrate(order: int, slot_rate: float | None = None) -> float:
    """``log2(order) / order`` bits per slot time, or bits/s given a slot rate."""
    rate = np.log2(order) / order
    return float(rate if slot_rate is None else rate * slot_rate)


def throughput(ber: float, maxrate: float) -> float:
    return (1.0 - ber) * maxrate


@dataclass(frozen=True)
class PPMResult:
    ber: float
    ser: float
    throughput: float
    maxrate: float
    p_dc: float


def ppm_link(
    order: int,
    symbol_count: int,
    noise_std: float,
    seed,
    params: RectennaParams,
    rx_power: float = 1e-5,
    slot_rate: float | None = None,
) -> PPMResult:
    """Integrated-receiver PPM link.

    Each symbol puts a rectangular CW pulse of power ``order * rx_power`` in
    one of ``order`` slots.  The rectifier output of every slot gets additive
    Gaussian noise of std ``noise_std`` (volts) and the decoder picks the
    largest slot.  Slot positions carry Gray-coded labels.
    """
    scheme = ModulationScheme.ppm(order, rx_power)
    slots = draw_symbols(scheme, symbol_count, np.random.default_rng(seed)).reshape(symbol_count, order)
    # per-slot rectifier output; realizations are slots with a single CW tone
    pulse = np.array([[np.sqrt(order * rx_power)]])
    v_pulse = v_out(pulse[0], params)
    v = np.where(np.abs(slots) > 0, v_pulse, 0.0)
    noise_rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
    v = v + noise_std * noise_rng.standard_normal(v.shape)
    sent = np.argmax(np.abs(slots), axis=1)
    decided = np.argmax(v, axis=1)
    diff = gray_code(sent) ^ gray_code(decided)
    bits_per_symbol = int(np.log2(order))
    bit_errors = sum(int(np.sum((diff >> k) & 1)) for k in range(bits_per_symbol))
    ber = bit_errors / (symbol_count * bits_per_symbol)
    ser = float(np.mean(sent != decided))
    maxrate = ppm_maxrate(order, slot_rate)
    # full-signal harvesting: slot realizations averaged jointly
    harvested = ReceivedTones(np.vstack([pulse, np.zeros((order - 1, 1))]))
    return PPMResult(ber, ser, throughput(ber, maxrate), maxrate, p_dc(harvested, params))
