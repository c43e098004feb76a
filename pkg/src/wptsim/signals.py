"""Frequency grids, multisine precoders, energy-aware modulations and PAPR.

Waveforms are kept as complex baseband tone weights. A real passband
realization is produced only by :func:`synthesize`, mainly so that the
tone-domain moment formulas can be checked against brute-force time
averaging.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FrequencyGrid",
    "Precoder",
    "ModulationScheme",
    "TimeSeries",
    "synthesize",
    "papr",
    "uniform_multisine",
    "draw_symbols",
    "qam_constellation",
    "gray_code",
]

# f0 / delta_f must be an integer within this relative slack
_RATIO_TOL = 1e-9


@dataclass(frozen=True)
class FrequencyGrid:
    """Equispaced tones ``f0 + n * delta_f`` for ``n = 0 .. n_tones - 1``."""

    f0: float
    delta_f: float
    n_tones: int

    def __post_init__(self):
        if not self.delta_f > 0 or not self.f0 > 0:
            raise ValueError("f0 and delta_f must be positive")
        if int(self.n_tones) != self.n_tones or self.n_tones < 1:
            raise ValueError("n_tones must be a positive integer")
        ratio = self.f0 / self.delta_f
        if abs(ratio - round(ratio)) > _RATIO_TOL * max(1.0, ratio):
            raise ValueError(
                f"f0 / delta_f = {ratio!r} is not an integer; waveforms would not be periodic"
            )

    @classmethod
    def from_bandwidth(cls, f0: float, bandwidth: float, n_tones: int) -> "FrequencyGrid":
        """Grid with ``delta_f = bandwidth / n_tones``."""
        return cls(f0, bandwidth / n_tones, n_tones)

    @property
    def frequencies(self) -> np.ndarray:
        return self.f0 + self.delta_f * np.arange(self.n_tones)

    @property
    def carrier_index(self) -> int:
        """``f0`` expressed in multiples of ``delta_f``."""
        return int(round(self.f0 / self.delta_f))

    @property
    def f_max(self) -> float:
        return self.f0 + (self.n_tones - 1) * self.delta_f

    @property
    def period(self) -> float:
        return 1.0 / self.delta_f


@dataclass
class Precoder:
    """Complex tone weights ``x[m, n]`` for M transmit antennas and N tones."""

    weights: np.ndarray
    grid: FrequencyGrid

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=complex)
        if w.ndim == 1:
            w = w[np.newaxis, :]
        if w.ndim != 2:
            raise ValueError("weights must be an (M, N) array")
        if w.shape[1] != self.grid.n_tones:
            raise ValueError(
                f"weights have {w.shape[1]} tones but the grid has {self.grid.n_tones}"
            )
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        self.weights = w

    @property
    def n_antennas(self) -> int:
        return self.weights.shape[0]

    @property
    def power(self) -> float:
        """Total average transmit power ``sum |x_mn|^2``."""
        return float(np.sum(np.abs(self.weights) ** 2))

    @property
    def tone_powers(self) -> np.ndarray:
        return np.sum(np.abs(self.weights) ** 2, axis=0)

    def scaled_to(self, power: float) -> "Precoder":
        current = self.power
        if current == 0:
            raise ValueError("cannot rescale a zero precoder")
        return Precoder(self.weights * np.sqrt(power / current), self.grid)

    def antenna(self, m: int) -> "Precoder":
        return Precoder(self.weights[m : m + 1], self.grid)


_KINDS = ("CW", "OOK", "PPM", "QAM", "CSCG")


@dataclass(frozen=True)
class ModulationScheme:
    """Symbol alphabet with a given average symbol power.

    ``param`` is ``l`` for OOK and the constellation order for PPM and QAM.
    """

    kind: str
    average_symbol_power: float = 1.0
    param: float | None = None

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        if kind not in _KINDS:
            raise ValueError(f"unknown modulation {self.kind!r}; expected one of {_KINDS}")
        if self.average_symbol_power < 0:
            raise ValueError("average_symbol_power must be non-negative")
        if kind == "OOK":
            if self.param is None or self.param < 1:
                raise ValueError("OOK requires l >= 1")
        elif kind == "PPM":
            order = self.param
            if order is None or int(order) != order or order < 2 or int(order) & (int(order) - 1):
                raise ValueError("PPM order must be a power of two >= 2")
        elif kind == "QAM":
            order = self.param
            k = int(round(np.sqrt(order))) if order else 0
            if order is None or k * k != order or k < 2 or k & (k - 1):
                raise ValueError("QAM order must be a square power of two (4, 16, 64, ...)")

    @classmethod
    def ook(cls, l: float, power: float = 1.0) -> "ModulationScheme":
        return cls("OOK", power, l)

    @classmethod
    def ppm(cls, order: int, power: float = 1.0) -> "ModulationScheme":
        return cls("PPM", power, order)

    @classmethod
    def qam(cls, order: int, power: float = 1.0) -> "ModulationScheme":
        return cls("QAM", power, order)

    @property
    def order(self) -> int:
        return int(self.param)


@dataclass
class TimeSeries:
    samples: np.ndarray
    sample_rate: float
    duration: float = field(default=None)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.duration is None:
            self.duration = self.samples.size / self.sample_rate
        elif abs(self.duration * self.sample_rate - self.samples.size) > 1.0:
            raise ValueError("duration * sample_rate does not match the sample count")

    @property
    def time(self) -> np.ndarray:
        return np.arange(self.samples.size) / self.sample_rate

    def mean_power(self) -> float:
        return float(np.mean(self.samples**2))


def _tone_realization(tones: np.ndarray, grid: FrequencyGrid, oversample_factor: int):
    # one fundamental period at oversample * 4 * f_max; the sample count is an
    # exact integer because f_max is a multiple of delta_f
    k_max = grid.carrier_index + grid.n_tones - 1
    n_samples = 4 * oversample_factor * k_max
    sample_rate = n_samples * grid.delta_f
    idx = np.arange(n_samples)
    harmonics = grid.carrier_index + np.arange(grid.n_tones)
    # exact integer phase reduction keeps the sum periodic to machine precision
    phase_idx = np.outer(harmonics, idx) % n_samples
    basis = np.exp(2j * np.pi * phase_idx / n_samples)
    return np.sqrt(2.0) * np.real(tones @ basis), sample_rate


def synthesize(precoder: Precoder, oversample_factor: int = 8) -> TimeSeries:
    """Real passband waveform ``sqrt(2) Re{sum_n x_n exp(j 2 pi f_n t)}`` over one period.

    The series is sampled at ``oversample_factor * 4 * f_max``.  Only
    single-antenna precoders are accepted; synthesize each row of a
    multi-antenna precoder separately via :meth:`Precoder.antenna`.
    """
    if oversample_factor < 8 or int(oversample_factor) != oversample_factor:
        raise ValueError("oversample_factor must be an integer >= 8")
    if precoder.weights.size == 0:
        raise ValueError("empty precoder")
    if precoder.n_antennas != 1:
        raise ValueError("synthesize expects a single-antenna precoder")
    samples, rate = _tone_realization(precoder.weights[0], precoder.grid, int(oversample_factor))
    return TimeSeries(samples, rate)


def papr(ts: TimeSeries) -> float:
    """Peak-to-average power ratio in dB."""
    s = ts.samples
    if s.size == 0:
        raise ValueError("empty time series")
    mean_power = np.mean(s**2)
    if mean_power == 0:
        raise ValueError("zero power")
    return float(10 * np.log10(np.max(s**2) / mean_power))


def uniform_multisine(grid: FrequencyGrid, total_power: float, antennas: int = 1) -> Precoder:
    """In-phase multisine with the power spread evenly over antennas and tones."""
    if not total_power > 0:
        raise ValueError("total_power must be positive")
    if antennas < 1:
        raise ValueError("antennas must be >= 1")
    amp = np.sqrt(total_power / (antennas * grid.n_tones))
    return Precoder(np.full((antennas, grid.n_tones), amp, dtype=complex), grid)


def gray_code(n: np.ndarray | int):
    return np.bitwise_xor(n, np.right_shift(n, 1))


def qam_constellation(order: int) -> np.ndarray:
    """Unit-power square QAM; entry ``i`` carries the Gray-coded bit label ``i``."""
    k = int(round(np.sqrt(order)))
    half = int(np.log2(k))
    levels = 2.0 * np.arange(k) - (k - 1)
    # PAM position p carries Gray label gray_code(p) on each axis
    inv = np.empty(k, dtype=int)
    inv[gray_code(np.arange(k))] = np.arange(k)
    labels = np.arange(order)
    i_pos = inv[labels >> half]
    q_pos = inv[labels & (k - 1)]
    points = levels[i_pos] + 1j * levels[q_pos]
    return points / np.sqrt(np.mean(np.abs(points) ** 2))


def draw_symbols(scheme: ModulationScheme, count: int, seed: int | np.random.Generator) -> np.ndarray:
    """Draw ``count`` i.i.d. symbols from ``scheme``.

    For PPM the result holds the slot amplitudes of ``count`` symbols, i.e. an
    array of length ``count * order`` where each block of ``order`` slots has a
    single rectangular pulse of amplitude ``sqrt(order * P)``.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    p = scheme.average_symbol_power
    kind = scheme.kind

    if kind == "CW":
        return np.full(count, np.sqrt(p), dtype=complex)
    if kind == "OOK":
        l = float(scheme.param)
        on = rng.random(count) < 1.0 / l**2
        return np.where(on, l * np.sqrt(p), 0.0).astype(complex)
    if kind == "CSCG":
        return np.sqrt(p / 2) * (rng.standard_normal(count) + 1j * rng.standard_normal(count))
    if kind == "QAM":
        points = qam_constellation(scheme.order)
        return np.sqrt(p) * points[rng.integers(0, scheme.order, count)]
    if kind == "PPM":
        order = scheme.order
        slots = np.zeros((count, order), dtype=complex)
        slots[np.arange(count), rng.integers(0, order, count)] = np.sqrt(order * p)
        return slots.ravel()
    raise AssertionError(kind)
