"""Frequency-domain channel states, multipath taps and RIS composition."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .signals import FrequencyGrid

__all__ = [
    "PathTap",
    "ChannelState",
    "RisState",
    "RisLinks",
    "ChannelFileError",
    "freq_response",
    "compose_ris",
    "generate",
    "save",
    "load",
    "free_space_gain",
]

_UNITARY_TOL = 1e-9


@dataclass(frozen=True)
class PathTap:
    delay: float
    gain: float
    phase: float = 0.0

    def __post_init__(self):
        if self.delay < 0 or self.gain < 0:
            raise ValueError("tap delay and gain must be non-negative")


@dataclass
class ChannelState:
    """Per-tone responses ``h[q, m, n]`` (receive x transmit x tone)."""

    responses: np.ndarray
    grid: FrequencyGrid
    noise_power: float = 1e-10

    def __post_init__(self):
        h = np.asarray(self.responses, dtype=complex)
        if h.ndim != 3:
            raise ValueError("responses must have shape (Q, M, N)")
        if h.shape[2] != self.grid.n_tones:
            raise ValueError(f"responses have {h.shape[2]} tones, grid has {self.grid.n_tones}")
        if not np.all(np.isfinite(h)):
            raise ValueError("responses must be finite")
        if self.noise_power < 0:
            raise ValueError("noise_power must be non-negative")
        self.responses = h

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.responses.shape

    @property
    def n_rx(self) -> int:
        return self.responses.shape[0]

    @property
    def n_tx(self) -> int:
        return self.responses.shape[1]

    def row(self, q: int = 0) -> np.ndarray:
        """(M, N) channel seen by receive antenna ``q``."""
        return self.responses[q]

    def scaled(self, amplitude_gain: float) -> "ChannelState":
        return ChannelState(self.responses * amplitude_gain, self.grid, self.noise_power)

    def received(self, weights: np.ndarray) -> np.ndarray:
        """Received tone amplitudes ``Y[..., q, n] = sum_m h[q, m, n] x[..., m, n]``."""
        return np.einsum("qmn,...mn->...qn", self.responses, weights)


class RisState:
    """Scattering matrix of an R-element reconfigurable surface.

    Modes: ``"full"`` (symmetric unitary), ``"diagonal"`` (unit-modulus
    diagonal) and ``"one-bit"`` (diagonal entries +1 for a PIN diode OFF and
    -1 for ON).
    """

    MODES = ("full", "diagonal", "one-bit")

    def __init__(self, theta, mode: str = "full"):
        theta = np.asarray(theta, dtype=complex)
        if mode not in self.MODES:
            raise ValueError(f"unknown RIS mode {mode!r}")
        if theta.ndim != 2 or theta.shape[0] != theta.shape[1]:
            raise ValueError("theta must be square")
        r = theta.shape[0]
        if np.linalg.norm(theta - theta.T) > _UNITARY_TOL:
            raise ValueError("theta must be symmetric")
        if np.linalg.norm(theta.conj().T @ theta - np.eye(r)) > _UNITARY_TOL:
            raise ValueError("theta must be unitary")
        if mode != "full":
            off = theta - np.diag(np.diag(theta))
            if np.any(off != 0):
                raise ValueError(f"{mode} mode requires a diagonal theta")
        if mode == "one-bit":
            d = np.diag(theta)
            if not np.all((d == 1) | (d == -1)):
                raise ValueError("one-bit mode requires diagonal entries in {+1, -1}")
        self.theta = theta
        self.mode = mode

    @classmethod
    def from_phases(cls, phases) -> "RisState":
        return cls(np.diag(np.exp(1j * np.asarray(phases, dtype=float))), "diagonal")

    @classmethod
    def from_bits(cls, bits) -> "RisState":
        """One-bit surface from PIN diode states (0 = OFF -> +1, 1 = ON -> -1)."""
        bits = np.asarray(bits, dtype=int)
        return cls(np.diag(1.0 - 2.0 * bits), "one-bit")

    @property
    def n_elements(self) -> int:
        return self.theta.shape[0]

    @property
    def bits(self) -> np.ndarray:
        if self.mode != "one-bit":
            raise ValueError("bits are only defined in one-bit mode")
        return (np.real(np.diag(self.theta)) < 0).astype(int)

    def __repr__(self):
        return f"RisState(mode={self.mode!r}, R={self.n_elements})"


@dataclass
class RisLinks:
    """Direct (Q,M,N), RIS-to-receiver (Q,R,N) and transmitter-to-RIS (R,M,N) channels."""

    g_d: np.ndarray
    g_r: np.ndarray
    g_i: np.ndarray
    grid: FrequencyGrid
    noise_power: float = 1e-10

    def __post_init__(self):
        self.g_d = np.asarray(self.g_d, dtype=complex)
        self.g_r = np.asarray(self.g_r, dtype=complex)
        self.g_i = np.asarray(self.g_i, dtype=complex)
        q, m, n = self.g_d.shape
        if self.g_r.shape[0] != q or self.g_r.shape[2] != n:
            raise ValueError("g_r must have shape (Q, R, N)")
        r = self.g_r.shape[1]
        if self.g_i.shape != (r, m, n):
            raise ValueError(f"g_i must have shape ({r}, {m}, {n})")
        if n != self.grid.n_tones:
            raise ValueError("links disagree with the grid tone count")

    @property
    def n_elements(self) -> int:
        return self.g_r.shape[1]


def freq_response(
    taps: Sequence[Sequence[Sequence[PathTap]]],
    grid: FrequencyGrid,
    noise_power: float = 1e-10,
) -> ChannelState:
    """Per-tone response from path taps given as ``taps[q][m] -> [PathTap, ...]``.

    ``h[q, m, n] = sum_l gain_l * exp(j(-2 pi f_n delay_l + phase_l))``.
    """
    f = grid.frequencies
    n_rx = len(taps)
    n_tx = len(taps[0]) if n_rx else 0
    if n_rx == 0 or n_tx == 0:
        raise ValueError("taps must be a non-empty Q x M nested list")
    h = np.zeros((n_rx, n_tx, grid.n_tones), dtype=complex)
    for q, row in enumerate(taps):
        if len(row) != n_tx:
            raise ValueError("every receive antenna needs taps for all transmit antennas")
        for m, pair in enumerate(row):
            if len(pair) == 0:
                raise ValueError(f"no taps for antenna pair ({q}, {m})")
            for tap in pair:
                h[q, m] += tap.gain * np.exp(1j * (tap.phase - 2 * np.pi * f * tap.delay))
    return ChannelState(h, grid, noise_power)


def compose_ris(links: RisLinks, ris: RisState) -> ChannelState:
    """``h[q, :, n] = g_d[q, :, n] + g_r[q, :, n] @ theta @ g_i[:, :, n]`` with theta fixed over tones."""
    if ris.n_elements != links.n_elements:
        raise ValueError(f"RIS has {ris.n_elements} elements, links expect {links.n_elements}")
    # RisState validates on construction; re-check in case theta was mutated
    RisState(ris.theta, ris.mode)
    reflected = np.einsum("qrn,rs,smn->qmn", links.g_r, ris.theta, links.g_i)
    return ChannelState(links.g_d + reflected, links.grid, links.noise_power)


def generate(
    seed: int,
    model: str,
    n_rx: int,
    n_tx: int,
    grid: FrequencyGrid,
    n_taps: int = 8,
    delay_spread: float | None = None,
    noise_power: float = 1e-10,
) -> ChannelState:
    """Draw a channel realization.

    ``"flat"`` is a unit line-of-sight channel (all ones).  ``"rayleigh"``
    places ``n_taps`` taps at multiples of ``1 / bandwidth`` with an
    exponential power profile ``exp(-delay / delay_spread)`` normalized to
    unit total power; each antenna pair gets independent Rayleigh gains and
    uniform phases.  ``delay_spread`` defaults to ``n_taps / (4 * bandwidth)``.
    """
    if model in ("flat", "flat-los"):
        return ChannelState(np.ones((n_rx, n_tx, grid.n_tones), dtype=complex), grid, noise_power)
    if model not in ("rayleigh", "rayleigh-taps"):
        raise ValueError(f"unknown channel model {model!r}")
    if n_taps < 1:
        raise ValueError("n_taps must be >= 1")
    taps = rayleigh_taps(seed, n_rx, n_tx, grid, n_taps, delay_spread)
    return freq_response(taps, grid, noise_power)


def rayleigh_taps(seed, n_rx, n_tx, grid, n_taps=8, delay_spread=None):
    bandwidth = grid.n_tones * grid.delta_f
    spacing = 1.0 / bandwidth
    if delay_spread is None:
        delay_spread = n_taps * spacing / 4
    delays = spacing * np.arange(n_taps)
    profile = np.exp(-delays / delay_spread)
    profile /= profile.sum()
    rng = np.random.default_rng(seed)
    # |CN(0, p)| has E[gain^2] = p
    z = rng.standard_normal((n_rx, n_tx, n_taps, 2))
    gains = np.sqrt(profile / 2) * np.hypot(z[..., 0], z[..., 1])
    phases = rng.uniform(0, 2 * np.pi, (n_rx, n_tx, n_taps))
    return [
        [
            [PathTap(delays[l], gains[q, m, l], phases[q, m, l]) for l in range(n_taps)]
            for m in range(n_tx)
        ]
        for q in range(n_rx)
    ]


def free_space_gain(distance: float, carrier: float) -> float:
    """Free-space amplitude gain ``lambda / (4 pi d)``."""
    if distance <= 0:
        raise ValueError("distance must be positive")
    wavelength = 299_792_458.0 / carrier
    return wavelength / (4 * np.pi * distance)


class ChannelFileError(ValueError):
    """Malformed channel file; the message names the offending location."""


def save(state: ChannelState, path) -> None:
    h = state.responses
    doc = {
        "grid": {
            "f0_hz": state.grid.f0,
            "delta_f_hz": state.grid.delta_f,
            "n_tones": state.grid.n_tones,
        },
        "shape": list(h.shape),
        "noise_power_w": state.noise_power,
        "data": [[float(z.real), float(z.imag)] for z in h.ravel()],
    }
    # repr-precision floats make the round trip bit-exact
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ChannelFileError(f"{where}: expected a number, got {value!r}")
    return value


def load(path) -> ChannelState:
    text = Path(path).read_text(encoding="utf-8")
    if not text.strip():
        raise ChannelFileError(f"{path}: line 1: empty channel file")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ChannelFileError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ChannelFileError(f"{path}: top level must be an object")
    for key in ("grid", "shape", "data"):
        if key not in doc:
            raise ChannelFileError(f"{path}: missing key '{key}'")
    grid_doc = doc["grid"]
    if not isinstance(grid_doc, dict):
        raise ChannelFileError(f"{path}: grid: expected an object")
    try:
        grid = FrequencyGrid(
            _number(grid_doc.get("f0_hz"), "grid.f0_hz"),
            _number(grid_doc.get("delta_f_hz"), "grid.delta_f_hz"),
            _number(grid_doc.get("n_tones"), "grid.n_tones"),
        )
    except ValueError as exc:
        raise ChannelFileError(f"{path}: grid: {exc}") from None
    shape = doc["shape"]
    if not (isinstance(shape, list) and len(shape) == 3 and all(isinstance(s, int) and s > 0 for s in shape)):
        raise ChannelFileError(f"{path}: shape: expected [Q, M, N] positive integers")
    if shape[2] != grid.n_tones:
        raise ChannelFileError(f"{path}: shape[2]={shape[2]} disagrees with grid.n_tones={grid.n_tones}")
    data = doc["data"]
    expected = shape[0] * shape[1] * shape[2]
    if not isinstance(data, list) or len(data) != expected:
        raise ChannelFileError(f"{path}: data: expected {expected} [re, im] pairs")
    values = np.empty(expected, dtype=complex)
    for i, pair in enumerate(data):
        if not (isinstance(pair, list) and len(pair) == 2):
            raise ChannelFileError(f"{path}: data[{i}]: expected [re, im]")
        values[i] = complex(_number(pair[0], f"data[{i}][0]"), _number(pair[1], f"data[{i}][1]"))
    noise = doc.get("noise_power_w", 1e-10)
    _number(noise, "noise_power_w")
    try:
        return ChannelState(values.reshape(shape), grid, float(noise))
    except ValueError as exc:
        raise ChannelFileError(f"{path}: {exc}") from None
