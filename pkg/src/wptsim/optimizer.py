"""Transmit waveform/beamforming strategies, receive combiner and RIS tile scanning."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .channel import ChannelState, RisLinks, RisState, compose_ris
from .harvester import RectennaParams, combine_tones, dc_combine, p_dc, rf_combine
from .signals import Precoder

__all__ = [
    "Strategy",
    "smf",
    "ass",
    "mrt_cw",
    "uniform_mrt",
    "design",
    "received_p_dc",
    "optimize_rf_combiner",
    "matched_combiner",
    "ris_tile_scan",
    "DEFAULT_BETAS",
]

DEFAULT_BETAS = (1.0, 2.0, 3.0, 4.0, 6.0)


def _row(channel, rx: int = 0) -> np.ndarray:
    if isinstance(channel, ChannelState):
        return channel.row(rx)
    h = np.asarray(channel, dtype=complex)
    return h[np.newaxis, :] if h.ndim == 1 else h


def _mrt(h: np.ndarray, tone_power: np.ndarray, grid) -> Precoder:
    norms = np.linalg.norm(h, axis=0)
    safe = np.where(norms > 0, norms, 1.0)
    weights = h.conj() / safe * np.sqrt(tone_power)
    return Precoder(weights, grid)


def smf(channel: ChannelState, beta: float, power: float, rx: int = 0) -> Precoder:
    """Scaled matched filter: MRT per tone, tone power proportional to ``||h_n||^(2 beta)``.

    Total transmit power is exactly ``power``.
    """
    if beta < 1:
        raise ValueError("beta must be >= 1")
    h = _row(channel, rx)
    norms = np.linalg.norm(h, axis=0)
    if not np.any(norms > 0):
        raise ValueError("all-zero channel")
    # normalize before exponentiation so large beta cannot overflow
    weights = (norms / norms.max()) ** (2 * beta)
    return _mrt(h, power * weights / weights.sum(), channel.grid)


def uniform_mrt(channel: ChannelState, power: float, rx: int = 0) -> Precoder:
    """Equal power on every tone, MRT across antennas."""
    h = _row(channel, rx)
    n = h.shape[1]
    return _mrt(h, np.full(n, power / n), channel.grid)


def ass(channel: ChannelState, power: float, rx: int = 0) -> Precoder:
    """Adaptive single sinewave: all power on the strongest tone (lowest index on ties)."""
    h = _row(channel, rx)
    norms = np.linalg.norm(h, axis=0)
    if not np.any(norms > 0):
        raise ValueError("all-zero channel")
    alloc = np.zeros(h.shape[1])
    alloc[int(np.argmax(norms))] = power
    return _mrt(h, alloc, channel.grid)


def mrt_cw(channel: ChannelState, power: float, rx: int = 0) -> Precoder:
    """Continuous wave at ``f0`` beamformed by MRT; other tones stay silent."""
    h = _row(channel, rx)
    if not np.linalg.norm(h[:, 0]) > 0:
        raise ValueError("zero channel at f0")
    alloc = np.zeros(h.shape[1])
    alloc[0] = power
    return _mrt(h, alloc, channel.grid)


@dataclass(frozen=True)
class Strategy:
    """Transmit strategy: ``MRT-CW``, ``ASS``, ``UNIFORM``, ``SMF`` or ``EXHAUSTIVE``."""

    kind: str
    total_power: float
    beta: float = 3.0
    codebook: object = None

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        if kind not in ("MRT-CW", "ASS", "UNIFORM", "SMF", "EXHAUSTIVE"):
            raise ValueError(f"unknown strategy {self.kind!r}")
        if not self.total_power > 0:
            raise ValueError("total_power must be positive")
        if kind == "SMF" and self.beta < 1:
            raise ValueError("beta must be >= 1")
        if kind == "EXHAUSTIVE" and self.codebook is None:
            raise ValueError("EXHAUSTIVE needs a codebook")


def received_p_dc(
    channel: ChannelState,
    precoder: Precoder,
    params: RectennaParams,
    combining: str = "dc",
    combiner=None,
) -> float:
    """Delivered DC power with DC combining or an RF combiner (matched if not given)."""
    y = channel.received(precoder.weights)
    if y.shape[0] == 1:
        return p_dc(y[0], params)
    if combining == "dc":
        return dc_combine(y, params)
    if combining == "rf":
        if combiner is None:
            combiner = optimize_rf_combiner(channel, precoder, params)
        return rf_combine(y, combiner, params)
    raise ValueError(f"unknown combining {combining!r}")


def design(strategy: Strategy, channel: ChannelState, params: RectennaParams | None = None, rx: int = 0) -> Precoder:
    p = strategy.total_power
    kind = strategy.kind
    if kind == "SMF":
        return smf(channel, strategy.beta, p, rx)
    if kind == "ASS":
        return ass(channel, p, rx)
    if kind == "UNIFORM":
        return uniform_mrt(channel, p, rx)
    if kind == "MRT-CW":
        return mrt_cw(channel, p, rx)
    # EXHAUSTIVE: best codebook entry on the true channel
    params = params or RectennaParams()
    entries = strategy.codebook.entries
    scores = [received_p_dc(channel, x, params) for x in entries]
    return entries[int(np.argmax(scores))]


def matched_combiner(amplitudes: np.ndarray) -> np.ndarray:
    """Unit-norm combiner matched to a per-antenna amplitude vector."""
    a = np.asarray(amplitudes, dtype=complex)
    norm = np.linalg.norm(a)
    if norm == 0:
        out = np.zeros_like(a)
        out[0] = 1.0
        return out
    return a / norm


def optimize_rf_combiner(
    channel: ChannelState,
    precoder: Precoder,
    params: RectennaParams,
    passes: int = 3,
    phase_points: int = 16,
) -> np.ndarray:
    """Unit-norm RF combiner maximizing the DC output of the single rectifier.

    One tone: the matched filter, which maximizes the combined amplitude.
    Several tones: coordinate ascent over per-antenna phase (``phase_points``
    levels) and magnitude, started from the best of the per-tone matched
    filters and the dominant eigenvector of the received covariance.
    """
    y = channel.received(precoder.weights)  # (Q, N)
    n_rx, n_tones = y.shape
    if n_rx == 1:
        return np.ones(1, dtype=complex)
    if n_tones == 1:
        return matched_combiner(y[:, 0])

    def score(w):
        return p_dc(combine_tones(y, w), params)

    candidates = [matched_combiner(y[:, n]) for n in range(n_tones)]
    _, vecs = np.linalg.eigh(y @ y.conj().T)
    candidates.append(vecs[:, -1])
    scores = [score(w) for w in candidates]
    best = int(np.argmax(scores))
    w, current = candidates[best].copy(), scores[best]

    phases = 2 * np.pi * np.arange(phase_points) / phase_points
    mags = np.linspace(0.0, 1.0, 9)
    for _ in range(passes):
        improved = False
        for q in range(n_rx):
            others = np.delete(np.arange(n_rx), q)
            rest = np.linalg.norm(w[others])
            for m in mags:
                for ph in phases:
                    trial = w.copy()
                    if rest > 0:
                        trial[others] *= np.sqrt(max(0.0, 1 - m**2)) / rest
                    trial[q] = m * np.exp(1j * ph)
                    s = score(trial)
                    if s > current * (1 + 1e-12):
                        w, current, improved = trial, s, True
                        rest = np.linalg.norm(w[others])
        if not improved:
            break
    return w


def _tiles(surface_shape, tile_rows, tile_cols):
    rows, cols = surface_shape
    if rows % tile_rows or cols % tile_cols:
        raise ValueError(f"surface {rows}x{cols} is not divisible into {tile_rows}x{tile_cols} tiles")
    index = np.arange(rows * cols).reshape(rows, cols)
    return [
        index[r : r + tile_rows, c : c + tile_cols].ravel()
        for r in range(0, rows, tile_rows)
        for c in range(0, cols, tile_cols)
    ]


def ris_tile_scan(
    links: RisLinks,
    tile_rows: int,
    tile_cols: int,
    probe: Callable[[RisState], float],
    sweeps: int = 1,
    surface_shape: tuple[int, int] | None = None,
    history: list | None = None,
) -> RisState:
    """Power-probing scan of a one-bit RIS, one tile at a time.

    Elements are laid out row-major on ``surface_shape`` (default
    ``(tile_rows, R // tile_rows)``).  Starting from all diodes OFF, tiles are
    visited in raster order; each tile's shared bit is set to whichever state
    gives the larger probed DC power, OFF on ties.  If ``history`` is given,
    the probed power of the configuration in force after each tile decision
    is appended to it.
    """
    r = links.n_elements
    if surface_shape is None:
        if r % tile_rows:
            raise ValueError("R is not divisible by tile_rows")
        surface_shape = (tile_rows, r // tile_rows)
    if surface_shape[0] * surface_shape[1] != r:
        raise ValueError("surface_shape does not match the number of RIS elements")
    tiles = _tiles(surface_shape, tile_rows, tile_cols)

    bits = np.zeros(r, dtype=int)
    current = probe(RisState.from_bits(bits))
    if history is not None:
        history.append(current)
    for _ in range(sweeps):
        for tile in tiles:
            trial = bits.copy()
            trial[tile] = 1 - bits[tile[0]]
            value = probe(RisState.from_bits(trial))
            if bits[tile[0]] == 0:
                off_value, on_value = current, value
            else:
                off_value, on_value = value, current
            chosen = 1 if on_value > off_value else 0
            if chosen != bits[tile[0]]:
                bits = trial
                current = value
            if history is not None:
                history.append(current)
    return RisState.from_bits(bits)


def ris_probe(links: RisLinks, precoder: Precoder, params: RectennaParams) -> Callable[[RisState], float]:
    """Noiseless probe: DC power delivered through the composed RIS channel."""

    def probe(state: RisState) -> float:
        return received_p_dc(compose_ris(links, state), precoder, params)

    return probe
