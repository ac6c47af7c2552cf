#!/usr/bin/env python3
"""
Emission Channel Simulator

Models the path from a rendered screen/page to the eavesdropper's
reconstructed image for three emission sources:
- VGA: analog video; the channel behaves as a high-pass filter, so only
  horizontal luminance changes (vertical edges) survive
- DVI/HDMI: TMDS 8b/10b line code; residual bit transitions inside each
  symbol make constant regions emit ("fills")
- Laser printer: bi-level laser modulation split across interleaved diodes

Every source is followed by the same receiver stage: a horizontal
moving-average (finite bandwidth) plus seeded Gaussian noise at a given SNR.
Noise for row r derives from (seed, r) only, so row order never matters.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from raster import Bitmap

logger = logging.getLogger(__name__)

MAX_RUNNING_DISPARITY = 8
SEED_MASK = (1 << 64) - 1


class ChannelConfigError(ValueError):
    """Invalid channel configuration or a transform called for the wrong standard."""


class Standard(str, Enum):
    VGA = "vga"
    DVI = "dvi"
    PRINTER = "printer"


@dataclass(frozen=True)
class ChannelConfig:
    """Emission source plus the abstract receiver (bandwidth, SNR, seed)."""
    standard: Standard = Standard.VGA
    snr_db: float = math.inf
    bw_frac: float = 1.0
    seed: int = 0
    printer_diodes: int = 2

    def __post_init__(self):
        try:
            object.__setattr__(self, "standard", Standard(str(getattr(self.standard, "value", self.standard)).lower()))
        except ValueError:
            raise ChannelConfigError(f"unknown standard {self.standard!r}")
        snr = float(self.snr_db)
        if math.isnan(snr) or snr == -math.inf:
            raise ChannelConfigError(f"snr_db must be finite or +inf, got {self.snr_db!r}")
        object.__setattr__(self, "snr_db", snr)
        if not 0 < float(self.bw_frac) <= 1:
            raise ChannelConfigError(f"bw_frac must be in (0, 1], got {self.bw_frac!r}")
        if int(self.printer_diodes) < 1:
            raise ChannelConfigError(f"printer_diodes must be >= 1, got {self.printer_diodes!r}")
        object.__setattr__(self, "seed", int(self.seed) & SEED_MASK)

    @property
    def window(self) -> int:
        """Moving-average window ceil(1 / bw_frac) in pixels."""
        ratio = 1 / Fraction(self.bw_frac).limit_denominator(1_000_000)
        return max(1, math.ceil(ratio))

    @property
    def noiseless(self) -> bool:
        return self.snr_db == math.inf

    def to_dict(self) -> Dict[str, Any]:
        return {
            "standard": self.standard.value,
            "snr_db": "inf" if self.noiseless else self.snr_db,
            "bw_frac": self.bw_frac,
            "seed": self.seed,
            "printer_diodes": self.printer_diodes,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ChannelConfig":
        snr = data.get("snr_db", "inf")
        if isinstance(snr, str):
            snr = math.inf if snr.strip().lstrip("+").lower() in ("inf", "infinity") else float(snr)
        return cls(
            standard=data.get("standard", "vga"),
            snr_db=snr,
            bw_frac=float(data.get("bw_frac", 1.0)),
            seed=int(data.get("seed", 0)),
            printer_diodes=int(data.get("printer_diodes", 2)),
        )


# --- TMDS -----------------------------------------------------------------

@dataclass(frozen=True)
class TmdsSymbol:
    bits: int  # 10-bit word, bit 0 is serialized first
    disparity_after: int


def _popcount(value: int) -> int:
    return bin(value).count("1")


def tmds_stage1(value: int) -> int:
    """
    Transition-minimizing stage: XOR chain (bit 8 set) or XNOR chain
    (bit 8 clear), XNOR when the byte has more than four ones, or exactly
    four with bit 0 clear.
    """
    if not 0 <= value <= 255:
        raise ValueError(f"TMDS data must be a byte, got {value}")
    ones = _popcount(value)
    use_xnor = ones > 4 or (ones == 4 and not value & 1)
    q_m = value & 1
    for i in range(1, 8):
        bit = ((q_m >> (i - 1)) ^ (value >> i)) & 1
        if use_xnor:
            bit ^= 1
        q_m |= bit << i
    if not use_xnor:
        q_m |= 0x100
    return q_m


@lru_cache(maxsize=None)
def tmds_encode(value: int, disparity_in: int = 0) -> TmdsSymbol:
    """DVI 1.0 8b/10b encode of one data byte given the running disparity."""
    q_m = tmds_stage1(value)
    data = q_m & 0xFF
    q_m8 = (q_m >> 8) & 1
    ones = _popcount(data)
    zeros = 8 - ones

    if disparity_in == 0 or ones == zeros:
        if q_m8:
            bits = 0x100 | data
            disparity = disparity_in + ones - zeros
        else:
            bits = 0x200 | (~data & 0xFF)
            disparity = disparity_in + zeros - ones
    elif (disparity_in > 0 and ones > zeros) or (disparity_in < 0 and zeros > ones):
        bits = 0x200 | (q_m8 << 8) | (~data & 0xFF)
        disparity = disparity_in + 2 * q_m8 + zeros - ones
    else:
        bits = (q_m8 << 8) | data
        disparity = disparity_in - 2 * (1 - q_m8) + ones - zeros
    return TmdsSymbol(bits, disparity)


def tmds_decode(bits: int) -> int:
    """Invert tmds_encode: undo the DC-balance inversion, then the chain."""
    if not 0 <= bits < 1 << 10:
        raise ValueError(f"TMDS symbol must be 10 bits, got {bits:#x}")
    data = bits & 0xFF
    if bits & 0x200:
        data ^= 0xFF
    value = data & 1
    for i in range(1, 8):
        bit = ((data >> i) ^ (data >> (i - 1))) & 1
        if not bits & 0x100:
            bit ^= 1
        value |= bit << i
    return value


def tmds_transitions(bits: int, previous_last_bit: Optional[int] = None) -> int:
    """Bit changes inside a serialized symbol, plus the boundary change from
    the previous symbol's last bit (if there was a previous symbol)."""
    internal = _popcount((bits ^ (bits >> 1)) & 0x1FF)
    if previous_last_bit is None:
        return internal
    return internal + ((bits & 1) ^ previous_last_bit)


def tmds_encode_row(values: Sequence[int], disparity: int = 0) -> List[TmdsSymbol]:
    """Encode a byte stream with running disparity (one scanline)."""
    symbols = []
    for value in values:
        symbol = tmds_encode(int(value), disparity)
        disparity = symbol.disparity_after
        symbols.append(symbol)
    return symbols


@lru_cache(maxsize=None)
def _tmds_step(value: int, disparity: int, previous_last_bit: Optional[int]) -> Tuple[int, int, int]:
    """(transitions, disparity after, last serialized bit) of one pixel."""
    symbol = tmds_encode(value, disparity)
    return (tmds_transitions(symbol.bits, previous_last_bit),
            symbol.disparity_after, (symbol.bits >> 9) & 1)


def tmds_row_counts(
    values: Sequence[int],
    disparity: int = 0,
    previous_last_bit: Optional[int] = None,
) -> List[int]:
    """Transitions per pixel of one scanline entered in the given encoder state."""
    counts = []
    for value in values:
        count, disparity, previous_last_bit = _tmds_step(int(value), disparity, previous_last_bit)
        counts.append(count)
    return counts


@lru_cache(maxsize=None)
def tmds_idle_cycle(value: int = 255) -> Tuple[Tuple[int, int], ...]:
    """
    Encoder states (disparity, last bit) that a long run of one byte value
    keeps cycling through. A white run settles into a cycle of seven.
    """
    state: Tuple[int, Optional[int]] = (0, None)
    seen: List[Tuple[int, Optional[int]]] = []
    while state not in seen:
        seen.append(state)
        _, disparity, last_bit = _tmds_step(value, *state)
        state = (disparity, last_bit)
    return tuple(seen[seen.index(state):])


# --- emission sources ------------------------------------------------------

def _require(cfg: ChannelConfig, standard: Standard) -> None:
    if cfg.standard is not standard:
        raise ChannelConfigError(f"{standard.value} transform called with standard={cfg.standard.value}")


def _first_difference(rows: np.ndarray) -> np.ndarray:
    """|x[j] - x[j-1]| along each row; the first column compares with itself."""
    signal = rows.astype(np.int16)
    return np.abs(np.diff(signal, axis=1, prepend=signal[:, :1])).astype(np.uint8)


def vga_emission(screen: Bitmap, cfg: ChannelConfig, workers: int = 1) -> Bitmap:
    """Analog video: rectified first difference of each scanline, then the receiver."""
    _require(cfg, Standard.VGA)
    raw = Bitmap(_first_difference(screen.samples), "emission")
    return apply_receiver(raw, cfg, workers)


def _map_rows(fn, count: int, workers: int) -> List[np.ndarray]:
    rows = range(count)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, rows))
    return [fn(r) for r in rows]


def tmds_emission(screen: Bitmap, cfg: ChannelConfig, workers: int = 1) -> Bitmap:
    """
    Digital video: every pixel byte goes through the TMDS encoder with a
    running disparity that restarts each scanline (the blanking interval
    resets it); a pixel's amplitude is the transition count of its symbol,
    0..10 scaled to 0..255. Scanlines are encoded on `workers` threads.
    """
    _require(cfg, Standard.DVI)
    samples = screen.samples

    def encode(r: int) -> np.ndarray:
        counts = np.asarray(tmds_row_counts(samples[r].tolist()), dtype=np.int32)
        return ((counts * 255 + 5) // 10).astype(np.uint8)

    out = np.stack(_map_rows(encode, samples.shape[0], workers))
    return apply_receiver(Bitmap(out, "emission"), cfg, workers)


def tmds_expected_emission(
    patch: Bitmap,
    cfg: ChannelConfig,
    background: int = 255,
    workers: int = 1,
) -> Bitmap:
    """
    Noiseless DVI emission of a patch that sits inside a longer scanline.

    On a screen the encoder reaches the patch after a run of background
    pixels, in any of the states of that run's idle cycle. Each row is
    encoded from every one of those states and the transition counts are
    averaged (round half up). `cfg.window` background columns on either
    side feed the receiver blur and are cropped off again.
    """
    _require(cfg, Standard.DVI)
    states = tmds_idle_cycle(background)
    context = cfg.window
    padded = np.pad(patch.samples, ((0, 0), (context, context)), constant_values=background)
    phases = len(states)

    def average(r: int) -> np.ndarray:
        values = padded[r].tolist()
        totals = np.zeros(len(values), dtype=np.int64)
        for disparity, last_bit in states:
            totals += np.asarray(tmds_row_counts(values, disparity, last_bit), dtype=np.int64)
        return ((totals * 255 + 5 * phases) // (10 * phases)).astype(np.uint8)

    raw = Bitmap(np.stack(_map_rows(average, padded.shape[0], workers)), "emission")
    received = apply_receiver(raw, noiseless(cfg))
    return Bitmap(received.samples[:, context:-context], "emission")


def _ink_mask(page: Bitmap) -> np.ndarray:
    if page.polarity == "dark-on-light":
        return page.samples < 128
    return page.samples >= 128


def _printer_streams(page: Bitmap, diodes: int) -> Tuple[np.ndarray, List[int]]:
    """Raw (pre-receiver) printer emission and per-diode stream energies."""
    laser = np.where(_ink_mask(page), 255, 0).astype(np.int16)
    out = np.zeros(laser.shape, dtype=np.uint8)
    energies = []
    for diode in range(diodes):
        rows = laser[diode::diodes]
        if rows.size == 0:
            energies.append(0)
            continue
        # a diode's scanlines form one continuous modulation waveform
        stream = rows.reshape(-1)
        response = np.abs(np.diff(stream, prepend=stream[:1])).astype(np.uint8)
        out[diode::diodes] = response.reshape(rows.shape)
        energies.append(int(np.sum(response.astype(np.int64) ** 2)))
    return out, energies


def printer_emission(page: Bitmap, cfg: ChannelConfig, workers: int = 1) -> Bitmap:
    """Laser printer: threshold, split scanlines round-robin over diodes,
    differentiate each diode's modulation stream, re-interleave, receive."""
    _require(cfg, Standard.PRINTER)
    raw, _ = _printer_streams(page, cfg.printer_diodes)
    return apply_receiver(Bitmap(raw, "emission"), cfg, workers)


def printer_stream_energies(page: Bitmap, cfg: ChannelConfig) -> List[int]:
    """Per-diode emission energy before the receiver (energy bookkeeping)."""
    _require(cfg, Standard.PRINTER)
    return _printer_streams(page, cfg.printer_diodes)[1]


def _moving_average(samples: np.ndarray, window: int) -> np.ndarray:
    """Centered window [-w//2, w-1-w//2], zero outside, round half up."""
    if window == 1:
        return samples.astype(np.int64)
    left = window // 2
    right = window - 1 - left
    padded = np.pad(samples.astype(np.int64), ((0, 0), (left, right)))
    cumulative = np.concatenate(
        [np.zeros((padded.shape[0], 1), dtype=np.int64), np.cumsum(padded, axis=1)], axis=1)
    sums = cumulative[:, window:] - cumulative[:, :-window]
    return (2 * sums + window) // (2 * window)


def apply_receiver(raw: Bitmap, cfg: ChannelConfig, workers: int = 1) -> Bitmap:
    """
    Finite-bandwidth blur followed by additive Gaussian noise scaled so that
    10*log10(signal_power / noise_power) == snr_db, with signal power measured
    on the blurred emission.
    """
    blurred = _moving_average(raw.samples, cfg.window)
    if cfg.noiseless:
        return Bitmap(np.clip(blurred, 0, 255).astype(np.uint8), "emission")

    signal_power = float(np.mean(blurred.astype(np.float64) ** 2))
    if signal_power == 0.0:
        return Bitmap(blurred.astype(np.uint8), "emission")
    sigma = math.sqrt(signal_power / 10 ** (cfg.snr_db / 10))
    width = blurred.shape[1]

    def noisy_row(r: int) -> np.ndarray:
        rng = np.random.default_rng([cfg.seed, r])
        row = blurred[r].astype(np.float64) + rng.normal(0.0, sigma, width)
        return np.clip(np.floor(row + 0.5), 0, 255).astype(np.uint8)

    return Bitmap(np.stack(_map_rows(noisy_row, blurred.shape[0], workers)), "emission")


EMITTERS = {
    Standard.VGA: vga_emission,
    Standard.DVI: tmds_emission,
    Standard.PRINTER: printer_emission,
}


def emanate(screen: Bitmap, cfg: ChannelConfig, workers: int = 1) -> Bitmap:
    """Run the configured emission source and receiver."""
    logger.debug(f"Emanating {screen!r} through {cfg.standard.value}")
    return EMITTERS[cfg.standard](screen, cfg, workers)


def noiseless(cfg: ChannelConfig) -> ChannelConfig:
    return replace(cfg, snr_db=math.inf)
