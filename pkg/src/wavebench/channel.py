"""Block-fading tapped-delay-line channel, AWGN injection, mobility math.

Fading is block-static: tap gains are redrawn independently every coherence
block (Rayleigh magnitude, uniform phase, per-tap power equal to the nominal
tap power) and held constant within it. Convolution tails cross block
boundaries, so the emitted waveform stays physically continuous even though
the fading switches discretely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .airframe import FrameSignal, WaveformConfig
from .errors import ConfigurationError, CoverageError, ParameterError
from .numerics import RandomStream, draw_cgaussian

__all__ = [
    "SPEED_OF_LIGHT",
    "PdpSpec",
    "ChannelRealization",
    "MobilityFigures",
    "pdp_preset",
    "realize_channel",
    "apply_channel",
    "awgn",
    "coherence_to_doppler",
    "doppler_to_coherence",
    "doppler_to_velocity",
    "velocity_to_doppler",
    "mobility_figures",
]

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact


@dataclass(frozen=True)
class PdpSpec:
    """Power delay profile: (delay in samples, nominal complex gain) taps."""

    taps: tuple

    def __post_init__(self):
        taps = tuple((int(d), complex(g)) for d, g in self.taps)
        if not taps:
            raise ParameterError("a delay profile needs at least one tap")
        delays = [d for d, _ in taps]
        if delays[0] != 0:
            raise ParameterError("first tap delay must be 0")
        if any(b <= a for a, b in zip(delays, delays[1:])):
            raise ParameterError("tap delays must be strictly increasing")
        if sum(abs(g) ** 2 for _, g in taps) <= 0:
            raise ParameterError("total tap power must be positive")
        object.__setattr__(self, "taps", taps)

    @property
    def delays(self) -> np.ndarray:
        return np.array([d for d, _ in self.taps], dtype=np.int64)

    @property
    def nominal_gains(self) -> np.ndarray:
        return np.array([g for _, g in self.taps], dtype=np.complex128)

    @property
    def max_delay(self) -> int:
        return int(self.delays[-1])

    def filter_taps(self, gains=None) -> np.ndarray:
        """Dense impulse response for the given (or nominal) gains."""
        g = self.nominal_gains if gains is None else np.asarray(gains, dtype=np.complex128)
        filt = np.zeros(self.max_delay + 1, dtype=np.complex128)
        filt[self.delays] = g
        return filt


# Reference four-tap profile used by the fading presets: delays in samples,
# amplitudes 0.8765, -0.2279, 0.1315 and -0.4032 at a 90 degree phase.
_PDP_PRESETS = {
    "paper-tdl4": PdpSpec(
        taps=(
            (0, 0.8765 + 0.0j),
            (1, -0.2279 + 0.0j),
            (4, 0.1315 + 0.0j),
            (7, -0.4032j),
        )
    ),
}


def pdp_preset(name: str) -> PdpSpec:
    key = name.strip().lower()
    if key not in _PDP_PRESETS:
        raise ParameterError(
            f"unknown channel preset {name!r}; available: {sorted(_PDP_PRESETS)}"
        )
    return _PDP_PRESETS[key]


@dataclass(frozen=True)
class ChannelRealization:
    """Per-block tap gains drawn from a PdpSpec."""

    blocks: np.ndarray  # (num_blocks, num_taps) complex
    block_len: int
    pdp: PdpSpec

    @property
    def num_blocks(self) -> int:
        return self.blocks.shape[0]


def realize_channel(
    pdp: PdpSpec,
    num_blocks: int,
    block_len: int,
    stream: RandomStream,
    first_block_nominal: bool = False,
) -> ChannelRealization:
    """Draw independent per-block tap gains.

    Tap i in each block is CN(0, |nominal_i|^2): Rayleigh magnitude with the
    nominal tap power, phase uniform. first_block_nominal pins block 0 to
    the exact nominal gains (regression hook; later blocks still fade).
    """
    if num_blocks < 1:
        raise ParameterError(f"num_blocks must be >= 1, got {num_blocks}")
    if block_len < 1:
        raise ParameterError(f"block_len must be >= 1, got {block_len}")
    num_taps = len(pdp.taps)
    draws = draw_cgaussian(stream, num_blocks * num_taps, 1.0).reshape(num_blocks, num_taps)
    blocks = draws * np.abs(pdp.nominal_gains)[None, :]
    if first_block_nominal:
        blocks[0] = pdp.nominal_gains
    blocks.setflags(write=False)
    return ChannelRealization(blocks=blocks, block_len=block_len, pdp=pdp)


def apply_channel(signal, realization: ChannelRealization):
    """Convolve each coherence block's samples with that block's filter.

    Tails extend into the following samples (no artificial isolation at
    block boundaries); whatever runs past the input length is truncated so
    output length equals input length.
    """
    is_frame = isinstance(signal, FrameSignal)
    samples = signal.samples if is_frame else np.asarray(signal, dtype=np.complex128).ravel()
    total = samples.size
    capacity = realization.num_blocks * realization.block_len
    if total > capacity:
        raise CoverageError(
            f"signal of {total} samples exceeds realization capacity "
            f"{realization.num_blocks} x {realization.block_len}"
        )
    out = np.zeros(total, dtype=np.complex128)
    bl = realization.block_len
    for b in range(realization.num_blocks):
        start = b * bl
        if start >= total:
            break
        seg = samples[start : min(start + bl, total)]
        conv = np.convolve(seg, realization.pdp.filter_taps(realization.blocks[b]))
        stop = min(start + conv.size, total)
        out[start:stop] += conv[: stop - start]
    return FrameSignal(samples=out, config=signal.config) if is_frame else out


def _bit_density(config: WaveformConfig) -> float:
    rho = config.payload_bits / config.frame_len
    if rho <= 0:
        raise ParameterError(
            "config carries no payload bits; Eb/N0 is undefined (pilot_block=1?)"
        )
    return rho


def awgn(
    signal,
    ebn0_db: float,
    config: WaveformConfig,
    stream: RandomStream,
    es_sample: Optional[float] = None,
):
    """Add complex white noise at the requested per-payload-bit SNR.

    N0 = Es_sample / (10^(ebn0/10) * rho) with rho = payload bits per
    transmitted complex sample, so Eb counts the full frame energy including
    CP and pilot overhead. Es_sample defaults to the measured mean power of
    `signal`; campaigns pass the transmitted frame's power explicitly so a
    faded copy is not renormalized. ebn0_db = inf means no noise.
    """
    is_frame = isinstance(signal, FrameSignal)
    samples = signal.samples if is_frame else np.asarray(signal, dtype=np.complex128).ravel()
    if math.isinf(ebn0_db) and ebn0_db > 0:
        out = samples.copy()
        return FrameSignal(samples=out, config=signal.config) if is_frame else out
    rho = _bit_density(config)
    es = float(np.mean(np.abs(samples) ** 2)) if es_sample is None else float(es_sample)
    if es <= 0:
        raise ParameterError("signal power must be positive to set a noise level")
    n0 = es / (10.0 ** (ebn0_db / 10.0) * rho)
    noisy = samples + draw_cgaussian(stream, samples.size, n0)
    return FrameSignal(samples=noisy, config=signal.config) if is_frame else noisy


def noise_variance(config: WaveformConfig, ebn0_db: float, es_sample: float) -> float:
    """Per-sample (and per occupied bin, the transform being unitary) noise
    power awgn would inject at this operating point."""
    if math.isinf(ebn0_db) and ebn0_db > 0:
        return 0.0
    return es_sample / (10.0 ** (ebn0_db / 10.0) * _bit_density(config))


def coherence_to_doppler(tc: float) -> float:
    """Maximum Doppler from coherence time: f_m = 0.423 / T_c."""
    if tc <= 0:
        raise ParameterError(f"coherence time must be positive, got {tc}")
    return 0.423 / tc


def doppler_to_coherence(fm: float) -> float:
    if fm <= 0:
        raise ParameterError(f"Doppler must be positive, got {fm}")
    return 0.423 / fm


def doppler_to_velocity(fm: float, f_rf: float, c: float = SPEED_OF_LIGHT) -> float:
    """Platform speed in m/s from f_m = v * f_RF / c."""
    if fm < 0:
        raise ParameterError(f"Doppler must be nonnegative, got {fm}")
    if f_rf <= 0 or c <= 0:
        raise ParameterError("carrier frequency and c must be positive")
    return fm * c / f_rf


def velocity_to_doppler(v: float, f_rf: float, c: float = SPEED_OF_LIGHT) -> float:
    if v < 0:
        raise ParameterError(f"velocity must be nonnegative, got {v}")
    if f_rf <= 0 or c <= 0:
        raise ParameterError("carrier frequency and c must be positive")
    return v * f_rf / c


@dataclass(frozen=True)
class MobilityFigures:
    """Self-consistent (T_c, f_m, v, f_RF) tuple."""

    coherence_time: float
    doppler: float
    velocity: float
    carrier: float

    def __post_init__(self):
        for name in ("coherence_time", "doppler", "velocity", "carrier"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be positive")

    @property
    def velocity_kmh(self) -> float:
        return self.velocity * 3.6


def mobility_figures(tc: float, carrier: float, c: float = SPEED_OF_LIGHT) -> MobilityFigures:
    """Expand a coherence time at a carrier frequency into all four figures."""
    fm = coherence_to_doppler(tc)
    return MobilityFigures(
        coherence_time=tc,
        doppler=fm,
        velocity=doppler_to_velocity(fm, carrier, c),
        carrier=carrier,
    )


def validate_cp_covers(config: WaveformConfig, pdp: PdpSpec) -> None:
    """Reject configs whose CP cannot absorb the profile's delay spread."""
    if config.cp < pdp.max_delay:
        raise ConfigurationError(
            f"cp={config.cp} shorter than maximum tap delay {pdp.max_delay}; "
            "one-tap equalization would be invalid"
        )
