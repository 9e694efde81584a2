"""Measurement surface: PAPR CCDF, Welch PSD, spectral efficiency,
scenario presets, and the flat key-value scenario/manifest text format.

The two built-in presets pin the reference dimensions (q=492, m=600,
n=1024, cp=72, k=140, QPSK, 7-symbol coherence blocks): `fig4-awgn` runs a
clean-channel sweep over 0..14 dB, `fig5-fading` runs the four-tap fading
profile over 0..30 dB.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import signal as _sig

from .airframe import FrameSignal, WaveformConfig
from .channel import PdpSpec, pdp_preset
from .errors import ConfigurationError, CoverageError, ParameterError
from .link import DetectorKind, LinkReport
from .shaping import build_nofst, import_pair

__all__ = [
    "CcdfCurve",
    "PsdEstimate",
    "ScenarioPreset",
    "papr_ccdf",
    "ccdf_threshold",
    "psd_welch",
    "occupied_bandwidth",
    "spectral_efficiency",
    "efficiency_gain",
    "get_preset",
    "preset_config",
    "PRESETS",
    "parse_scenario",
    "scenario_campaign",
    "format_manifest",
]


@dataclass(frozen=True)
class CcdfCurve:
    """P(PAPR > threshold) sampled on a threshold grid."""

    thresholds_db: np.ndarray
    exceed_prob: np.ndarray


@dataclass(frozen=True)
class PsdEstimate:
    """Welch estimate on a symmetric normalized-frequency axis.

    power_db is peak-normalized to 0 dB; density keeps the raw linear
    values so power integration stays meaningful.
    """

    freq_bins: np.ndarray
    power_db: np.ndarray
    segment_len: int
    overlap: float
    density: np.ndarray


def papr_ccdf(frames, thresholds_db) -> CcdfCurve:
    """Per-symbol peak-to-average power over the symbol body (CP excluded),
    reduced to an exceedance curve on the given dB thresholds."""
    if isinstance(frames, FrameSignal):
        frames = [frames]
    frame_list = list(frames)
    if not frame_list:
        raise ParameterError("papr_ccdf needs at least one frame")
    thresholds = np.atleast_1d(np.asarray(thresholds_db, dtype=float))
    if thresholds.size == 0:
        raise ParameterError("threshold grid is empty")
    ratios = []
    for fr in frame_list:
        cfg = fr.config
        body = fr.samples.reshape(cfg.k, cfg.symbol_len)[:, cfg.cp :]
        power = np.abs(body) ** 2
        mean = power.mean(axis=1)
        if np.any(mean == 0):
            raise ParameterError("frame contains an all-zero symbol; PAPR undefined")
        ratios.append(power.max(axis=1) / mean)
    papr_db = 10.0 * np.log10(np.concatenate(ratios))
    exceed = (papr_db[:, None] > thresholds[None, :]).mean(axis=0)
    return CcdfCurve(thresholds_db=thresholds, exceed_prob=exceed)


def ccdf_threshold(curve: CcdfCurve, prob: float) -> float:
    """Threshold (dB) where the exceedance curve crosses `prob`,
    log-interpolated between grid points."""
    if not (0.0 < prob < 1.0):
        raise ParameterError("prob must lie strictly between 0 and 1")
    t = np.asarray(curve.thresholds_db, dtype=float)
    p = np.asarray(curve.exceed_prob, dtype=float)
    below = np.nonzero(p <= prob)[0]
    if below.size == 0:
        raise CoverageError(f"curve never drops to exceedance {prob}")
    i = int(below[0])
    if i == 0 or p[i] == prob:
        return float(t[i])
    p0, p1 = p[i - 1], p[i]
    if p1 <= 0.0:  # cannot log-interpolate into an empty tail
        return float(t[i])
    frac = (math.log10(p0) - math.log10(prob)) / (math.log10(p0) - math.log10(p1))
    return float(t[i - 1] + frac * (t[i] - t[i - 1]))


def psd_welch(signal, segment_len: int, overlap: float = 0.5) -> PsdEstimate:
    """Hann-windowed Welch estimate, two-sided, fftshifted, peak at 0 dB."""
    samples = signal.samples if isinstance(signal, FrameSignal) else np.asarray(signal)
    samples = samples.ravel().astype(np.complex128)
    if segment_len < 2:
        raise ParameterError(f"segment_len must be >= 2, got {segment_len}")
    if samples.size < 2 * segment_len:
        raise ParameterError(
            f"signal of {samples.size} samples too short for segment_len {segment_len}"
        )
    if not (0.0 <= overlap < 1.0):
        raise ParameterError(f"overlap must lie in [0, 1), got {overlap}")
    freqs, dens = _sig.welch(
        samples,
        fs=1.0,
        window="hann",
        nperseg=segment_len,
        noverlap=int(round(overlap * segment_len)),
        detrend=False,
        return_onesided=False,
        scaling="density",
    )
    freqs = np.fft.fftshift(freqs)
    dens = np.fft.fftshift(dens)
    peak = float(dens.max())
    if peak <= 0:
        raise ParameterError("zero-power signal has no spectrum to normalize")
    power_db = 10.0 * np.log10(np.maximum(dens, peak * 1e-60) / peak)
    return PsdEstimate(
        freq_bins=freqs,
        power_db=power_db,
        segment_len=segment_len,
        overlap=overlap,
        density=dens,
    )


def occupied_bandwidth(estimate: PsdEstimate, level_db: float = -20.0) -> float:
    """Aggregate normalized bandwidth where the PSD sits within `level_db`
    of its peak (bin counting, so a nulled DC bin does not split the band)."""
    df = float(estimate.freq_bins[1] - estimate.freq_bins[0])
    return df * int(np.count_nonzero(estimate.power_db >= level_db))


def efficiency_gain(alpha: float) -> float:
    """Relative spectral-efficiency gain of compressing to a fraction alpha
    of the orthogonal bandwidth: (1 - alpha) / alpha."""
    if not (0.0 < alpha <= 1.0):
        raise ParameterError(f"alpha must lie in (0, 1], got {alpha}")
    return (1.0 - alpha) / alpha


def spectral_efficiency(config: WaveformConfig) -> dict:
    """Payload bits per second per hertz of occupied bandwidth, plus the
    compression gain over the same-kind uncompressed waveform."""
    duration = config.frame_len / config.sample_rate
    if config.kind == "nofs":
        bandwidth = config.nofs_alpha * config.m * config.subcarrier_spacing
        gain = efficiency_gain(config.nofs_alpha)
    elif config.kind in ("sc-nofs-1d", "sc-nofs-2d"):
        bandwidth = config.shaped_len * config.subcarrier_spacing
        gain = efficiency_gain(config.q / config.m)
    else:
        bandwidth = config.m * config.subcarrier_spacing
        gain = 0.0
    return {
        "bits_per_sec_per_hz": config.payload_bits / (duration * bandwidth),
        "gain_vs_reference": gain,
    }


@dataclass(frozen=True)
class ScenarioPreset:
    """Named bundle: base config + channel + detector + SNR grid + seeds.

    The waveform kind is selectable at materialization time so one preset
    serves every comparison curve.
    """

    name: str
    config: WaveformConfig
    channel_name: Optional[str]
    detector: DetectorKind
    equalizer: str
    ebn0_grid: tuple
    seeds: tuple


def _reference_config(kind: str = "ofdm") -> WaveformConfig:
    return WaveformConfig(
        kind=kind,
        n=1024,
        m=600,
        k=140,
        cp=72,
        subcarrier_spacing=15e3,
        mod_order=4,
        pilot_block=7,
        q=492,
    )


PRESETS = {
    "fig4-awgn": ScenarioPreset(
        name="fig4-awgn",
        config=_reference_config(),
        channel_name=None,
        detector=DetectorKind("iterative"),
        equalizer="mmse",
        ebn0_grid=tuple(float(v) for v in range(0, 15, 2)),
        seeds=(0,),
    ),
    "fig5-fading": ScenarioPreset(
        name="fig5-fading",
        config=_reference_config(),
        channel_name="paper-tdl4",
        detector=DetectorKind("iterative"),
        equalizer="mmse",
        ebn0_grid=tuple(float(v) for v in range(0, 31, 2)),
        seeds=(0,),
    ),
}


def get_preset(name: str) -> ScenarioPreset:
    key = name.strip().lower()
    if key not in PRESETS:
        raise ParameterError(f"unknown preset {name!r}; available: {sorted(PRESETS)}")
    return PRESETS[key]


def preset_config(preset: ScenarioPreset, waveform: Optional[str] = None) -> WaveformConfig:
    """Materialize the preset's config for a waveform kind, building the
    truncated-DFT shaping pair when the kind compresses."""
    config = preset.config
    if waveform is not None and waveform.strip().lower() != config.kind:
        config = replace(config, kind=waveform.strip().lower())
    if config.kind in ("sc-nofs-1d", "sc-nofs-2d") and config.shaping is None:
        config = replace(config, shaping=build_nofst(config.m, config.q))
    return config


# --- scenario / manifest text format -----------------------------------
#
# Flat "key = value" lines, ascii, full-line # comments. The manifest a
# campaign emits uses exactly these keys, so it doubles as a scenario file.

_INT_KEYS = ("n", "m", "q", "k", "cp", "mod_order", "pilot_block",
             "iterations", "min_errors", "max_bits", "seed")
_FLOAT_KEYS = ("subcarrier_spacing", "nofs_alpha")


def parse_scenario(path) -> dict:
    """Read a scenario file into a flat str->str mapping."""
    entries = {}
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ParameterError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            entries[key.strip()] = value.strip()
    return entries


def _parse_grid(text: str) -> tuple:
    text = text.strip()
    if ":" in text:
        parts = [float(v) for v in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ParameterError(f"grid string {text!r} is not start:stop:step")
        start, stop, step = parts
        return tuple(np.arange(start, stop + step / 2, step).tolist())
    return tuple(float(v) for v in text.split(","))


def _parse_taps(entries: dict) -> PdpSpec:
    taps = []
    index = 0
    while f"tap.{index}" in entries:
        fields = entries[f"tap.{index}"].split()
        if len(fields) != 3:
            raise ParameterError(f"tap.{index} must be 'delay re im'")
        taps.append((int(fields[0]), float(fields[1]) + 1j * float(fields[2])))
        index += 1
    if not taps:
        raise ParameterError("channel = custom requires tap.0, tap.1, ... entries")
    return PdpSpec(taps=tuple(taps))


def scenario_campaign(entries: dict) -> dict:
    """Turn parsed scenario entries into run_link keyword arguments.

    Returns config, channel, channel_name, detector, equalizer, ebn0_grid,
    min_errors, max_bits, seed. Unknown keys are rejected so typos fail
    loudly instead of silently running defaults.
    """
    known = set(_INT_KEYS) | set(_FLOAT_KEYS) | {
        "kind", "channel", "detector", "equalizer", "ebn0_grid", "pair_file", "name",
    }
    for key in entries:
        if key not in known and not key.startswith("tap."):
            raise ParameterError(f"unknown scenario key {key!r}")

    values = {}
    for key in _INT_KEYS:
        if key in entries:
            values[key] = int(entries[key])
    for key in _FLOAT_KEYS:
        if key in entries:
            values[key] = float(entries[key])

    kind = entries.get("kind", "ofdm").strip().lower()
    config_kwargs = {
        "kind": kind,
        "n": values.get("n", 1024),
        "m": values.get("m", 600),
        "k": values.get("k", 140),
        "cp": values.get("cp", 72),
        "subcarrier_spacing": values.get("subcarrier_spacing", 15e3),
        "mod_order": values.get("mod_order", 4),
        "pilot_block": values.get("pilot_block", 7),
        "q": values.get("q"),
        "nofs_alpha": values.get("nofs_alpha", 1.0),
    }
    config = WaveformConfig(**config_kwargs)
    if config.kind in ("sc-nofs-1d", "sc-nofs-2d"):
        if "pair_file" in entries:
            pair = import_pair(entries["pair_file"])
        else:
            pair = build_nofst(config.m, config.q)
        if pair.m != config.m or pair.q != config.q:
            raise ConfigurationError(
                f"pair file dims ({pair.q}, {pair.m}) do not match config"
            )
        config = replace(config, shaping=pair)

    channel_text = entries.get("channel", "none").strip().lower()
    if channel_text == "none":
        channel, channel_name = None, None
    elif channel_text == "custom":
        channel, channel_name = _parse_taps(entries), None
    else:
        channel, channel_name = pdp_preset(channel_text), channel_text

    detector_text = entries.get("detector", "iterative").strip().lower()
    detector = None
    if detector_text != "none":
        detector = DetectorKind(detector_text, iterations=values.get("iterations", 8))

    return {
        "config": config,
        "channel": channel,
        "channel_name": channel_name,
        "detector": detector,
        "equalizer": entries.get("equalizer", "mmse").strip().lower(),
        "ebn0_grid": _parse_grid(entries.get("ebn0_grid", "0:14:2")),
        "min_errors": values.get("min_errors", 200),
        "max_bits": values.get("max_bits", 10_000_000),
        "seed": values.get("seed", 0),
    }


def format_manifest(report: LinkReport, pair_file: Optional[str] = None) -> str:
    """Serialize a campaign so `link --config <manifest>` reruns it
    bit-exactly. No timestamps, no environment capture: keys only."""
    cfg = report.config
    lines = ["# campaign manifest; rerun with: wavebench link --config <this file>"]
    lines.append(f"kind = {cfg.kind}")
    lines.append(f"n = {cfg.n}")
    lines.append(f"m = {cfg.m}")
    if cfg.q is not None:
        lines.append(f"q = {cfg.q}")
    lines.append(f"k = {cfg.k}")
    lines.append(f"cp = {cfg.cp}")
    lines.append(f"subcarrier_spacing = {cfg.subcarrier_spacing!r}")
    lines.append(f"mod_order = {cfg.mod_order}")
    lines.append(f"pilot_block = {cfg.pilot_block}")
    if cfg.kind == "nofs":
        lines.append(f"nofs_alpha = {cfg.nofs_alpha!r}")
    if pair_file is not None:
        lines.append(f"pair_file = {pair_file}")
    if report.pdp is None:
        lines.append("channel = none")
    elif report.channel_name is not None:
        lines.append(f"channel = {report.channel_name}")
    else:
        lines.append("channel = custom")
        for i, (delay, gain) in enumerate(report.pdp.taps):
            lines.append(f"tap.{i} = {delay} {gain.real!r} {gain.imag!r}")
    if report.detector is None:
        lines.append("detector = none")
    else:
        lines.append(f"detector = {report.detector.kind}")
        lines.append(f"iterations = {report.detector.iterations}")
    lines.append(f"equalizer = {report.equalizer}")
    lines.append("ebn0_grid = " + ",".join(repr(p.ebn0_db) for p in report.points))
    lines.append(f"min_errors = {report.min_errors}")
    lines.append(f"max_bits = {report.max_bits}")
    lines.append(f"seed = {report.seed}")
    return "\n".join(lines) + "\n"
