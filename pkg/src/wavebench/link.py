"""Receiver chain and Monte-Carlo BER engine.

One campaign = one config, one detector, one Eb/N0 grid, one seed. Every
frame draws payload, pilots, channel, and noise from four private
sub-streams derived from (seed, point index, frame index), so campaigns are
bit-reproducible and SNR points are independent work units.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .airframe import (
    WaveformConfig,
    build_grid,
    demap_frame,
    map_and_modulate,
    precode,
)
from .channel import (
    PdpSpec,
    apply_channel,
    awgn,
    noise_variance,
    realize_channel,
    validate_cp_covers,
)
from .errors import (
    CapacityError,
    ConfigurationError,
    DimensionError,
    ParameterError,
)
from .numerics import RandomStream, dft, nearest_qam, qam_demap, qam_map, QamSymbolBlock
from .shaping import OpCount, ShapingPair, frame_cost

__all__ = [
    "ChannelEstimate",
    "DetectorKind",
    "LinkPoint",
    "LinkReport",
    "estimate_channel",
    "equalize",
    "deprecode_detect",
    "run_link",
    "wilson_interval",
    "report_to_csv",
]

DETECTOR_KINDS = ("linear-recon", "mmse", "iterative", "exhaustive-oracle")

# exhaustive-oracle search budget: mod_order ** m candidates at most
_ORACLE_CAP = 2**20


@dataclass(frozen=True)
class ChannelEstimate:
    """Per-coherence-block, per-occupied-bin LS gains."""

    per_block: np.ndarray  # (num_blocks, shaped_len) complex


@dataclass(frozen=True)
class DetectorKind:
    """Detection strategy for the compressing kinds; ignored by the unitary
    kinds, whose inverse pipeline is exact."""

    kind: str
    iterations: int = 8

    def __post_init__(self):
        key = str(self.kind).strip().lower()
        object.__setattr__(self, "kind", key)
        if key not in DETECTOR_KINDS:
            raise ParameterError(
                f"unknown detector {self.kind!r}; choose one of {DETECTOR_KINDS}"
            )
        if self.iterations < 1:
            raise ParameterError("iterations must be >= 1")

    @classmethod
    def coerce(cls, value) -> "DetectorKind":
        if isinstance(value, cls):
            return value
        return cls(kind=str(value))


@dataclass(frozen=True)
class LinkPoint:
    ebn0_db: float
    bit_errors: int
    bits_tested: int
    ber: float
    ci_low: float
    ci_high: float


@dataclass
class LinkReport:
    """Campaign result: one LinkPoint per Eb/N0 value plus everything needed
    to rerun it bit-exactly."""

    points: list
    config: WaveformConfig
    detector: Optional[DetectorKind]
    equalizer: str
    channel_name: Optional[str]
    pdp: Optional[PdpSpec]
    seed: int
    min_errors: int
    max_bits: int
    frame_cost: OpCount


def wilson_interval(errors: int, trials: int, z: float = 1.96) -> tuple:
    """95% Wilson score interval for a binomial proportion; always brackets
    the point estimate errors/trials."""
    if trials <= 0:
        raise ParameterError("trials must be positive")
    p = errors / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4 * trials * trials)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def estimate_channel(received_pilot_column, known_pilots) -> np.ndarray:
    """Per-bin least squares: H[b] = received[b] / pilot[b]; pilots are
    unit-magnitude by construction, so no regularization is needed."""
    rx = np.asarray(received_pilot_column, dtype=np.complex128)
    ref = np.asarray(known_pilots, dtype=np.complex128)
    if rx.shape != ref.shape:
        raise DimensionError(f"pilot shapes differ: {rx.shape} vs {ref.shape}")
    return rx / ref


def equalize(column, gains, mode: str = "mmse", noise_var: float = 0.0) -> np.ndarray:
    """One-tap equalization of a demapped column (or a matrix of columns
    sharing the same gains).

    ZF divides per bin and zeroes bins whose estimated gain is below 1e-6
    in magnitude; MMSE applies conj(H)/(|H|^2 + noise_var).
    """
    y = np.asarray(column, dtype=np.complex128)
    h = np.asarray(gains, dtype=np.complex128)
    if y.shape[0] != h.shape[0] or h.ndim != 1:
        raise DimensionError(f"gains shape {h.shape} does not match column shape {y.shape}")
    hb = h if y.ndim == 1 else h[:, None]
    if mode.strip().lower() == "zf":
        degenerate = np.abs(hb) < 1e-6
        safe = np.where(degenerate, 1.0, hb)
        out = y / safe
        return np.where(np.broadcast_to(degenerate, out.shape), 0.0, out)
    if mode.strip().lower() == "mmse":
        denom = np.abs(hb) ** 2 + noise_var
        degenerate = denom == 0.0
        out = y * np.conj(hb) / np.where(degenerate, 1.0, denom)
        return np.where(np.broadcast_to(degenerate, out.shape), 0.0, out)
    raise ParameterError(f"unknown equalizer mode {mode!r}; choose 'zf' or 'mmse'")


def _oracle_candidates(m: int, order: int):
    """Symbol table for all order**m 'bit-lexicographic' candidate columns,
    expressed as an (m, count) index array into the per-symbol alphabet."""
    count = order**m
    bits_per = int(round(math.log2(order)))
    digits = np.arange(count, dtype=np.int64)
    shifts = (np.arange(m - 1, -1, -1) * bits_per)[:, None]
    idx = (digits[None, :] >> shifts) & (order - 1)
    alphabet_bits = ((np.arange(order)[:, None] >> np.arange(bits_per - 1, -1, -1)) & 1).ravel()
    alphabet = qam_map(alphabet_bits, order).symbols
    return alphabet, idx


def _detect_oracle(pair: ShapingPair, y: np.ndarray, order: int) -> np.ndarray:
    """Exact minimum-distance search over the full constellation power set.

    Candidates run in bit-lexicographic order and ties keep the first
    (smallest) pattern. Work is chunked so peak memory stays modest.
    """
    m = pair.m
    if order**m > _ORACLE_CAP:
        raise CapacityError(
            f"exhaustive search needs {order}**{m} candidates, over the {_ORACLE_CAP} cap"
        )
    alphabet, idx = _oracle_candidates(m, order)
    count = idx.shape[1]
    cols = y.shape[1]
    best_score = np.full(cols, np.inf)
    best_idx = np.zeros(cols, dtype=np.int64)
    chunk = 65536
    for start in range(0, count, chunk):
        sel = idx[:, start : start + chunk]
        cand = alphabet[sel]  # (m, chunk)
        shaped = pair.forward @ cand  # (q, chunk)
        norms = np.sum(np.abs(shaped) ** 2, axis=0)  # (chunk,)
        cross = shaped.conj().T @ y  # (chunk, cols)
        scores = norms[:, None] - 2.0 * cross.real
        arg = np.argmin(scores, axis=0)
        val = scores[arg, np.arange(cols)]
        better = val < best_score  # strict: earliest candidate wins ties
        best_score[better] = val[better]
        best_idx[better] = arg[better] + start
    return alphabet[idx[:, best_idx]]


def _detect_columns(
    pair: ShapingPair,
    y: np.ndarray,
    order: int,
    detector: DetectorKind,
    noise_var: float,
) -> np.ndarray:
    """Estimate the m x cols symbol matrix behind y = F @ x + noise."""
    kind = detector.kind
    if kind == "linear-recon":
        return pair.reconstruction @ y
    if kind == "mmse":
        f = pair.forward
        if noise_var > 0:
            gram = f.conj().T @ f + noise_var * np.eye(pair.m)
            return np.linalg.solve(gram, f.conj().T @ y)
        # zero-noise limit of the regularized inverse
        return np.linalg.pinv(f) @ y
    if kind == "iterative":
        # hard-decision parallel interference cancellation
        z = pair.reconstruction @ y
        p = pair.projector
        d = np.diag(p)[:, None]
        off = p - np.diag(np.diag(p))
        xhat = nearest_qam(z / d, order).symbols
        for _ in range(detector.iterations):
            xhat = nearest_qam((z - off @ xhat) / d, order).symbols
        return xhat
    if kind == "exhaustive-oracle":
        return _detect_oracle(pair, y, order)
    raise ParameterError(f"unknown detector {kind!r}")


def deprecode_detect(
    config: WaveformConfig,
    equalized: np.ndarray,
    detector=None,
    shaping: Optional[ShapingPair] = None,
    noise_var: float = 0.0,
) -> np.ndarray:
    """Invert the precoding pipeline on the equalized data columns and
    hard-decide back to bits.

    The unitary kinds invert exactly (row DFT for the 2D kinds, then column
    IDFT). The compressing kinds run the requested detector on the
    y = F @ x + noise model column by column.
    """
    y = np.asarray(equalized, dtype=np.complex128)
    if y.ndim == 1:
        y = y.reshape(-1, 1)
    kind = config.kind
    if kind == "nofs":
        raise ConfigurationError("the demo basis has no receiver")
    if y.shape[0] != config.shaped_len:
        raise DimensionError(
            f"equalized rows {y.shape[0]} != shaped length {config.shaped_len}"
        )

    if kind in ("sc-ofdm-2d", "sc-nofs-2d"):
        y = dft(y.T).T  # undo the row-wise IDFT time spreading

    if kind == "ofdm":
        symbols = y
    elif kind in ("sc-ofdm-1d", "sc-ofdm-2d"):
        symbols = dft(y, inverse=True)
    else:
        pair = shaping if shaping is not None else config.shaping
        if pair is None:
            raise ConfigurationError(f"kind {kind!r} requires a shaping pair to detect")
        det = DetectorKind.coerce(detector if detector is not None else "linear-recon")
        symbols = _detect_columns(pair, y, config.mod_order, det, noise_var)

    block = QamSymbolBlock(symbols=symbols.ravel(order="F"), order=config.mod_order)
    return qam_demap(block)


def _stream(seed: int, point: int, frame: int, purpose: int) -> RandomStream:
    return RandomStream(seed, (point * 2**24 + frame) * 4 + purpose)


def run_link(
    config: WaveformConfig,
    detector,
    ebn0_grid: Sequence[float],
    min_errors: int = 200,
    max_bits: int = 10_000_000,
    seed: int = 0,
    channel: Optional[PdpSpec] = None,
    channel_name: Optional[str] = None,
    equalizer: str = "mmse",
    shaping: Optional[ShapingPair] = None,
) -> LinkReport:
    """Monte-Carlo BER campaign over an Eb/N0 grid.

    Each frame gets a fresh payload, pilot set, channel realization, and
    noise draw. A point stops after min_errors bit errors or max_bits
    simulated bits, whichever comes first (at least one frame always runs).
    With channel=None the receiver assumes the unit channel and skips
    estimation; with a fading channel, pilots are mandatory and the
    estimate is held constant across each coherence block.
    """
    grid_list = [float(v) for v in ebn0_grid]
    if not grid_list:
        raise ParameterError("ebn0_grid must be nonempty")
    if min_errors < 1:
        raise ParameterError("min_errors must be >= 1")
    if max_bits < config.payload_bits:
        raise ParameterError(
            f"max_bits {max_bits} below one frame's payload {config.payload_bits}"
        )
    if config.kind == "nofs":
        raise ConfigurationError("the demo basis has no receiver to simulate")
    pair = shaping if shaping is not None else config.shaping
    if config.kind in ("sc-nofs-1d", "sc-nofs-2d") and pair is None:
        raise ConfigurationError(f"kind {config.kind!r} requires a shaping pair")
    det = None if detector is None else DetectorKind.coerce(detector)
    if channel is not None:
        validate_cp_covers(config, channel)
        if config.pilot_block == 0:
            raise ConfigurationError("a fading channel needs pilot columns to estimate")

    payload_len = config.payload_bits
    if payload_len == 0:
        raise ParameterError("config carries no payload (pilot_block=1?)")
    data_cols = list(config.data_positions)
    pilot_cols = list(config.pilot_positions)

    points = []
    for pi, ebn0 in enumerate(grid_list):
        errors = 0
        bits = 0
        frame = 0
        while True:
            payload = _stream(seed, pi, frame, 0).generator.integers(0, 2, payload_len)
            grid = build_grid(config, payload, _stream(seed, pi, frame, 1))
            tx = map_and_modulate(config, precode(config, grid))
            es = float(np.mean(np.abs(tx.samples) ** 2))

            if channel is not None:
                realization = realize_channel(
                    channel,
                    num_blocks=config.k // config.pilot_block,
                    block_len=config.pilot_block * config.symbol_len,
                    stream=_stream(seed, pi, frame, 2),
                )
                rx = apply_channel(tx, realization)
            else:
                rx = tx
            rx = awgn(rx, ebn0, config, _stream(seed, pi, frame, 3), es_sample=es)

            demapped = demap_frame(config, rx)
            nvar = noise_variance(config, ebn0, es)
            if channel is not None:
                eq = np.empty((config.shaped_len, len(data_cols)), dtype=np.complex128)
                gains_by_block = [
                    estimate_channel(demapped[:, col], grid.pilot_values[:, bi])
                    for bi, col in enumerate(pilot_cols)
                ]
                per_block = config.pilot_block - 1  # data columns per coherence block
                for bi in range(len(pilot_cols)):
                    lo = bi * per_block
                    cols = data_cols[lo : lo + per_block]
                    if cols:
                        eq[:, lo : lo + len(cols)] = equalize(
                            demapped[:, cols], gains_by_block[bi], equalizer, nvar
                        )
            else:
                eq = demapped[:, data_cols]

            decided = deprecode_detect(config, eq, det, pair, noise_var=nvar)
            errors += int(np.count_nonzero(decided != payload))
            bits += payload_len
            frame += 1
            if errors >= min_errors or bits + payload_len > max_bits:
                break

        ci_low, ci_high = wilson_interval(errors, bits)
        points.append(
            LinkPoint(
                ebn0_db=ebn0,
                bit_errors=errors,
                bits_tested=bits,
                ber=errors / bits,
                ci_low=ci_low,
                ci_high=ci_high,
            )
        )

    return LinkReport(
        points=points,
        config=config,
        detector=det,
        equalizer=equalizer.strip().lower(),
        channel_name=channel_name,
        pdp=channel,
        seed=seed,
        min_errors=min_errors,
        max_bits=max_bits,
        frame_cost=frame_cost(config),
    )


def report_to_csv(report: LinkReport) -> str:
    """Render a report as CSV, one row per SNR point. Floats use shortest
    round-trip repr so identical campaigns serialize byte-identically."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["ebn0_db", "bits", "errors", "ber", "ci_low", "ci_high", "real_mults", "real_adds"]
    )
    cost = report.frame_cost
    for p in report.points:
        writer.writerow(
            [
                repr(p.ebn0_db),
                p.bits_tested,
                p.bit_errors,
                repr(p.ber),
                repr(p.ci_low),
                repr(p.ci_high),
                cost.real_mults,
                cost.real_adds,
            ]
        )
    return buf.getvalue()
