"""Resource grid, precoding pipelines, bin mapping, and CP framing.

The transmit chain is build_grid -> precode -> map_and_modulate. Pilot
columns are interleaved in time (one leading each pilot_block-symbol
coherence block) and bypass every precoding stage; under the compressing
kinds they carry shaped_len known QPSK values directly on the occupied
bins, so all columns of a frame occupy the same bins and the pilot measures
exactly what the data uses. demap_frame is the exact receiver-side inverse
of the bin mapping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    ConfigurationError,
    DimensionError,
    FramingError,
    MappingError,
    ParameterError,
)
from .numerics import RandomStream, dft, qam_map
from .shaping import ShapingPair

__all__ = [
    "WAVEFORM_KINDS",
    "WaveformConfig",
    "ResourceGrid",
    "FrameSignal",
    "occupied_bins",
    "signed_freqs",
    "build_grid",
    "precode",
    "map_and_modulate",
    "nofs_modulate",
    "demap_frame",
    "write_frame",
    "read_frame",
]

WAVEFORM_KINDS = (
    "ofdm",
    "nofs",
    "sc-ofdm-1d",
    "sc-nofs-1d",
    "sc-ofdm-2d",
    "sc-nofs-2d",
)

_SHAPED_KINDS = ("sc-nofs-1d", "sc-nofs-2d")
_2D_KINDS = ("sc-ofdm-2d", "sc-nofs-2d")


@dataclass(frozen=True)
class WaveformConfig:
    """All dimensioning for one waveform: transform sizes, CP, cadence.

    q is required only for the compressing kinds. pilot_block = 0 means no
    pilot columns at all (every column carries payload); pilot_block >= 1
    places a pilot at the head of every block of that many symbols.
    """

    kind: str
    n: int
    m: int
    k: int
    cp: int
    subcarrier_spacing: float = 15e3
    mod_order: int = 4
    pilot_block: int = 0
    q: Optional[int] = None
    nofs_alpha: float = 1.0
    shaping: Optional[ShapingPair] = None

    def __post_init__(self):
        kind = str(self.kind).strip().lower()
        object.__setattr__(self, "kind", kind)
        if kind not in WAVEFORM_KINDS:
            raise ConfigurationError(f"unknown waveform kind {self.kind!r}")
        if self.n < 2:
            raise ConfigurationError(f"n must be >= 2, got {self.n}")
        if not (1 <= self.m <= self.n - 1):
            raise ConfigurationError(f"need 1 <= m <= n-1, got m={self.m}, n={self.n}")
        if self.k < 1:
            raise ConfigurationError(f"k must be >= 1, got {self.k}")
        if not (0 <= self.cp <= self.n):
            raise ConfigurationError(f"need 0 <= cp <= n, got cp={self.cp}")
        if self.subcarrier_spacing <= 0:
            raise ConfigurationError("subcarrier_spacing must be positive")
        if self.mod_order not in (4, 16, 64):
            raise ConfigurationError(f"mod_order must be 4, 16 or 64, got {self.mod_order}")
        if self.pilot_block < 0:
            raise ConfigurationError("pilot_block must be >= 0")
        if self.pilot_block > 0 and self.k % self.pilot_block != 0:
            raise ConfigurationError(
                f"k={self.k} not divisible by pilot_block={self.pilot_block}"
            )
        if kind in _SHAPED_KINDS:
            if self.q is None:
                raise ConfigurationError(f"kind {kind!r} requires q")
        if self.q is not None and not (0 < self.q < self.m):
            raise ConfigurationError(f"need 0 < q < m, got q={self.q}, m={self.m}")
        if self.shaping is not None:
            if self.shaping.m != self.m or (self.q is not None and self.shaping.q != self.q):
                raise ConfigurationError(
                    f"shaping pair dims ({self.shaping.q}, {self.shaping.m}) do not "
                    f"match config (q={self.q}, m={self.m})"
                )

    @property
    def sample_rate(self) -> float:
        return self.n * self.subcarrier_spacing

    @property
    def bits_per_symbol(self) -> int:
        return int(round(math.log2(self.mod_order)))

    @property
    def shaped_len(self) -> int:
        """Occupied bins per symbol: q after compression, m otherwise."""
        return int(self.q) if self.kind in _SHAPED_KINDS else self.m

    @property
    def symbol_len(self) -> int:
        return self.n + self.cp

    @property
    def frame_len(self) -> int:
        return self.k * self.symbol_len

    @property
    def pilot_positions(self) -> tuple:
        if self.pilot_block == 0:
            return ()
        return tuple(range(0, self.k, self.pilot_block))

    @property
    def num_pilot_columns(self) -> int:
        return len(self.pilot_positions)

    @property
    def num_data_columns(self) -> int:
        return self.k - self.num_pilot_columns

    @property
    def data_positions(self) -> tuple:
        pilots = set(self.pilot_positions)
        return tuple(i for i in range(self.k) if i not in pilots)

    @property
    def payload_bits(self) -> int:
        """Bits one frame carries; defined pre-compression (m symbols per
        data column regardless of q)."""
        return self.num_data_columns * self.m * self.bits_per_symbol


@dataclass
class ResourceGrid:
    """m x k symbol grid with pilot labeling.

    Under the compressing kinds, pilot columns hold their shaped_len QPSK
    values in the first q rows (the rest is zero padding so the matrix
    stays rectangular); precode forwards exactly those q values.
    """

    data: np.ndarray
    pilot_mask: np.ndarray
    pilot_values: np.ndarray


@dataclass
class FrameSignal:
    """Time-domain frame: k symbols of n+cp samples, concatenated."""

    samples: np.ndarray
    config: WaveformConfig

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128).ravel()
        if samples.size != self.config.frame_len:
            raise FramingError(
                f"frame length {samples.size} != k*(n+cp) = {self.config.frame_len}"
            )
        self.samples = samples


def occupied_bins(n: int, width: int) -> np.ndarray:
    """DFT bin indices carrying the `width` active values: 1..ceil(width/2)
    then n-floor(width/2)..n-1 (DC nulled, spectrum centered)."""
    if not (1 <= width <= n - 1):
        raise MappingError(f"need 1 <= width <= n-1, got width={width}, n={n}")
    pos = (width + 1) // 2
    neg = width // 2
    return np.concatenate([np.arange(1, pos + 1), np.arange(n - neg, n)])


def signed_freqs(n: int, width: int) -> np.ndarray:
    """Signed per-bin frequencies matching occupied_bins order."""
    pos = (width + 1) // 2
    neg = width // 2
    return np.concatenate([np.arange(1, pos + 1), np.arange(-neg, 0)])


def build_grid(config: WaveformConfig, payload_bits, pilot_stream: RandomStream) -> ResourceGrid:
    """Fill a grid: seeded unit-energy QPSK pilots at the block heads, mapped
    QAM payload everywhere else (column-major fill in time order)."""
    bits = np.asarray(payload_bits).ravel()
    if bits.size != config.payload_bits:
        raise FramingError(
            f"payload is {bits.size} bits, config needs exactly {config.payload_bits}"
        )
    m, k = config.m, config.k
    data = np.zeros((m, k), dtype=np.complex128)

    pilot_cols = config.pilot_positions
    plen = config.shaped_len
    pilot_values = np.zeros((plen, len(pilot_cols)), dtype=np.complex128)
    if pilot_cols:
        pilot_bits = pilot_stream.generator.integers(0, 2, size=2 * plen * len(pilot_cols))
        pilot_values = qam_map(pilot_bits, 4).symbols.reshape(plen, len(pilot_cols), order="F")
        data[:plen, list(pilot_cols)] = pilot_values

    data_cols = config.data_positions
    if data_cols:
        symbols = qam_map(bits, config.mod_order).symbols.reshape(m, len(data_cols), order="F")
        data[:, list(data_cols)] = symbols

    pilot_mask = np.zeros(k, dtype=bool)
    pilot_mask[list(pilot_cols)] = True
    return ResourceGrid(data=data, pilot_mask=pilot_mask, pilot_values=pilot_values)


def precode(config: WaveformConfig, grid: ResourceGrid) -> np.ndarray:
    """Apply the per-kind precoding pipeline to the data columns.

    Returns the shaped_len x k matrix headed for bin mapping. Pilot columns
    pass through untouched; the 2D kinds run their row-wise k'-point IDFT
    across the data columns only.
    """
    x = np.asarray(grid.data, dtype=np.complex128)
    if x.shape != (config.m, config.k):
        raise DimensionError(
            f"grid shape {x.shape} does not match config (m={config.m}, k={config.k})"
        )
    kind = config.kind
    data_cols = list(config.data_positions)
    pilot_cols = list(config.pilot_positions)

    if kind in ("ofdm", "nofs"):
        return x.copy()

    if kind in ("sc-ofdm-1d", "sc-ofdm-2d"):
        out = x.copy()
        if data_cols:
            spread = dft(x[:, data_cols])
            if kind in _2D_KINDS:
                spread = dft(spread.T, inverse=True).T
            out[:, data_cols] = spread
        return out

    # compressing kinds
    pair = config.shaping
    if pair is None:
        raise ConfigurationError(f"kind {kind!r} requires a shaping pair on the config")
    q = config.q
    out = np.zeros((q, config.k), dtype=np.complex128)
    if pilot_cols:
        out[:, pilot_cols] = x[:q, pilot_cols]
    if data_cols:
        shaped = pair.forward @ x[:, data_cols]
        if kind in _2D_KINDS:
            shaped = dft(shaped.T, inverse=True).T
        out[:, data_cols] = shaped
    return out


def map_and_modulate(config: WaveformConfig, precoded: np.ndarray) -> FrameSignal:
    """Place each column on the occupied bins, inverse-transform, prepend CP.

    Column c of the output frame occupies samples [c*(n+cp), (c+1)*(n+cp));
    the first cp of those are a copy of the symbol's last cp body samples.
    """
    arr = np.asarray(precoded, dtype=np.complex128)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise DimensionError("precoded input must be a vector or a matrix")
    width, cols = arr.shape
    if width >= config.n:
        raise MappingError(f"{width} active values do not fit n={config.n} bins with DC nulled")
    if cols != config.k:
        raise DimensionError(f"expected k={config.k} columns, got {cols}")
    n, cp = config.n, config.cp
    spectrum = np.zeros((n, cols), dtype=np.complex128)
    spectrum[occupied_bins(n, width)] = arr
    body = dft(spectrum, inverse=True)
    with_cp = np.concatenate([body[n - cp:], body], axis=0) if cp else body
    return FrameSignal(samples=with_cp.ravel(order="F"), config=config)


def nofs_modulate(config: WaveformConfig, grid) -> FrameSignal:
    """Direct synthesis on compressed-spacing exponentials (transmit-only
    demonstration path; there is no receiver for this kind).

    Per column: x[t] = (1/sqrt(n)) sum_l s_l exp(2pi j t f_l alpha / n) with
    the same signed frequencies f_l the orthogonal mapping uses, then CP as
    usual. alpha = 1 reproduces map_and_modulate exactly.
    """
    if config.kind != "nofs":
        raise ConfigurationError(f"nofs_modulate requires kind 'nofs', got {config.kind!r}")
    alpha = config.nofs_alpha
    if not (0.0 < alpha <= 1.0):
        raise ParameterError(f"nofs_alpha must lie in (0, 1], got {alpha}")
    x = grid.data if isinstance(grid, ResourceGrid) else np.asarray(grid, dtype=np.complex128)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if x.shape != (config.m, config.k):
        raise DimensionError(
            f"grid shape {x.shape} does not match config (m={config.m}, k={config.k})"
        )
    n, cp = config.n, config.cp
    t = np.arange(n)[:, None]
    freqs = signed_freqs(n, config.m)[None, :] * alpha
    basis = np.exp(2j * np.pi * t * freqs / n) / math.sqrt(n)
    body = basis @ x
    with_cp = np.concatenate([body[n - cp:], body], axis=0) if cp else body
    return FrameSignal(samples=with_cp.ravel(order="F"), config=config)


def demap_frame(config: WaveformConfig, received) -> np.ndarray:
    """Inverse of the bin mapping: drop CP, forward transform, gather the
    occupied bins. Returns the shaped_len x k frequency-domain matrix."""
    samples = received.samples if isinstance(received, FrameSignal) else np.asarray(received)
    samples = np.asarray(samples, dtype=np.complex128).ravel()
    if samples.size != config.frame_len:
        raise FramingError(
            f"received length {samples.size} != k*(n+cp) = {config.frame_len}"
        )
    n, cp = config.n, config.cp
    columns = samples.reshape(config.k, n + cp).T
    spectrum = dft(columns[cp:])
    return spectrum[occupied_bins(n, config.shaped_len)]


def write_frame(frame: FrameSignal, path) -> None:
    """Dump samples as little-endian float64 pairs, real then imaginary."""
    flat = np.empty(2 * frame.samples.size, dtype=np.float64)
    flat[0::2] = frame.samples.real
    flat[1::2] = frame.samples.imag
    flat.astype("<f8").tofile(path)


def read_frame(path, config: WaveformConfig) -> FrameSignal:
    """Read back a frame written by write_frame; length must match config."""
    raw = np.fromfile(path, dtype="<f8")
    if raw.size % 2 != 0:
        raise FramingError(f"frame file holds {raw.size} floats, expected re/im pairs")
    return FrameSignal(samples=raw[0::2] + 1j * raw[1::2], config=config)
