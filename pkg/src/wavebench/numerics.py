"""Complex-sequence primitives shared by every other module.

Three contracts live here and everything downstream leans on them:

* the DFT is unitary in both directions (1/sqrt(L) each way), so Parseval
  holds exactly and SNR bookkeeping never needs hidden scale factors;
* constellations have unit average energy under the declared Gray tables;
* a RandomStream is fully determined by (seed, stream_id) and replays the
  same draws on every run and platform (pinned generator algorithm).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, FramingError, MappingError, ParameterError

__all__ = [
    "RandomStream",
    "QamSymbolBlock",
    "dft",
    "qam_map",
    "qam_demap",
    "nearest_qam",
    "draw_cgaussian",
]


class RandomStream:
    """Named, replayable pseudo-random source.

    The pair (seed, stream_id) fully determines the draw sequence. Instances
    own their generator state: share the ids across workers, never the
    object itself.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        entropy = (self.seed % 2**64, self.stream_id % 2**64)
        self._gen = np.random.default_rng(np.random.SeedSequence(entropy))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, stream_id={self.stream_id})"


@dataclass
class QamSymbolBlock:
    """A block of constellation symbols plus the cardinality they came from."""

    symbols: np.ndarray
    order: int

    @property
    def bits_per_symbol(self) -> int:
        return int(round(math.log2(self.order)))


def dft(x: np.ndarray, inverse: bool = False) -> np.ndarray:
    """Unitary DFT along the first axis.

    1-D input transforms as a sequence; 2-D input transforms each column
    independently. Both directions carry the 1/sqrt(L) factor, so
    ``dft(dft(x), inverse=True)`` is the identity and norms are preserved.
    """
    arr = np.asarray(x, dtype=np.complex128)
    if arr.ndim == 0 or arr.shape[0] == 0:
        raise DimensionError("dft requires a sequence of length >= 1")
    if inverse:
        return np.fft.ifft(arr, axis=0, norm="ortho")
    return np.fft.fft(arr, axis=0, norm="ortho")


# Per-axis amplitude levels indexed by the bit pattern of that axis,
# MSB first. Adjacent amplitudes differ in exactly one bit (Gray).
_AXIS_LEVELS = {
    1: np.array([1.0, -1.0]),
    2: np.array([3.0, 1.0, -3.0, -1.0]),
    3: np.array([7.0, 5.0, 1.0, 3.0, -7.0, -5.0, -1.0, -3.0]),
}

# Normalizers giving unit average constellation energy.
_SCALE = {4: 1.0 / math.sqrt(2.0), 16: 1.0 / math.sqrt(10.0), 64: 1.0 / math.sqrt(42.0)}


def _axis_bits(order: int) -> int:
    if order not in _SCALE:
        raise MappingError(f"unsupported modulation order {order}; choose 4, 16 or 64")
    return int(round(math.log2(order))) // 2


def qam_map(bits: np.ndarray, order: int) -> QamSymbolBlock:
    """Map a bit sequence onto Gray-coded square QAM with unit mean energy.

    Each symbol consumes log2(order) bits: the first half selects the I
    amplitude, the second half the Q amplitude, both MSB first.
    """
    b = _axis_bits(order)
    arr = np.asarray(bits).ravel().astype(np.int64)
    if arr.size % (2 * b) != 0:
        raise FramingError(
            f"bit count {arr.size} not divisible by {2 * b} (order {order})"
        )
    if arr.size and not np.all((arr == 0) | (arr == 1)):
        raise MappingError("bit values must be 0 or 1")
    groups = arr.reshape(-1, 2 * b)
    weights = 1 << np.arange(b - 1, -1, -1)
    idx_i = groups[:, :b] @ weights
    idx_q = groups[:, b:] @ weights
    levels = _AXIS_LEVELS[b]
    symbols = _SCALE[order] * (levels[idx_i] + 1j * levels[idx_q])
    return QamSymbolBlock(symbols=symbols, order=order)


def _slice_axis(values: np.ndarray, b: int) -> np.ndarray:
    # nearest level, first index on ties: tables are in bit-pattern order,
    # so "first" is the lexicographically smallest pattern
    levels = _AXIS_LEVELS[b]
    dist = np.abs(values[..., None] - levels)
    return np.argmin(dist, axis=-1)


def nearest_qam(values: np.ndarray, order: int) -> QamSymbolBlock:
    """Hard-slice arbitrary complex values to the nearest constellation point.

    Ties resolve toward the lexicographically smallest bit pattern, the same
    rule qam_demap applies.
    """
    b = _axis_bits(order)
    vals = np.asarray(values, dtype=np.complex128)
    scaled = vals / _SCALE[order]
    idx_i = _slice_axis(scaled.real, b)
    idx_q = _slice_axis(scaled.imag, b)
    levels = _AXIS_LEVELS[b]
    symbols = _SCALE[order] * (levels[idx_i] + 1j * levels[idx_q])
    return QamSymbolBlock(symbols=symbols, order=order)


def qam_demap(block: QamSymbolBlock) -> np.ndarray:
    """Minimum-distance hard decision back to bits.

    The I/Q metric separates per axis, so the joint nearest point is the pair
    of per-axis nearest levels; ties go to the smallest bit pattern.
    """
    b = _axis_bits(block.order)
    vals = np.asarray(block.symbols, dtype=np.complex128).ravel()
    scaled = vals / _SCALE[block.order]
    idx_i = _slice_axis(scaled.real, b)
    idx_q = _slice_axis(scaled.imag, b)
    shifts = np.arange(b - 1, -1, -1)
    bits_i = (idx_i[:, None] >> shifts) & 1
    bits_q = (idx_q[:, None] >> shifts) & 1
    return np.concatenate([bits_i, bits_q], axis=1).ravel().astype(np.uint8)


def draw_cgaussian(stream: RandomStream, n: int, variance: float) -> np.ndarray:
    """Draw n i.i.d. circularly symmetric complex Gaussians.

    Total per-sample power is `variance`, split evenly between the real and
    imaginary parts. Draws interleave re/im so the sequence is a pure
    function of the stream position.
    """
    if variance <= 0:
        raise ParameterError(f"variance must be positive, got {variance}")
    if n < 0:
        raise ParameterError(f"sample count must be nonnegative, got {n}")
    raw = stream.generator.standard_normal(2 * n)
    scale = math.sqrt(variance / 2.0)
    return scale * (raw[0::2] + 1j * raw[1::2])
