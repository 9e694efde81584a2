"""Spectral-compression transform pair and the exact operation-count model.

The forward transform F squeezes an m-symbol column into q < m shaped
samples; the reconstruction G maps back. Truncating a unitary DFT gives a
deterministic, reproducible pair whose residual G@F - I is fully
characterized here, and an optional gradient stage refines both matrices
against recorded training columns. The OpCount side of the module prices
every transform in exact real multiplications and additions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DimensionError, OptimizationError, ParameterError
from .numerics import QamSymbolBlock

__all__ = [
    "ShapingPair",
    "InterferenceProfile",
    "OpCount",
    "build_nofst",
    "refine_nofst",
    "interference_profile",
    "transform_cost",
    "frame_cost",
    "export_pair",
    "import_pair",
]


@dataclass(frozen=True)
class ShapingPair:
    """Forward (q x m) and reconstruction (m x q) matrices plus dimensions.

    Matrices are copied and frozen on construction; a pair is safe to share
    read-only across concurrent workers. q == m is tolerated so externally
    supplied degenerate pairs can flow through refinement, but build_nofst
    itself only produces strictly compressing pairs.
    """

    forward: np.ndarray
    reconstruction: np.ndarray
    m: int
    q: int
    alpha: float = field(init=False)

    def __post_init__(self):
        fwd = np.array(self.forward, dtype=np.complex128, order="C")
        rec = np.array(self.reconstruction, dtype=np.complex128, order="C")
        if fwd.shape != (self.q, self.m):
            raise DimensionError(
                f"forward shape {fwd.shape} != (q, m) = ({self.q}, {self.m})"
            )
        if rec.shape != (self.m, self.q):
            raise DimensionError(
                f"reconstruction shape {rec.shape} != (m, q) = ({self.m}, {self.q})"
            )
        if not (0 < self.q <= self.m):
            raise DimensionError(f"need 0 < q <= m, got q={self.q}, m={self.m}")
        if not (np.all(np.isfinite(fwd)) and np.all(np.isfinite(rec))):
            raise ParameterError("pair matrices must be finite")
        fwd.setflags(write=False)
        rec.setflags(write=False)
        object.__setattr__(self, "forward", fwd)
        object.__setattr__(self, "reconstruction", rec)
        object.__setattr__(self, "alpha", self.q / self.m)

    @cached_property
    def projector(self) -> np.ndarray:
        """G @ F, the m x m reconstruction operator (cached: detectors hit
        this once per campaign, not once per frame)."""
        return self.reconstruction @ self.forward


@dataclass(frozen=True)
class InterferenceProfile:
    """Summary of the reconstruction residual R = G@F - I."""

    residual: np.ndarray
    max_offdiag: float
    diag_rmse: float
    frobenius: float


def _unitary_dft_matrix(m: int) -> np.ndarray:
    return np.fft.fft(np.eye(m), axis=0, norm="ortho")


def build_nofst(m: int, q: int) -> ShapingPair:
    """Truncated-DFT construction: F = first q rows of the unitary m-point
    DFT, G = least-norm right inverse F^H (F F^H)^-1.

    F@G = I_q by construction and G@F is the rank-q orthogonal projector
    onto the retained spectral subspace.
    """
    if not (0 < q < m):
        raise DimensionError(f"need 0 < q < m, got q={q}, m={m}")
    f = _unitary_dft_matrix(m)[:q]
    gram = f @ f.conj().T
    g = np.linalg.solve(gram, f).conj().T
    return ShapingPair(forward=f, reconstruction=g, m=m, q=q)


def _training_matrix(training, m: int) -> np.ndarray:
    if isinstance(training, QamSymbolBlock):
        training = training.symbols
    x = np.asarray(training, dtype=np.complex128)
    if x.ndim == 1:
        if x.size % m != 0:
            raise DimensionError(f"flat training length {x.size} not divisible by m={m}")
        x = x.reshape(m, -1, order="F")
    if x.ndim != 2 or x.shape[0] != m:
        raise DimensionError(f"training must be one length-{m} column per example")
    return x


def refine_nofst(pair: ShapingPair, training, steps: int, rate: float) -> ShapingPair:
    """Full-batch gradient descent on mean-squared reconstruction error.

    Treats every real and imaginary entry of F and G as a free parameter and
    takes `steps` fixed-rate steps against the loss
    mean |G@(F@X) - X|^2 over the training columns X. Returns the best
    iterate seen, so the returned MSE never exceeds the input's. Ten
    consecutive MSE increases abort with the best-so-far pair attached.
    """
    if steps < 0:
        raise ParameterError(f"steps must be nonnegative, got {steps}")
    if steps == 0:
        return pair
    if rate <= 0:
        raise ParameterError(f"rate must be positive, got {rate}")
    x = _training_matrix(training, pair.m)
    t = x.shape[1]
    if t == 0:
        raise DimensionError("training set is empty")

    f = pair.forward.copy()
    g = pair.reconstruction.copy()
    scale = 1.0 / (pair.m * t)

    def loss(fm, gm):
        err = gm @ (fm @ x) - x
        return float(np.mean(np.abs(err) ** 2))

    best_f, best_g, best_mse = f.copy(), g.copy(), loss(f, g)
    prev = best_mse
    bad_streak = 0
    for _ in range(steps):
        fx = f @ x
        err = g @ fx - x
        # Wirtinger gradients of the mean squared error, scaled so `rate`
        # means the same thing at any problem size.
        grad_g = 2.0 * scale * (err @ fx.conj().T)
        grad_f = 2.0 * scale * (g.conj().T @ err @ x.conj().T)
        f = f - rate * grad_f
        g = g - rate * grad_g
        cur = loss(f, g)
        if cur < best_mse:
            best_f, best_g, best_mse = f.copy(), g.copy(), cur
        # a non-finite loss never compares greater, but it is divergence
        if not np.isfinite(cur) or cur > prev:
            bad_streak += 1
            if bad_streak >= 10:
                best = ShapingPair(best_f, best_g, pair.m, pair.q)
                raise OptimizationError(
                    f"training MSE rose for {bad_streak} consecutive steps "
                    f"(rate {rate} too aggressive)",
                    best_pair=best,
                )
        else:
            bad_streak = 0
        prev = cur
    return ShapingPair(best_f, best_g, pair.m, pair.q)


def interference_profile(pair: ShapingPair) -> InterferenceProfile:
    """Characterize the self-interference left by G@F.

    diag_rmse is the per-symbol RMS reconstruction error for white
    unit-power input, sqrt(mean(diag(R R^H))); for the truncated-DFT pair
    the projector trace identity pins it at sqrt(1 - q/m).
    """
    m = pair.m
    residual = pair.reconstruction @ pair.forward - np.eye(m)
    off = residual - np.diag(np.diag(residual))
    max_offdiag = float(np.max(np.abs(off))) if m > 1 else 0.0
    row_power = np.sum(np.abs(residual) ** 2, axis=1)
    diag_rmse = float(math.sqrt(np.mean(row_power)))
    frobenius = float(np.linalg.norm(residual))
    return InterferenceProfile(
        residual=residual,
        max_offdiag=max_offdiag,
        diag_rmse=diag_rmse,
        frobenius=frobenius,
    )


@dataclass(frozen=True)
class OpCount:
    """Exact real-operation tally. Supports + and integer * for composition."""

    real_mults: int
    real_adds: int

    def __post_init__(self):
        if self.real_mults < 0 or self.real_adds < 0:
            raise ParameterError("operation counts must be nonnegative")

    def __add__(self, other: "OpCount") -> "OpCount":
        return OpCount(self.real_mults + other.real_mults, self.real_adds + other.real_adds)

    def __mul__(self, times: int) -> "OpCount":
        if times < 0:
            raise ParameterError("repetition count must be nonnegative")
        return OpCount(self.real_mults * times, self.real_adds * times)

    __rmul__ = __mul__


def _require_size(sizes: dict, name: str, kind: str) -> int:
    if name not in sizes:
        raise ParameterError(f"transform_cost({kind!r}) needs size {name!r}")
    value = int(sizes[name])
    if value <= 0:
        raise ParameterError(f"size {name!r} must be positive, got {value}")
    return value


def transform_cost(kind: str, **sizes) -> OpCount:
    """Price one transform instance in exact real operations.

    ifft(n): radix-2 split counting, (2n log2 n, 3n log2 n). dft(m) and
    idft(k): dense complex matrix-vector, 4 real mults and (almost) 4 real
    adds per entry. nofst(q, m): dense q x m complex matrix-vector.
    """
    key = kind.strip().lower()
    if key == "ifft":
        n = _require_size(sizes, "n", key)
        log2n = n.bit_length() - 1
        if 2**log2n != n:
            raise ParameterError(f"ifft cost model needs a power-of-two size, got {n}")
        return OpCount(2 * n * log2n, 3 * n * log2n)
    if key == "dft":
        m = _require_size(sizes, "m", key)
        return OpCount(4 * m * m, 4 * m * m - 2 * m)
    if key == "idft":
        k = _require_size(sizes, "k", key)
        return OpCount(4 * k * k, 4 * k * k - 2 * k)
    if key == "nofst":
        q = _require_size(sizes, "q", key)
        m = _require_size(sizes, "m", key)
        return OpCount(4 * q * m, 4 * q * m - 2 * q)
    raise ParameterError(f"unknown transform kind {kind!r}")


# Per-frame transform composition by waveform kind. The demo basis ("nofs")
# has no receiver and no cost model.
_FRAME_STAGES = {
    "ofdm": ("ifft",),
    "sc-ofdm-1d": ("dft", "ifft"),
    "sc-nofs-1d": ("nofst", "ifft"),
    "sc-ofdm-2d": ("dft", "row-idft-m", "ifft"),
    "sc-nofs-2d": ("nofst", "row-idft-q", "ifft"),
}


def frame_cost(config) -> OpCount:
    """Total transmit-transform cost of one frame for config.kind.

    K column transforms at the precode and IFFT stages, plus one K-point
    row transform per retained row for the 2D kinds.
    """
    kind = str(config.kind).strip().lower()
    if kind not in _FRAME_STAGES:
        raise ParameterError(f"no frame cost model for waveform kind {config.kind!r}")
    n, m, k = int(config.n), int(config.m), int(config.k)
    total = OpCount(0, 0)
    for stage in _FRAME_STAGES[kind]:
        if stage == "ifft":
            total = total + k * transform_cost("ifft", n=n)
        elif stage == "dft":
            total = total + k * transform_cost("dft", m=m)
        elif stage == "nofst":
            total = total + k * transform_cost("nofst", q=int(config.q), m=m)
        elif stage == "row-idft-m":
            total = total + m * transform_cost("idft", k=k)
        elif stage == "row-idft-q":
            total = total + int(config.q) * transform_cost("idft", k=k)
    return total


def export_pair(pair: ShapingPair, path) -> None:
    """Write a pair as plain text: m/q/alpha header, then row-major re/im
    pairs at full precision (one matrix row per line)."""
    lines = [
        "# shaping transform pair",
        f"m = {pair.m}",
        f"q = {pair.q}",
        f"alpha = {float(pair.alpha)!r}",
        "[forward]",
    ]
    for row in pair.forward:
        lines.append(" ".join(f"{float(v.real)!r} {float(v.imag)!r}" for v in row))
    lines.append("[reconstruction]")
    for row in pair.reconstruction:
        lines.append(" ".join(f"{float(v.real)!r} {float(v.imag)!r}" for v in row))
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def import_pair(path) -> ShapingPair:
    """Read back a pair written by export_pair."""
    header = {}
    sections: dict[str, list[np.ndarray]] = {}
    current = None
    with open(path, "r", encoding="ascii") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("[") and line.endswith("]"):
                current = line[1:-1]
                sections[current] = []
                continue
            if current is None:
                key, _, value = line.partition("=")
                header[key.strip()] = value.strip()
                continue
            vals = np.array([float(tok) for tok in line.split()])
            if vals.size % 2 != 0:
                raise ParameterError(f"odd value count in pair file row: {line[:40]}...")
            sections[current].append(vals[0::2] + 1j * vals[1::2])
    try:
        m = int(header["m"])
        q = int(header["q"])
    except KeyError as missing:
        raise ParameterError(f"pair file missing header key {missing}") from None
    if "forward" not in sections or "reconstruction" not in sections:
        raise ParameterError("pair file must contain [forward] and [reconstruction]")
    fwd = np.vstack(sections["forward"])
    rec = np.vstack(sections["reconstruction"])
    return ShapingPair(forward=fwd, reconstruction=rec, m=m, q=q)
