import numpy as np
import pytest

import wavebench as wb

# The toy pair every detector test shares: refinement breaks the exact
# QPSK-difference ties the truncated (8,6) construction carries, making the
# brute-force detector's answer unique.
TOY_TRAIN_SEED = 42
TOY_TRAIN_COLUMNS = 512
TOY_STEPS = 500
TOY_RATE = 0.05


def qpsk_columns(seed, m, count, stream_id=0):
    """Deterministic QPSK test block of shape (m, count)."""
    stream = wb.RandomStream(seed, stream_id)
    bits = stream.generator.integers(0, 2, size=2 * m * count)
    return wb.qam_map(bits, 4).symbols.reshape(m, count, order="F")


@pytest.fixture(scope="session")
def toy_pair():
    base = wb.build_nofst(8, 6)
    training = qpsk_columns(TOY_TRAIN_SEED, 8, TOY_TRAIN_COLUMNS)
    return wb.refine_nofst(base, training, steps=TOY_STEPS, rate=TOY_RATE)


@pytest.fixture(scope="session")
def reference_pair():
    return wb.build_nofst(600, 492)


@pytest.fixture(scope="session")
def reference_dims():
    return dict(n=1024, m=600, k=140, cp=72)


def make_config(kind, pair=None, pilot_block=7, **overrides):
    """Reference-dimension WaveformConfig with selective overrides."""
    params = dict(n=1024, m=600, k=140, cp=72, pilot_block=pilot_block)
    params.update(overrides)
    if kind in ("sc-nofs-1d", "sc-nofs-2d"):
        params.setdefault("q", 492)
        params["shaping"] = pair
    if kind == "nofs":
        params.setdefault("nofs_alpha", 0.8)
    return wb.WaveformConfig(kind=kind, **params)
