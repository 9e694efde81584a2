"""Independent reference implementations the tests check against.

Everything here is written the slow, obvious way on purpose: direct
summations and explicit loops, no shared code with the package under test.
"""

import math

import numpy as np


def naive_dft(x, inverse=False):
    """O(L^2) unitary DFT by direct summation."""
    x = np.asarray(x, dtype=np.complex128)
    L = x.shape[0]
    sign = 1.0 if inverse else -1.0
    n = np.arange(L)
    out = np.empty_like(x)
    for k in range(L):
        out[k] = np.sum(x * np.exp(sign * 2j * np.pi * k * n / L))
    return out / math.sqrt(L)


def counted_complex_matvec(a, x):
    """Dense complex matrix-vector product with an explicit real-multiply
    counter: each complex multiply costs four real multiplies."""
    a = np.asarray(a, dtype=np.complex128)
    x = np.asarray(x, dtype=np.complex128)
    rows, cols = a.shape
    out = np.zeros(rows, dtype=np.complex128)
    real_mults = 0
    for i in range(rows):
        acc = 0.0 + 0.0j
        for j in range(cols):
            ar, ai = a[i, j].real, a[i, j].imag
            xr, xi = x[j].real, x[j].imag
            acc += complex(ar * xr - ai * xi, ar * xi + ai * xr)
            real_mults += 4
        out[i] = acc
    return out, real_mults


def direct_convolution(x, h):
    """Full linear convolution by the defining double loop."""
    x = np.asarray(x, dtype=np.complex128)
    h = np.asarray(h, dtype=np.complex128)
    out = np.zeros(x.size + h.size - 1, dtype=np.complex128)
    for i in range(x.size):
        for j in range(h.size):
            out[i + j] += x[i] * h[j]
    return out


def qfunc(x):
    """Gaussian tail probability Q(x)."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def qpsk_awgn_ber(ebn0_db):
    """Analytic uncoded QPSK bit error rate on AWGN."""
    ebn0 = 10.0 ** (ebn0_db / 10.0)
    return qfunc(math.sqrt(2.0 * ebn0))


def measured_snr_db(clean, noisy):
    """Empirical per-sample SNR of noisy against the clean reference."""
    clean = np.asarray(clean)
    noise = np.asarray(noisy) - clean
    return 10.0 * np.log10(np.mean(np.abs(clean) ** 2) / np.mean(np.abs(noise) ** 2))
