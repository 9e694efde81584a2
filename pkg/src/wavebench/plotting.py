"""Static figure rendering for the CLI report paths.

Strictly file output on the Agg backend; nothing here feeds back into any
numeric result. Each helper takes labeled curves and writes one PNG.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

__all__ = ["render_ber", "render_ccdf", "render_psd", "render_complexity"]


def _finish(fig, ax, path, xlabel, ylabel):
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, which="both", alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_ber(points_by_label: dict, path) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for label, points in points_by_label.items():
        x = [p.ebn0_db for p in points]
        y = [max(p.ber, 1e-12) for p in points]
        ax.semilogy(x, y, marker="o", label=label)
    _finish(fig, ax, path, "Eb/N0 (dB)", "BER")


def render_ccdf(curves_by_label: dict, path) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for label, curve in curves_by_label.items():
        ax.semilogy(curve.thresholds_db, curve.exceed_prob.clip(min=1e-12), label=label)
    ax.set_ylim(1e-4, 1.1)
    _finish(fig, ax, path, "PAPR threshold (dB)", "P(PAPR > threshold)")


def render_psd(estimates_by_label: dict, path) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for label, est in estimates_by_label.items():
        ax.plot(est.freq_bins, est.power_db, label=label, linewidth=0.9)
    ax.set_ylim(-100, 5)
    _finish(fig, ax, path, "normalized frequency (cycles/sample)", "PSD (dB rel. peak)")


def render_complexity(rows: list, path) -> None:
    """rows: (label, real_mults, real_adds) triples."""
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    labels = [r[0] for r in rows]
    pos = range(len(rows))
    ax.bar([p - 0.2 for p in pos], [r[1] for r in rows], width=0.4, label="real mults")
    ax.bar([p + 0.2 for p in pos], [r[2] for r in rows], width=0.4, label="real adds")
    ax.set_xticks(list(pos))
    ax.set_xticklabels(labels, rotation=20, ha="right")
    ax.set_yscale("log")
    _finish(fig, ax, path, "waveform", "operations per frame")
