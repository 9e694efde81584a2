"""Command-line front end.

Subcommands: link, papr, psd, complexity, design-nofst, calc. Every
campaign-style run writes a CSV, a manifest that reruns it bit-exactly
(`--config <manifest>`), and a PNG rendering next to the CSV unless
--no-plot is given. Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import re
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import bench
from .airframe import WaveformConfig, build_grid, map_and_modulate, nofs_modulate, precode
from .channel import (
    SPEED_OF_LIGHT,
    coherence_to_doppler,
    doppler_to_coherence,
    doppler_to_velocity,
)
from .errors import ParameterError
from .link import report_to_csv, run_link
from .numerics import RandomStream, qam_map
from .shaping import (
    build_nofst,
    export_pair,
    frame_cost,
    interference_profile,
    refine_nofst,
)

__all__ = ["main", "cli_main"]


class _Parser(argparse.ArgumentParser):
    """argparse reports usage problems with exit code 2 by default; the
    contract here is 1 for usage errors, 2 for runtime failures."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


_UNIT_SCALE = {
    "": 1.0,
    "s": 1.0,
    "ms": 1e-3,
    "us": 1e-6,
    "ns": 1e-9,
    "hz": 1.0,
    "khz": 1e3,
    "mhz": 1e6,
    "ghz": 1e9,
}


def parse_quantity(text: str) -> float:
    """Parse '0.5ms', '2.4GHz', '846' and friends into base SI units."""
    match = re.fullmatch(r"\s*([+-]?[0-9.]+(?:[eE][+-]?[0-9]+)?)\s*([A-Za-z]*)\s*", text)
    if not match:
        raise ParameterError(f"cannot parse quantity {text!r}")
    unit = match.group(2).lower()
    if unit not in _UNIT_SCALE:
        raise ParameterError(f"unknown unit {match.group(2)!r} in {text!r}")
    return float(match.group(1)) * _UNIT_SCALE[unit]


def _parse_c(text: str) -> float:
    if text.strip().lower() == "exact":
        return SPEED_OF_LIGHT
    return float(text)


_WAVEFORM_CHOICES = ("ofdm", "sc-ofdm-1d", "sc-nofs-1d", "sc-ofdm-2d", "sc-nofs-2d", "nofs")
_BENCH_KINDS = ("ofdm", "sc-ofdm-1d", "sc-nofs-1d", "sc-ofdm-2d", "sc-nofs-2d")


def _preset_entries(preset: bench.ScenarioPreset) -> dict:
    """Flatten a preset into scenario-format entries so presets and scenario
    files share one campaign-construction path."""
    cfg = preset.config
    entries = {
        "kind": cfg.kind,
        "n": str(cfg.n),
        "m": str(cfg.m),
        "k": str(cfg.k),
        "cp": str(cfg.cp),
        "subcarrier_spacing": repr(cfg.subcarrier_spacing),
        "mod_order": str(cfg.mod_order),
        "pilot_block": str(cfg.pilot_block),
        "channel": preset.channel_name or "none",
        "detector": preset.detector.kind,
        "iterations": str(preset.detector.iterations),
        "equalizer": preset.equalizer,
        "ebn0_grid": ",".join(repr(v) for v in preset.ebn0_grid),
        "seed": str(preset.seeds[0]),
    }
    if cfg.q is not None:
        entries["q"] = str(cfg.q)
    return entries


def _apply_overrides(entries: dict, args) -> dict:
    if getattr(args, "waveform", None):
        entries["kind"] = args.waveform
    if getattr(args, "seed", None) is not None:
        entries["seed"] = str(args.seed)
    if getattr(args, "snr", None):
        entries["ebn0_grid"] = args.snr
    if getattr(args, "min_errors", None) is not None:
        entries["min_errors"] = str(args.min_errors)
    if getattr(args, "max_bits", None) is not None:
        entries["max_bits"] = str(args.max_bits)
    if getattr(args, "detector", None):
        entries["detector"] = args.detector
    if getattr(args, "iterations", None) is not None:
        entries["iterations"] = str(args.iterations)
    if getattr(args, "equalizer", None):
        entries["equalizer"] = args.equalizer
    if getattr(args, "pair", None):
        entries["pair_file"] = args.pair
    return entries


def _cmd_link(args) -> int:
    if args.config:
        entries = bench.parse_scenario(args.config)
    else:
        entries = _preset_entries(bench.get_preset(args.preset))
    entries = _apply_overrides(entries, args)
    campaign = bench.scenario_campaign(entries)
    report = run_link(**campaign)

    out = Path(args.out)
    out.write_text(report_to_csv(report), encoding="ascii")
    manifest = out.with_suffix(".manifest.txt")
    manifest.write_text(
        bench.format_manifest(report, pair_file=entries.get("pair_file")), encoding="ascii"
    )
    wrote = [str(out), str(manifest)]
    if not args.no_plot:
        from . import plotting

        figure = out.with_suffix(".png")
        plotting.render_ber({report.config.kind: report.points}, figure)
        wrote.append(str(figure))

    for p in report.points:
        print(f"ebn0 {p.ebn0_db:6.2f} dB   ber {p.ber:.4e}   ({p.bit_errors}/{p.bits_tested})")
    print("wrote " + ", ".join(wrote))
    return 0


def _measurement_config(args, waveform: str, pilot_free: bool) -> WaveformConfig:
    preset = bench.get_preset(args.preset)
    config = bench.preset_config(preset, waveform)
    if pilot_free and config.pilot_block != 0:
        config = replace(config, pilot_block=0)
    if waveform == "nofs":
        config = replace(config, nofs_alpha=args.nofs_alpha)
    return config


def _measurement_frames(config: WaveformConfig, seed: int, count: int) -> list:
    """Seeded frames for the metric paths; frame f draws payload from
    sub-stream 2f and pilots from 2f+1, identically across waveforms."""
    frames = []
    for f in range(count):
        payload = RandomStream(seed, 2 * f).generator.integers(0, 2, config.payload_bits)
        grid = build_grid(config, payload, RandomStream(seed, 2 * f + 1))
        if config.kind == "nofs":
            frames.append(nofs_modulate(config, grid))
        else:
            frames.append(map_and_modulate(config, precode(config, grid)))
    return frames


def _write_table(path: Path, header: list, columns: list) -> None:
    rows = zip(*columns)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def _cmd_papr(args) -> int:
    waveforms = args.waveform or ["ofdm", "sc-ofdm-1d"]
    thresholds = np.arange(0.0, 13.0 + 1e-9, 0.1)
    curves = {}
    for wf in waveforms:
        if wf == "nofs":
            raise ParameterError("PAPR path covers the receiver-bearing kinds only")
        config = _measurement_config(args, wf, pilot_free=True)
        frames = _measurement_frames(config, args.seed, args.frames)
        curves[wf] = bench.papr_ccdf(frames, thresholds)

    out = Path(args.out)
    _write_table(
        out,
        ["threshold_db"] + list(curves),
        [[float(t) for t in thresholds]] + [[float(p) for p in c.exceed_prob] for c in curves.values()],
    )
    wrote = [str(out)]
    if not args.no_plot:
        from . import plotting

        figure = out.with_suffix(".png")
        plotting.render_ccdf(curves, figure)
        wrote.append(str(figure))
    for wf, curve in curves.items():
        print(f"{wf}: CCDF 1e-2 at {bench.ccdf_threshold(curve, 1e-2):.2f} dB")
    print("wrote " + ", ".join(wrote))
    return 0


def _cmd_psd(args) -> int:
    waveforms = args.waveform or ["sc-ofdm-1d", "sc-nofs-1d"]
    estimates = {}
    for wf in waveforms:
        config = _measurement_config(args, wf, pilot_free=False)
        frames = _measurement_frames(config, args.seed, args.frames)
        samples = np.concatenate([fr.samples for fr in frames])
        segment = args.segment or config.n
        estimates[wf] = bench.psd_welch(samples, segment, args.overlap)

    out = Path(args.out)
    first = next(iter(estimates.values()))
    _write_table(
        out,
        ["freq"] + list(estimates),
        [[float(f) for f in first.freq_bins]]
        + [[float(p) for p in est.power_db] for est in estimates.values()],
    )
    wrote = [str(out)]
    if not args.no_plot:
        from . import plotting

        figure = out.with_suffix(".png")
        plotting.render_psd(estimates, figure)
        wrote.append(str(figure))
    for wf, est in estimates.items():
        print(f"{wf}: -20 dB width {bench.occupied_bandwidth(est):.4f} cycles/sample")
    print("wrote " + ", ".join(wrote))
    return 0


def _parse_dims(text: str) -> dict:
    dims = {}
    for part in text.split(","):
        key, sep, value = part.partition("=")
        if not sep:
            raise ParameterError(f"dims must look like n=1024,m=600,q=492,k=140; got {part!r}")
        dims[key.strip()] = int(value)
    missing = {"n", "m", "q", "k"} - set(dims)
    if missing:
        raise ParameterError(f"dims missing {sorted(missing)}")
    return dims


def _cmd_complexity(args) -> int:
    if args.dims:
        dims = _parse_dims(args.dims)
    else:
        cfg = bench.get_preset(args.preset).config
        dims = {"n": cfg.n, "m": cfg.m, "q": cfg.q, "k": cfg.k}
    rows = []
    for kind in _BENCH_KINDS:
        config = WaveformConfig(kind=kind, cp=0, mod_order=4, pilot_block=0, **dims)
        cost = frame_cost(config)
        rows.append((kind, cost.real_mults, cost.real_adds))

    width = max(len(r[0]) for r in rows)
    print(f"{'waveform':<{width}}  {'real_mults':>14}  {'real_adds':>14}")
    for kind, mults, adds in rows:
        print(f"{kind:<{width}}  {mults:>14,}  {adds:>14,}")

    wrote = []
    if args.out:
        out = Path(args.out)
        _write_table(
            out,
            ["waveform", "real_mults", "real_adds"],
            [[r[0] for r in rows], [r[1] for r in rows], [r[2] for r in rows]],
        )
        wrote.append(str(out))
        if not args.no_plot:
            from . import plotting

            figure = out.with_suffix(".png")
            plotting.render_complexity(rows, figure)
            wrote.append(str(figure))
    if wrote:
        print("wrote " + ", ".join(wrote))
    return 0


def _cmd_design(args) -> int:
    pair = build_nofst(args.m, args.q)
    if args.refine_steps > 0:
        bits = RandomStream(args.seed, 0).generator.integers(
            0, 2, 2 * args.m * args.train_cols
        )
        training = qam_map(bits, 4).symbols.reshape(args.m, args.train_cols, order="F")
        pair = refine_nofst(pair, training, steps=args.refine_steps, rate=args.rate)
    export_pair(pair, args.out)
    profile = interference_profile(pair)
    print(f"m = {pair.m}, q = {pair.q}, alpha = {pair.alpha:.6f}")
    print(f"max_offdiag = {profile.max_offdiag:.6e}")
    print(f"diag_rmse   = {profile.diag_rmse:.6e}")
    print(f"frobenius   = {profile.frobenius:.6e}")
    print(f"wrote {args.out}")
    return 0


def _cmd_calc(args) -> int:
    if args.which == "doppler":
        if args.tc is None:
            raise ParameterError("calc doppler needs --tc")
        fm = coherence_to_doppler(parse_quantity(args.tc))
        print(f"{fm:g} Hz")
    elif args.which == "coherence":
        if args.fm is None:
            raise ParameterError("calc coherence needs --fm")
        tc = doppler_to_coherence(parse_quantity(args.fm))
        print(f"{tc:g} s")
    else:  # velocity
        if args.fm is None or args.f_rf is None:
            raise ParameterError("calc velocity needs --fm and --f-rf")
        v = doppler_to_velocity(parse_quantity(args.fm), parse_quantity(args.f_rf), args.c)
        print(f"{v:.2f} m/s ({v * 3.6:.2f} km/h)")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="wavebench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    link = sub.add_parser("link", help="run a BER campaign")
    link.add_argument("--preset", default="fig4-awgn")
    link.add_argument("--config", help="scenario file (overrides --preset)")
    link.add_argument("--waveform", choices=_WAVEFORM_CHOICES)
    link.add_argument("--seed", type=int)
    link.add_argument("--snr", help="grid as start:stop:step or comma list")
    link.add_argument("--min-errors", type=int)
    link.add_argument("--max-bits", type=int)
    link.add_argument("--detector", choices=("linear-recon", "mmse", "iterative", "exhaustive-oracle"))
    link.add_argument("--iterations", type=int)
    link.add_argument("--equalizer", choices=("zf", "mmse"))
    link.add_argument("--pair", help="shaping pair file from design-nofst")
    link.add_argument("--out", default="link.csv")
    link.add_argument("--no-plot", action="store_true")
    link.set_defaults(func=_cmd_link)

    papr = sub.add_parser("papr", help="PAPR CCDF over seeded frames")
    papr.add_argument("--preset", default="fig4-awgn")
    papr.add_argument("--waveform", action="append", choices=_WAVEFORM_CHOICES)
    papr.add_argument("--seed", type=int, default=0)
    papr.add_argument("--frames", type=int, default=72)
    papr.add_argument("--nofs-alpha", type=float, default=0.82)
    papr.add_argument("--out", default="papr.csv")
    papr.add_argument("--no-plot", action="store_true")
    papr.set_defaults(func=_cmd_papr)

    psd = sub.add_parser("psd", help="Welch PSD of seeded frames")
    psd.add_argument("--preset", default="fig4-awgn")
    psd.add_argument("--waveform", action="append", choices=_WAVEFORM_CHOICES)
    psd.add_argument("--seed", type=int, default=0)
    psd.add_argument("--frames", type=int, default=20)
    psd.add_argument("--segment", type=int)
    psd.add_argument("--overlap", type=float, default=0.5)
    psd.add_argument("--nofs-alpha", type=float, default=0.82)
    psd.add_argument("--out", default="psd.csv")
    psd.add_argument("--no-plot", action="store_true")
    psd.set_defaults(func=_cmd_psd)

    comp = sub.add_parser("complexity", help="per-frame operation counts")
    comp.add_argument("--preset", default="fig5-fading")
    comp.add_argument("--dims", help="override as n=1024,m=600,q=492,k=140")
    comp.add_argument("--out")
    comp.add_argument("--no-plot", action="store_true")
    comp.set_defaults(func=_cmd_complexity)

    design = sub.add_parser("design-nofst", help="build/refine/export a shaping pair")
    design.add_argument("--m", type=int, required=True)
    design.add_argument("--q", type=int, required=True)
    design.add_argument("--refine-steps", type=int, default=0)
    design.add_argument("--train-cols", type=int, default=512)
    design.add_argument("--rate", type=float, default=0.05)
    design.add_argument("--seed", type=int, default=0)
    design.add_argument("--out", default="pair.txt")
    design.set_defaults(func=_cmd_design)

    calc = sub.add_parser("calc", help="mobility arithmetic")
    calc.add_argument("which", choices=("doppler", "velocity", "coherence"))
    calc.add_argument("--tc", help="coherence time, e.g. 0.5ms")
    calc.add_argument("--fm", help="Doppler frequency, e.g. 846Hz")
    calc.add_argument("--f-rf", help="carrier frequency, e.g. 2.4GHz")
    calc.add_argument("--c", type=_parse_c, default=SPEED_OF_LIGHT,
                      help="'exact' (default) or a number like 3e8")
    calc.set_defaults(func=_cmd_calc)

    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


cli_main = main


if __name__ == "__main__":
    sys.exit(main())
