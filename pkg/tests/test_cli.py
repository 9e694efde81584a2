"""Command-line surface: exit codes, printed figures, and emitted files."""

import subprocess
import sys

import numpy as np
import pytest

import wavebench as wb
from wavebench.cli import main, parse_quantity
from wavebench.errors import ParameterError
from wavebench.shaping import import_pair


TOY_SCENARIO = """\
# toy campaign for the test suite
kind = ofdm
n = 16
m = 8
k = 4
cp = 4
pilot_block = 0
channel = none
detector = none
equalizer = mmse
ebn0_grid = 4,8
min_errors = 5
max_bits = 2000
seed = 9
"""


def write_scenario(tmp_path, text=TOY_SCENARIO):
    path = tmp_path / "scenario.txt"
    path.write_text(text, encoding="ascii")
    return path


class TestParseQuantity:
    def test_time_units(self):
        assert parse_quantity("0.5ms") == 0.5e-3
        assert parse_quantity("2us") == 2e-6
        assert parse_quantity("1.5 s") == 1.5

    def test_frequency_units(self):
        assert parse_quantity("2.4GHz") == 2.4e9
        assert parse_quantity("846Hz") == 846.0
        assert parse_quantity("15kHz") == 15e3

    def test_bare_number_and_case(self):
        assert parse_quantity("846") == 846.0
        assert parse_quantity("0.5MS") == 0.5e-3

    def test_rejects_garbage(self):
        with pytest.raises(ParameterError):
            parse_quantity("fast")
        with pytest.raises(ParameterError):
            parse_quantity("5 parsec")


class TestExitCodes:
    def test_unknown_subcommand_is_usage_error(self, capsys):
        assert main(["simulate"]) == 1
        assert "error" in capsys.readouterr().err

    def test_unknown_flag_is_usage_error(self, capsys):
        assert main(["calc", "doppler", "--warp", "9"]) == 1

    def test_missing_value_is_runtime_error(self, capsys):
        assert main(["calc", "doppler"]) == 2
        assert "error" in capsys.readouterr().err

    def test_success_is_zero(self, capsys):
        assert main(["calc", "doppler", "--tc", "0.5ms"]) == 0


class TestCalc:
    def test_reference_doppler(self, capsys):
        assert main(["calc", "doppler", "--tc", "0.5ms"]) == 0
        assert "846 Hz" in capsys.readouterr().out

    def test_velocity_with_rounded_c(self, capsys):
        assert main(
            ["calc", "velocity", "--fm", "846", "--f-rf", "2.4GHz", "--c", "3e8"]
        ) == 0
        out = capsys.readouterr().out
        assert "105.75 m/s" in out
        assert "380.70 km/h" in out

    def test_velocity_with_exact_c(self, capsys):
        assert main(["calc", "velocity", "--fm", "846", "--f-rf", "2.4GHz"]) == 0
        assert "105.68 m/s" in capsys.readouterr().out

    def test_coherence_inverse(self, capsys):
        assert main(["calc", "coherence", "--fm", "846Hz"]) == 0
        assert "0.0005 s" in capsys.readouterr().out


class TestComplexity:
    def test_reference_table(self, capsys):
        assert main(["complexity"]) == 0
        out = capsys.readouterr().out
        assert "2,867,200" in out
        assert "204,467,200" in out
        assert "168,179,200" in out
        assert "251,507,200" in out
        assert "206,752,000" in out
        for kind in ("ofdm", "sc-ofdm-1d", "sc-nofs-1d", "sc-ofdm-2d", "sc-nofs-2d"):
            assert kind in out

    def test_dims_override_and_files(self, tmp_path, capsys):
        out = tmp_path / "complexity.csv"
        assert main(
            ["complexity", "--dims", "n=16,m=8,q=6,k=4", "--out", str(out), "--no-plot"]
        ) == 0
        lines = out.read_text(encoding="ascii").splitlines()
        assert lines[0] == "waveform,real_mults,real_adds"
        assert len(lines) == 6
        assert not out.with_suffix(".png").exists()

    def test_plot_written_next_to_csv(self, tmp_path):
        out = tmp_path / "complexity.csv"
        assert main(["complexity", "--dims", "n=16,m=8,q=6,k=4", "--out", str(out)]) == 0
        png = out.with_suffix(".png")
        assert png.exists() and png.stat().st_size > 0

    def test_malformed_dims(self, capsys):
        assert main(["complexity", "--dims", "n=16;m=8"]) == 2
        assert main(["complexity", "--dims", "n=16,m=8"]) == 2


class TestLink:
    def test_campaign_emits_csv_manifest_and_plot(self, tmp_path, capsys):
        scenario = write_scenario(tmp_path)
        out = tmp_path / "run.csv"
        assert main(["link", "--config", str(scenario), "--out", str(out)]) == 0
        assert out.exists()
        manifest = out.with_suffix(".manifest.txt")
        assert manifest.exists()
        png = out.with_suffix(".png")
        assert png.exists() and png.stat().st_size > 0
        stdout = capsys.readouterr().out
        assert "ebn0" in stdout and "wrote" in stdout
        header = out.read_text(encoding="ascii").splitlines()[0]
        assert header == "ebn0_db,bits,errors,ber,ci_low,ci_high,real_mults,real_adds"

    def test_rerun_is_byte_identical(self, tmp_path):
        scenario = write_scenario(tmp_path)
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        assert main(["link", "--config", str(scenario), "--out", str(first), "--no-plot"]) == 0
        assert main(["link", "--config", str(scenario), "--out", str(second), "--no-plot"]) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_manifest_reruns_campaign(self, tmp_path):
        scenario = write_scenario(tmp_path)
        out = tmp_path / "run.csv"
        assert main(["link", "--config", str(scenario), "--out", str(out), "--no-plot"]) == 0
        manifest = out.with_suffix(".manifest.txt")
        replay = tmp_path / "replay.csv"
        assert main(["link", "--config", str(manifest), "--out", str(replay), "--no-plot"]) == 0
        assert replay.read_bytes() == out.read_bytes()

    def test_seed_override_lands_in_manifest(self, tmp_path):
        scenario = write_scenario(tmp_path)
        out = tmp_path / "run.csv"
        assert main(
            ["link", "--config", str(scenario), "--seed", "77", "--out", str(out), "--no-plot"]
        ) == 0
        manifest = out.with_suffix(".manifest.txt").read_text(encoding="ascii")
        assert "seed = 77" in manifest

    def test_different_seeds_differ(self, tmp_path):
        scenario = write_scenario(tmp_path)
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        main(["link", "--config", str(scenario), "--out", str(first), "--no-plot"])
        main(
            ["link", "--config", str(scenario), "--seed", "10", "--out", str(second), "--no-plot"]
        )
        assert first.read_bytes() != second.read_bytes()

    def test_bad_scenario_key_is_runtime_error(self, tmp_path, capsys):
        scenario = write_scenario(tmp_path, "kind = ofdm\nturbo = yes\n")
        assert main(["link", "--config", str(scenario), "--no-plot"]) == 2
        assert "turbo" in capsys.readouterr().err


class TestMeasurementCommands:
    def test_papr_outputs(self, tmp_path, capsys):
        out = tmp_path / "papr.csv"
        assert main(
            [
                "papr", "--frames", "4", "--seed", "1",
                "--waveform", "ofdm", "--waveform", "sc-ofdm-1d",
                "--out", str(out),
            ]
        ) == 0
        lines = out.read_text(encoding="ascii").splitlines()
        assert lines[0] == "threshold_db,ofdm,sc-ofdm-1d"
        assert out.with_suffix(".png").exists()
        assert "CCDF 1e-2" in capsys.readouterr().out

    def test_papr_rejects_the_demo_kind(self, capsys):
        assert main(["papr", "--waveform", "nofs", "--no-plot"]) == 2

    def test_psd_outputs(self, tmp_path, capsys):
        out = tmp_path / "psd.csv"
        assert main(
            ["psd", "--frames", "2", "--waveform", "ofdm", "--out", str(out), "--no-plot"]
        ) == 0
        lines = out.read_text(encoding="ascii").splitlines()
        assert lines[0] == "freq,ofdm"
        assert len(lines) == 1 + 1024
        assert "-20 dB width" in capsys.readouterr().out

    def test_design_exports_importable_pair(self, tmp_path, capsys):
        out = tmp_path / "pair.txt"
        assert main(["design-nofst", "--m", "8", "--q", "6", "--out", str(out)]) == 0
        stdout = capsys.readouterr().out
        assert "alpha = 0.750000" in stdout
        pair = import_pair(out)
        reference = wb.build_nofst(8, 6)
        assert np.allclose(pair.forward, reference.forward, atol=1e-15)

    def test_design_with_refinement_changes_the_pair(self, tmp_path):
        plain = tmp_path / "plain.txt"
        tuned = tmp_path / "tuned.txt"
        main(["design-nofst", "--m", "8", "--q", "6", "--out", str(plain)])
        main(
            [
                "design-nofst", "--m", "8", "--q", "6", "--refine-steps", "25",
                "--train-cols", "64", "--seed", "3", "--out", str(tuned),
            ]
        )
        assert not np.allclose(
            import_pair(plain).reconstruction, import_pair(tuned).reconstruction
        )


class TestInstalledEntryPoint:
    def test_console_script_runs(self):
        proc = subprocess.run(
            [sys.executable, "-m", "wavebench.cli", "calc", "doppler", "--tc", "0.5ms"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "846 Hz" in proc.stdout
