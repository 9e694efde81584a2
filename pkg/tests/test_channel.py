"""Fading emulation, noise injection, and mobility arithmetic."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

import wavebench as wb
from wavebench.airframe import build_grid, demap_frame, map_and_modulate, precode
from wavebench.channel import (
    SPEED_OF_LIGHT,
    ChannelRealization,
    MobilityFigures,
    apply_channel,
    awgn,
    coherence_to_doppler,
    doppler_to_coherence,
    doppler_to_velocity,
    mobility_figures,
    noise_variance,
    pdp_preset,
    realize_channel,
    validate_cp_covers,
    velocity_to_doppler,
)
from wavebench.errors import ConfigurationError, CoverageError, ParameterError

from .oracles import direct_convolution

REFERENCE_DELAYS = (0, 1, 4, 7)
REFERENCE_GAINS = (0.8765 + 0.0j, -0.2279 + 0.0j, 0.1315 + 0.0j, -0.4032j)


def two_tap_pdp():
    return wb.PdpSpec(taps=((0, 0.9), (3, 0.4j)))


class TestPdpSpec:
    def test_reference_preset_values(self):
        pdp = pdp_preset("paper-tdl4")
        assert tuple(pdp.delays) == REFERENCE_DELAYS
        assert_allclose(pdp.nominal_gains, np.array(REFERENCE_GAINS), atol=0)
        assert pdp.max_delay == 7

    def test_preset_name_is_normalized(self):
        assert pdp_preset("  Paper-TDL4 ").taps == pdp_preset("paper-tdl4").taps

    def test_unknown_preset_rejected(self):
        with pytest.raises(ParameterError):
            pdp_preset("indoor-a")

    def test_first_delay_must_be_zero(self):
        with pytest.raises(ParameterError):
            wb.PdpSpec(taps=((1, 1.0),))

    def test_delays_must_increase(self):
        with pytest.raises(ParameterError):
            wb.PdpSpec(taps=((0, 1.0), (3, 0.5), (3, 0.2)))

    def test_empty_profile_rejected(self):
        with pytest.raises(ParameterError):
            wb.PdpSpec(taps=())

    def test_zero_power_rejected(self):
        with pytest.raises(ParameterError):
            wb.PdpSpec(taps=((0, 0.0),))

    def test_filter_taps_layout(self):
        filt = two_tap_pdp().filter_taps()
        assert filt.shape == (4,)
        assert filt[0] == 0.9
        assert filt[3] == 0.4j
        assert filt[1] == filt[2] == 0.0

    def test_filter_taps_accepts_custom_gains(self):
        filt = two_tap_pdp().filter_taps(gains=[1.0, -2.0])
        assert filt[0] == 1.0 and filt[3] == -2.0

    def test_reference_power_sum(self):
        # 0.8765^2 + 0.2279^2 + 0.1315^2 + 0.4032^2, carried to full precision
        total = float(np.sum(np.abs(pdp_preset("paper-tdl4").nominal_gains) ** 2))
        assert total == pytest.approx(1.00005315, abs=1e-8)


class TestRealizeChannel:
    def test_first_block_nominal_pins_reference_gains(self):
        real = realize_channel(
            pdp_preset("paper-tdl4"), 3, 10, wb.RandomStream(0, 0),
            first_block_nominal=True,
        )
        assert_allclose(real.blocks[0], np.array(REFERENCE_GAINS), atol=0)
        assert not np.allclose(real.blocks[1], np.array(REFERENCE_GAINS))

    def test_per_tap_power_moment(self):
        pdp = pdp_preset("paper-tdl4")
        real = realize_channel(pdp, 100_000, 1, wb.RandomStream(3, 0))
        measured = np.mean(np.abs(real.blocks) ** 2, axis=0)
        assert_allclose(measured, np.abs(pdp.nominal_gains) ** 2, rtol=0.02)

    def test_degenerate_single_tap_is_unit_gaussian_draw(self):
        pdp = wb.PdpSpec(taps=((0, 1.0),))
        real = realize_channel(pdp, 1, 5, wb.RandomStream(9, 4))
        assert real.blocks.shape == (1, 1)
        expected = wb.draw_cgaussian(wb.RandomStream(9, 4), 1, 1.0)
        assert real.blocks[0, 0] == expected[0]

    def test_determinism(self):
        pdp = two_tap_pdp()
        a = realize_channel(pdp, 50, 8, wb.RandomStream(12, 1))
        b = realize_channel(pdp, 50, 8, wb.RandomStream(12, 1))
        assert np.array_equal(a.blocks, b.blocks)

    def test_blocks_are_uncorrelated(self):
        real = realize_channel(pdp_preset("paper-tdl4"), 100_000, 1, wb.RandomStream(3, 0))
        first = real.blocks[:-1, 0]
        second = real.blocks[1:, 0]
        corr = abs(np.mean(first * np.conj(second))) / np.mean(np.abs(first) ** 2)
        assert corr < 0.02

    def test_parameter_validation(self):
        pdp = two_tap_pdp()
        with pytest.raises(ParameterError):
            realize_channel(pdp, 0, 8, wb.RandomStream(0, 0))
        with pytest.raises(ParameterError):
            realize_channel(pdp, 1, 0, wb.RandomStream(0, 0))

    def test_realization_is_read_only(self):
        real = realize_channel(two_tap_pdp(), 2, 8, wb.RandomStream(1, 0))
        with pytest.raises(ValueError):
            real.blocks[0, 0] = 0.0


class TestApplyChannel:
    def test_identity_channel(self):
        pdp = wb.PdpSpec(taps=((0, 1.0),))
        real = ChannelRealization(
            blocks=np.ones((1, 1), dtype=np.complex128), block_len=64, pdp=pdp
        )
        rng = np.random.default_rng(2)
        x = rng.standard_normal(40) + 1j * rng.standard_normal(40)
        assert np.array_equal(apply_channel(x, real), x)

    def test_impulse_reveals_reference_taps(self):
        pdp = pdp_preset("paper-tdl4")
        real = realize_channel(pdp, 1, 32, wb.RandomStream(0, 0), first_block_nominal=True)
        x = np.zeros(32, dtype=np.complex128)
        x[0] = 1.0
        out = apply_channel(x, real)
        expected = np.zeros(32, dtype=np.complex128)
        expected[[0, 1, 4, 7]] = REFERENCE_GAINS
        assert_allclose(out, expected, atol=0)

    def test_matches_direct_convolution_oracle(self):
        pdp = two_tap_pdp()
        real = realize_channel(pdp, 1, 100, wb.RandomStream(6, 2))
        rng = np.random.default_rng(7)
        x = rng.standard_normal(100) + 1j * rng.standard_normal(100)
        out = apply_channel(x, real)
        reference = direct_convolution(x, pdp.filter_taps(real.blocks[0]))[:100]
        assert np.max(np.abs(out - reference)) < 1e-12

    def test_tails_cross_block_boundaries(self):
        # An echo launched near the end of block 0 must land inside block 1
        # even though block 1's own gains are zero: no isolation at the seam.
        pdp = wb.PdpSpec(taps=((0, 1.0), (4, 1.0)))
        blocks = np.array([[1.0, 1.0], [0.0, 0.0]], dtype=np.complex128)
        real = ChannelRealization(blocks=blocks, block_len=8, pdp=pdp)
        x = np.zeros(16, dtype=np.complex128)
        x[6] = 1.0
        out = apply_channel(x, real)
        assert out[6] == 1.0
        assert out[10] == 1.0
        assert np.sum(np.abs(out)) == 2.0

    def test_overflow_raises_coverage_error(self):
        real = realize_channel(two_tap_pdp(), 2, 8, wb.RandomStream(0, 0))
        with pytest.raises(CoverageError):
            apply_channel(np.zeros(17, dtype=np.complex128), real)

    def test_frame_signal_round_trip(self):
        config = wb.WaveformConfig(kind="ofdm", n=16, m=8, k=4, cp=8, pilot_block=0)
        bits = wb.RandomStream(1, 0).generator.integers(0, 2, size=config.payload_bits)
        frame = map_and_modulate(config, precode(config, build_grid(config, bits, None)))
        real = realize_channel(
            pdp_preset("paper-tdl4"), 1, config.frame_len, wb.RandomStream(2, 0)
        )
        faded = apply_channel(frame, real)
        assert isinstance(faded, wb.FrameSignal)
        assert faded.config is config
        assert faded.samples.size == frame.samples.size

    def test_output_energy_tracks_nominal_power(self):
        # Averaged over many independent blocks the channel neither amplifies
        # nor attenuates beyond the profile's total tap power.
        pdp = pdp_preset("paper-tdl4")
        real = realize_channel(pdp, 10_000, 32, wb.RandomStream(11, 1))
        x = wb.draw_cgaussian(wb.RandomStream(11, 0), 10_000 * 32, 1.0)
        y = apply_channel(x, real)
        ratio = np.sum(np.abs(y) ** 2) / np.sum(np.abs(x) ** 2)
        total_power = np.sum(np.abs(pdp.nominal_gains) ** 2)
        assert ratio == pytest.approx(total_power, rel=0.02)


class TestCpCoverage:
    def test_short_cp_rejected(self):
        config = wb.WaveformConfig(kind="ofdm", n=16, m=8, k=4, cp=4, pilot_block=0)
        with pytest.raises(ConfigurationError):
            validate_cp_covers(config, pdp_preset("paper-tdl4"))

    def test_exact_cp_accepted(self):
        config = wb.WaveformConfig(kind="ofdm", n=16, m=8, k=4, cp=7, pilot_block=0)
        validate_cp_covers(config, pdp_preset("paper-tdl4"))

    def test_per_block_one_tap_equivalence(self):
        # With the delay spread inside the CP, each symbol's demapped bins are
        # the clean bins scaled by its own block's filter response, even when
        # the gains change at block seams and tails spill across them.
        config = wb.WaveformConfig(kind="ofdm", n=16, m=8, k=6, cp=8, pilot_block=2)
        pdp = pdp_preset("paper-tdl4")
        bits = wb.RandomStream(4, 0).generator.integers(0, 2, size=config.payload_bits)
        frame = map_and_modulate(
            config, precode(config, build_grid(config, bits, wb.RandomStream(4, 1)))
        )
        block_len = config.pilot_block * config.symbol_len
        num_blocks = config.k * config.symbol_len // block_len
        real = realize_channel(pdp, num_blocks, block_len, wb.RandomStream(4, 2))
        received = demap_frame(config, apply_channel(frame, real))
        clean = demap_frame(config, frame)
        bins = wb.occupied_bins(config.n, config.m)
        for block in range(num_blocks):
            response = np.fft.fft(
                pdp.filter_taps(real.blocks[block]), config.n
            )[bins]
            for sym in range(block * config.pilot_block, (block + 1) * config.pilot_block):
                assert np.max(np.abs(received[:, sym] - response * clean[:, sym])) < 1e-8


class TestAwgn:
    def toy_config(self):
        return wb.WaveformConfig(kind="ofdm", n=16, m=8, k=4, cp=4, pilot_block=0)

    def test_infinite_ebn0_is_identity(self):
        config = self.toy_config()
        x = wb.draw_cgaussian(wb.RandomStream(0, 0), 256, 1.0)
        out = awgn(x, math.inf, config, wb.RandomStream(0, 1))
        assert np.array_equal(out, x)
        out[0] = 0.0
        assert x[0] != 0.0

    def test_noise_power_matches_configured_level(self):
        # Independent recomputation of the target: N0 = Es / (10^(EbN0/10) rho)
        # with rho = payload bits per transmitted sample.
        config = self.toy_config()
        rho = config.payload_bits / config.frame_len
        x = wb.draw_cgaussian(wb.RandomStream(5, 0), 1_000_000, 1.0)
        out = awgn(x, 6.0, config, wb.RandomStream(5, 1))
        noise = out - x
        n0 = np.mean(np.abs(x) ** 2) / (10.0 ** 0.6 * rho)
        measured_db = 10 * np.log10(np.mean(np.abs(noise) ** 2))
        assert measured_db == pytest.approx(10 * np.log10(n0), abs=0.05)

    def test_determinism(self):
        config = self.toy_config()
        x = wb.draw_cgaussian(wb.RandomStream(1, 0), 512, 1.0)
        a = awgn(x, 4.0, config, wb.RandomStream(8, 3))
        b = awgn(x, 4.0, config, wb.RandomStream(8, 3))
        assert np.array_equal(a, b)

    def test_explicit_es_overrides_measurement(self):
        # Doubling the declared per-sample energy doubles the injected noise
        # power instead of renormalizing against the signal itself.
        config = self.toy_config()
        x = wb.draw_cgaussian(wb.RandomStream(2, 0), 200_000, 1.0)
        lo = awgn(x, 6.0, config, wb.RandomStream(2, 1)) - x
        hi = awgn(x, 6.0, config, wb.RandomStream(2, 1), es_sample=2.0 * np.mean(np.abs(x) ** 2)) - x
        ratio = np.mean(np.abs(hi) ** 2) / np.mean(np.abs(lo) ** 2)
        assert ratio == pytest.approx(2.0, rel=0.02)

    def test_frame_signal_round_trip(self):
        config = self.toy_config()
        bits = wb.RandomStream(3, 0).generator.integers(0, 2, size=config.payload_bits)
        frame = map_and_modulate(config, precode(config, build_grid(config, bits, None)))
        noisy = awgn(frame, 10.0, config, wb.RandomStream(3, 1))
        assert isinstance(noisy, wb.FrameSignal)
        assert noisy.config is config

    def test_all_pilot_config_has_no_bit_density(self):
        config = wb.WaveformConfig(kind="ofdm", n=16, m=8, k=4, cp=4, pilot_block=1)
        x = np.ones(16, dtype=np.complex128)
        with pytest.raises(ParameterError):
            awgn(x, 6.0, config, wb.RandomStream(0, 0))

    def test_noise_variance_helper(self):
        config = self.toy_config()
        assert noise_variance(config, math.inf, 1.0) == 0.0
        rho = config.payload_bits / config.frame_len
        assert noise_variance(config, 3.0, 0.8) == pytest.approx(
            0.8 / (10.0 ** 0.3 * rho), rel=1e-12
        )


class TestMobility:
    def test_reference_coherence_gives_846_hz(self):
        assert coherence_to_doppler(0.5e-3) == pytest.approx(846.0, rel=1e-12)

    def test_unit_coherence(self):
        assert coherence_to_doppler(1.0) == 0.423

    def test_coherence_round_trip(self):
        tc = 0.37e-3
        assert doppler_to_coherence(coherence_to_doppler(tc)) == pytest.approx(tc, rel=1e-12)

    def test_velocity_with_rounded_light_speed(self):
        v = doppler_to_velocity(846.0, 2.4e9, c=3e8)
        assert v == pytest.approx(105.75, rel=1e-12)
        assert v * 3.6 == pytest.approx(380.7, rel=1e-12)

    def test_velocity_with_exact_light_speed(self):
        assert doppler_to_velocity(846.0, 2.4e9) == pytest.approx(105.68, abs=0.005)

    def test_stationary(self):
        assert doppler_to_velocity(0.0, 2.4e9) == 0.0

    def test_velocity_round_trip(self):
        v = 33.4
        fm = velocity_to_doppler(v, 5.9e9)
        assert doppler_to_velocity(fm, 5.9e9) == pytest.approx(v, rel=1e-12)

    def test_parameter_validation(self):
        with pytest.raises(ParameterError):
            coherence_to_doppler(0.0)
        with pytest.raises(ParameterError):
            doppler_to_coherence(-1.0)
        with pytest.raises(ParameterError):
            doppler_to_velocity(-1.0, 2.4e9)
        with pytest.raises(ParameterError):
            doppler_to_velocity(846.0, 0.0)
        with pytest.raises(ParameterError):
            velocity_to_doppler(-5.0, 2.4e9)

    def test_figures_bundle(self):
        figures = mobility_figures(0.5e-3, 2.4e9)
        assert figures.doppler == pytest.approx(846.0, rel=1e-12)
        assert figures.velocity == pytest.approx(105.68, abs=0.005)
        assert figures.velocity_kmh == pytest.approx(figures.velocity * 3.6, rel=1e-15)
        assert figures.carrier == 2.4e9

    def test_figures_reject_nonpositive(self):
        with pytest.raises(ParameterError):
            MobilityFigures(coherence_time=0.0, doppler=1.0, velocity=1.0, carrier=1.0)

    @given(st.floats(min_value=1e-6, max_value=10.0))
    def test_doppler_product_is_constant(self, tc):
        assert coherence_to_doppler(tc) * tc == pytest.approx(0.423, rel=1e-12)

    def test_speed_of_light_is_exact_si(self):
        assert SPEED_OF_LIGHT == 299_792_458.0
