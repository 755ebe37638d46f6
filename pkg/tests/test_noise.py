import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinspec import noise
from spinspec.noise import (
    UNIT_A2_PER_HZ,
    UNIT_RAD2_PER_HZ,
    UNIT_RADS2_PER_HZ,
    UNIT_V2_PER_HZ,
    PowerSpectrum,
    SpectrumDivergenceError,
    dbc_to_linear,
    dbchz_to_phase_psd,
    filtered_infidelity,
    frequency_noise_spectrum,
    jitter_sigma,
    linear_to_dbc,
    phase_to_frequency_noise,
    read_psd_csv,
    rms_in_enbw,
)
from spinspec.onequbit import filter_response

W_R = 2.0 * math.pi * 1e6
TWO_PI = 2.0 * math.pi


class TestUnitHelpers:
    def test_dbc_examples(self):
        assert dbc_to_linear(-41.0) == pytest.approx(8.91e-3, rel=1e-3)
        assert dbc_to_linear(0.0) == 1.0

    def test_rms_in_enbw_example(self):
        # 7.1 nV/rtHz in 2.9 MHz -> about 12.1 uV rms
        assert rms_in_enbw((7.1e-9) ** 2, 2.9e6) == pytest.approx(12.1e-6, rel=5e-3)

    def test_phase_to_frequency_scalar(self):
        s_w = phase_to_frequency_noise(1e-10, TWO_PI * 1e6)
        assert s_w == pytest.approx((TWO_PI * 1e6) ** 2 * 1e-10)
        with pytest.raises(ValueError):
            phase_to_frequency_noise(1e-10, 0.0)

    def test_white_frequency_noise_is_minus20dbdec_phase_noise(self):
        # a -20 dB/dec phase-noise line maps to white frequency noise
        s_phi = PowerSpectrum.power_law(1e-10, 1e6, -2.0, UNIT_RAD2_PER_HZ)
        s_w = frequency_noise_spectrum(s_phi)
        f = np.array([1e5, 1e6, 1e7])
        assert np.allclose(s_w.psd(f), s_w.psd(f)[0])

    def test_table1_oscillator_roundtrip(self):
        # L(1 MHz) = -106 dBc/Hz with -20 dB/dec, integrated over 2.5 MHz,
        # comes back as about 11 kHz rms frequency noise
        s_phi1 = dbchz_to_phase_psd(-106.0)
        s_phi = PowerSpectrum.power_law(s_phi1, 1e6, -2.0, UNIT_RAD2_PER_HZ)
        s_w = frequency_noise_spectrum(s_phi)
        sigma_w = s_w.rms(0.0, 2.467e6)
        assert sigma_w / TWO_PI == pytest.approx(11e3, rel=0.05)


class TestPowerSpectrum:
    def test_band_power_white(self):
        s = PowerSpectrum.white(2.0)
        assert s.band_power(1.0, 3.0) == pytest.approx(4.0)

    def test_band_power_flicker_log(self):
        s = PowerSpectrum.flicker(1.0, 1.0)
        assert s.band_power(1.0, math.e) == pytest.approx(1.0)
        with pytest.raises(SpectrumDivergenceError):
            s.band_power(0.0, 1.0)

    def test_tabulated_interpolation_and_integral(self):
        s = PowerSpectrum.tabulated([1e3, 1e6], [1e-6, 1e-12])
        # exact power law f^-2 between the points
        assert float(s.psd(1e4)) == pytest.approx(1e-8, rel=1e-9)
        exact = 1.0 * (1.0 / 1e3 - 1.0 / 1e6)
        assert s.band_power(1e3, 1e6) == pytest.approx(exact, rel=1e-9)

    def test_tabulated_rejects_nonincreasing(self):
        with pytest.raises(ValueError):
            PowerSpectrum.tabulated([1.0, 1.0], [1e-3, 1e-3])

    def test_addition_requires_same_unit(self):
        a = PowerSpectrum.white(1.0, UNIT_A2_PER_HZ)
        b = PowerSpectrum.white(1.0, UNIT_V2_PER_HZ)
        with pytest.raises(ValueError):
            a + b
        c = a + PowerSpectrum.white(2.0, UNIT_A2_PER_HZ)
        assert float(c.psd(10.0)) == pytest.approx(3.0)

    def test_scaled(self):
        s = PowerSpectrum.white(4.0, UNIT_V2_PER_HZ).scaled(0.25, UNIT_RADS2_PER_HZ)
        assert float(s.psd(1.0)) == 1.0
        assert s.unit == UNIT_RADS2_PER_HZ


class TestFilteredInfidelity:
    def test_zero_spectrum(self):
        filt = filter_response("frequency", math.pi, W_R)
        assert filtered_infidelity(PowerSpectrum.zero(), filt, W_R) == 0.0

    def test_table1_oscillator_row(self):
        # white frequency noise, 11 kHz rms in the carrier-filter ENBW,
        # pi rotation at 1 MHz Rabi -> about 1.2e-4 infidelity
        filt = filter_response("frequency", math.pi, W_R)
        enbw_hz = filt.enbw / TWO_PI
        level = (TWO_PI * 11e3) ** 2 / enbw_hz
        s = PowerSpectrum.white(level, UNIT_RADS2_PER_HZ)
        for method in ("brickwall", "quadrature"):
            infid = filtered_infidelity(s, filt, W_R, method=method)
            assert infid == pytest.approx(1.21e-4, rel=0.10)

    @pytest.mark.parametrize("kind", ["amplitude", "frequency", "additive"])
    @pytest.mark.parametrize("theta", [math.pi / 2, math.pi])
    def test_brickwall_matches_quadrature_for_white(self, kind, theta):
        center = 50.0 * W_R if kind == "additive" else 0.0
        filt = filter_response(kind, theta, W_R, center=center)
        s = PowerSpectrum.white(1e-3, UNIT_RADS2_PER_HZ)
        quad = filtered_infidelity(s, filt, W_R, method="quadrature")
        brick = filtered_infidelity(s, filt, W_R, method="brickwall")
        assert quad == pytest.approx(brick, rel=0.02)

    def test_white_equals_dc_times_admitted_power(self):
        theta = math.pi
        filt = filter_response("additive", theta, W_R, center=50.0 * W_R)
        s = PowerSpectrum.white(1e-3, UNIT_RADS2_PER_HZ)
        # both sidebands of the band-pass count
        power = s.band_power(0.0, 2.0 * filt.enbw / TWO_PI)
        expected = filt.dc_gain * power / W_R**2
        got = filtered_infidelity(s, filt, W_R, method="quadrature")
        assert got == pytest.approx(expected, rel=0.02)

    def test_flicker_requires_omega_min(self):
        filt = filter_response("frequency", math.pi, W_R)
        s = PowerSpectrum.flicker(1.0, 1.0, UNIT_RADS2_PER_HZ)
        with pytest.raises(SpectrumDivergenceError):
            filtered_infidelity(s, filt, W_R, omega_min=0.0)
        assert filtered_infidelity(s, filt, W_R, omega_min=1e-2 * W_R) > 0

    def test_unit_mismatch_rejected(self):
        filt = filter_response("frequency", math.pi, W_R)
        s = PowerSpectrum.white(1e-3, UNIT_V2_PER_HZ)
        with pytest.raises(ValueError, match="unit"):
            filtered_infidelity(s, filt, W_R)


class TestJitter:
    def test_zero_spectrum(self):
        s = PowerSpectrum.zero(UNIT_RAD2_PER_HZ)
        assert jitter_sigma(s, 500e-9) == 0.0

    def test_white_bandlimited_limit(self):
        # 2 pi T f_max >> 1: sin^2 averages to one half
        a, f_max, t = 1e-12, 1e9, 500e-9
        s = PowerSpectrum.white(a, UNIT_RAD2_PER_HZ, f_hi=f_max)
        expected = t / math.pi * math.sqrt(a * f_max / 2.0)
        assert jitter_sigma(s, t) == pytest.approx(expected, rel=1e-3)

    def test_white_unbounded_diverges(self):
        s = PowerSpectrum.white(1e-12, UNIT_RAD2_PER_HZ)
        with pytest.raises(SpectrumDivergenceError):
            jitter_sigma(s, 500e-9)

    def test_f2_profile_against_monte_carlo(self):
        # -20 dB/dec phase noise, Monte-Carlo quadrature oracle
        t = 500e-9
        f_lo, f_hi = 1e3, 1e9
        s = PowerSpectrum.power_law(1e-10, 1e6, -2.0, UNIT_RAD2_PER_HZ,
                                    f_lo=f_lo, f_hi=f_hi)
        rng = np.random.default_rng(7)
        logf = rng.uniform(math.log(f_lo), math.log(f_hi), 400_000)
        f = np.exp(logf)
        vals = s.psd(f) * np.sin(2 * math.pi * f * t) ** 2 * f
        integral_mc = vals.mean() * math.log(f_hi / f_lo)
        sigma_mc = t / math.pi * math.sqrt(integral_mc)
        assert jitter_sigma(s, t, f_min=f_lo) == pytest.approx(sigma_mc, rel=0.03)


class TestCsvIngestion:
    def test_roundtrip(self, tmp_path):
        path = tmp_path / "psd.csv"
        path.write_text("f_hz,psd_a2_per_hz\n1e3,1e-28\n1e6,1e-30\n")
        s = read_psd_csv(path)
        assert s.unit == UNIT_A2_PER_HZ
        assert float(s.psd(1e3)) == pytest.approx(1e-28)

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "psd.csv"
        path.write_text("freq,psd_v2_per_hz\n1,2\n")
        with pytest.raises(ValueError, match="header"):
            read_psd_csv(path)

    def test_unknown_unit_rejected(self, tmp_path):
        path = tmp_path / "psd.csv"
        path.write_text("f_hz,psd_furlongs\n1,2\n")
        with pytest.raises(ValueError, match="unit"):
            read_psd_csv(path)


class TestFilterFields:
    @pytest.mark.parametrize("theta", [math.pi / 4, math.pi / 2, math.pi])
    def test_fields_match_analytic(self, theta):
        amp = filter_response("amplitude", theta, W_R)
        assert amp.dc_gain == pytest.approx(theta**2 / 4.0, rel=1e-9)
        assert amp.enbw == pytest.approx(W_R * math.pi / theta, rel=1e-9)
        frq = filter_response("frequency", theta, W_R)
        assert frq.dc_gain == pytest.approx((1 - math.cos(theta)) / 2, rel=1e-9)
        assert frq.enbw == pytest.approx(
            W_R * math.pi * theta / (2 * (1 - math.cos(theta))), rel=1e-9)
        add = filter_response("additive", theta, W_R)
        assert add.dc_gain == pytest.approx(amp.dc_gain + frq.dc_gain, rel=1e-9)
        assert add.enbw == pytest.approx(
            W_R * 2 * math.pi * theta / (theta**2 + 2 * (1 - math.cos(theta))),
            rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=-160.0, max_value=-40.0))
def test_phase_psd_roundtrip(l_dbchz):
    assert noise.phase_psd_to_dbchz(dbchz_to_phase_psd(l_dbchz)) == pytest.approx(
        l_dbchz, abs=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=1e-6, max_value=1e3),
       st.floats(min_value=1.0, max_value=1e6))
def test_white_band_power_linear(level, f2):
    s = PowerSpectrum.white(level)
    assert s.band_power(0.0, f2) == pytest.approx(level * f2, rel=1e-12)
