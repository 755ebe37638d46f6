import math

import numpy as np
import pytest

from spinspec.noise import UNIT_A2_PER_HZ, PowerSpectrum
from spinspec.readout import (
    ChargeTransferResult,
    DetectorChain,
    ReadoutBudget,
    ReadoutDotParams,
    adiabatic_charge_transfer,
    charge_error_vs_splitting,
    charge_transfer_scan,
    hamiltonian8,
    optimal_read_detuning,
    p_detect,
    readout_fidelity,
    snr,
)
from spinspec.twoqubit import DoubleDotParams

TWO_PI = 2.0 * math.pi


def read_params(u_hz=1e12, e_st_hz=12e9, t0_hz=39e6, w0_hz=None, dw0_hz=None):
    w0 = e_st_hz / 100.0 if w0_hz is None else w0_hz
    dw0 = e_st_hz / 1000.0 if dw0_hz is None else dw0_hz
    base = DoubleDotParams(TWO_PI * w0, TWO_PI * dw0, TWO_PI * t0_hz,
                           TWO_PI * u_hz, 0.0)
    return ReadoutDotParams(base, TWO_PI * e_st_hz)


def white_chain(i_s=400e-12, s_psd=57e-15, c_psd=28e-15, t_read=0.6e-6):
    return DetectorChain(
        i_s,
        PowerSpectrum.white(s_psd**2, UNIT_A2_PER_HZ),
        PowerSpectrum.white(c_psd**2, UNIT_A2_PER_HZ),
        t_read,
    )


class TestHamiltonian8:
    def test_hermitian(self):
        h = hamiltonian8(read_params(), epsilon=0.5 * TWO_PI * 1e12)
        assert np.abs(h - h.conj().T).max() == 0.0

    def test_t0_zero_charge_sectors_decouple(self):
        p = read_params(t0_hz=0.0)
        h = hamiltonian8(p, epsilon=0.3 * p.base.u)
        assert np.abs(h[:4, 4:]).max() == 0.0
        # diagonal entries of the decoupled sectors
        b = p.base
        e = 0.3 * b.u
        expected = [-b.omega_0, b.delta_omega_0 / 2, -b.delta_omega_0 / 2,
                    b.omega_0, b.u - e + p.e_st - b.omega_0,
                    b.u - e + p.e_st / 2, b.u - e + p.e_st / 2,
                    b.u - e + p.e_st + b.omega_0]
        assert np.allclose(np.diag(h).real, expected)
        # the (0,*) middle block splits into singlet/triplet at U-e, U-e+E_ST
        w = np.linalg.eigvalsh(h[5:7, 5:7])
        assert np.allclose(w, [b.u - e, b.u - e + p.e_st])

    def test_avoided_crossing_locations(self):
        # minimum gap of the measured branch near eps = U (singlet) and the
        # blocked branch near eps = U + E_ST (triplet)
        p = read_params()
        b = p.base
        eps_grid = np.linspace(b.u - 2 * p.e_st, b.u + 2 * p.e_st, 3001)

        def min_gap_location(window_lo, window_hi):
            best_eps, best_gap = None, math.inf
            for e in eps_grid:
                if not window_lo <= e <= window_hi:
                    continue
                w = np.linalg.eigvalsh(hamiltonian8(p, e))
                gap = np.diff(np.sort(w)).min()
                if gap < best_gap:
                    best_gap, best_eps = gap, e
            return best_eps

        singlet = min_gap_location(b.u - 1.5 * p.e_st, b.u + 0.5 * p.e_st)
        triplet = min_gap_location(b.u + 0.5 * p.e_st, b.u + 1.8 * p.e_st)
        assert abs(singlet - b.u) < 0.05 * p.e_st
        assert abs(triplet - (b.u + p.e_st)) < 0.05 * p.e_st


class TestChargeTransfer:
    def test_probabilities_consistent(self):
        p = read_params()
        res = adiabatic_charge_transfer(p, p.base.u + p.e_st / 2.0, 1500)
        assert isinstance(res, ChargeTransferResult)
        assert 0.0 <= res.p_transfer_given_down_down <= 1.0
        assert 0.0 <= res.p_no_transfer_given_down_up <= 1.0
        assert res.p_charge == pytest.approx(
            1.0 - res.p_transfer_given_down_down - res.p_no_transfer_given_down_up)
        assert 1.0 - res.p_charge == pytest.approx(16.0 * (39e6 / 12e9) ** 2,
                                                   rel=0.15)

    def test_step_halving_converged(self):
        p = read_params()
        eps = p.base.u + p.e_st / 2.0
        a = adiabatic_charge_transfer(p, eps, 1200)
        b = adiabatic_charge_transfer(p, eps, 2400)
        assert (1 - a.p_charge) == pytest.approx(1 - b.p_charge, rel=0.005)

    def test_optimum_at_midpoint(self):
        p = read_params()
        eps_opt, err_min, _ = optimal_read_detuning(p, n_steps=2500)
        x_opt = (eps_opt - p.base.u) / p.e_st
        assert x_opt == pytest.approx(0.5, abs=0.02)
        assert err_min > 0

    def test_beyond_triplet_crossing_rejected(self):
        p = read_params()
        with pytest.raises(ValueError, match="triplet"):
            adiabatic_charge_transfer(p, p.base.u + 1.5 * p.e_st)

    def test_master_curve_monotone(self):
        p = read_params()
        rows = charge_error_vs_splitting(p, [30.0, 100.0, 300.0, 1000.0], 1200)
        errs = [e for _, e in rows]
        assert all(b < a for a, b in zip(errs, errs[1:]))

    def test_large_ratio_limit_vanishes(self):
        p = read_params()
        (_, err), = charge_error_vs_splitting(p, [3000.0], 1200)
        assert err < 5e-6

    def test_reference_operating_point_combined_error(self):
        # splitting/tunnel ratio ~310 at the optimal detuning: conversion
        # plus worst-case in-window detuning stays within a factor two of
        # the 3.3e-4 reference combination
        p = read_params(e_st_hz=12.09e9, t0_hz=39e6)
        res = adiabatic_charge_transfer(p, p.base.u + p.e_st / 2.0, 2000)
        combined = 2.0 * (1.0 - res.p_charge)
        assert 3.3e-4 / 2.0 < combined < 3.3e-4 * 2.0

    def test_warns_when_larmor_comparable_to_splitting(self):
        with pytest.warns(UserWarning, match="E_ST"):
            read_params(w0_hz=10e9)


class TestSnrDetect:
    def test_table5_snr(self):
        assert snr(white_chain()) == pytest.approx(46.0, rel=0.05)

    def test_zero_noise_is_infinite(self):
        chain = DetectorChain(
            400e-12,
            PowerSpectrum.zero(UNIT_A2_PER_HZ),
            PowerSpectrum.zero(UNIT_A2_PER_HZ),
            0.6e-6)
        assert math.isinf(snr(chain))
        assert p_detect(snr(chain)) == 1.0

    def test_doubling_read_time_doubles_snr(self):
        s1 = snr(white_chain(t_read=0.6e-6))
        s2 = snr(white_chain(t_read=1.2e-6))
        assert s2 == pytest.approx(2.0 * s1, rel=1e-9)

    def test_full_integral_matches_white(self):
        chain = white_chain()
        assert snr(chain, "full") == pytest.approx(snr(chain, "white"), rel=0.005)

    def test_p_detect_values(self):
        assert p_detect(0.0) == 0.5
        assert p_detect(46.0) == pytest.approx(0.99966, abs=1e-4)
        assert p_detect(36.0) == pytest.approx(0.99865, abs=2e-5)
        grid = [p_detect(s) for s in (1.0, 4.0, 16.0, 46.0, 100.0)]
        assert all(b > a for a, b in zip(grid, grid[1:]))

    @pytest.mark.parametrize("snr_value", [4.0, 16.0, 46.0])
    def test_p_detect_matches_threshold_monte_carlo(self, snr_value, rng):
        # integrate white-noise current over T, threshold at half the step
        n = 1_000_000
        # noise chosen so I_s^2 / (S * 1/(2T)) = snr_value with I_s = T = 1
        sigma = math.sqrt(1.0 / snr_value)   # std of the integrated noise
        draws = rng.normal(0.0, sigma, n)
        correct = np.mean(draws < 0.5)       # state absent, threshold I_s/2
        se = math.sqrt(correct * (1 - correct) / n)
        assert abs(p_detect(snr_value) - correct) < 3 * max(se, 1e-7)


class TestComposition:
    def test_all_ones(self):
        assert readout_fidelity(ReadoutBudget(1.0, 1.0, 1.0)) == 1.0

    def test_table5_composition(self):
        p = 0.99967
        b = ReadoutBudget(p, p, p)
        assert readout_fidelity(b, "approx") == pytest.approx(0.999, abs=2e-5)
        assert abs(readout_fidelity(b, "full")
                   - readout_fidelity(b, "approx")) < 1e-6

    def test_full_credits_double_errors(self):
        b = ReadoutBudget(1.0, 0.9, 0.9)
        assert readout_fidelity(b, "full") == pytest.approx(0.9 * 0.9 + 0.1 * 0.1)

    def test_probability_validation(self):
        with pytest.raises(ValueError):
            ReadoutBudget(1.2, 0.5, 0.5)
