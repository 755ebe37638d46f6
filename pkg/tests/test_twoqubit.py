import math

import numpy as np
import pytest

from spinspec import twoqubit
from spinspec.qcore import process_fidelity, unitarity_defect
from spinspec.twoqubit import (
    ERROR_DETUNING,
    ERROR_DURATION,
    ERROR_TUNNEL,
    GATE_CPHASE,
    GATE_EXCHANGE,
    REGIME_DW0_EQ_SQRT2_T0,
    REGIME_DW0_EQ_WOP,
    REGIME_DW0_ZERO,
    REGIMES,
    DoubleDotParams,
    char_poly_residual,
    cphase_unitary,
    eigenenergies,
    exchange_unitary,
    fid_gate_inaccuracy,
    fid_gate_noise,
    fid_idle,
    hamiltonian6,
    omega_op,
    pulse_theta,
    ramped_pulse,
    simulate_gate,
    taylor_coefficient,
)

TWO_PI = 2.0 * math.pi
U_HZ = 1.0035e12          # charging energy of the reference operating point
T0_HZ = 0.71e9


def params(dw0_mode="zero", t0_hz=T0_HZ, eps_over_u=0.0, u_hz=U_HZ,
           omega_0_hz=1e10):
    t0 = TWO_PI * t0_hz
    u = TWO_PI * u_hz
    if dw0_mode == "zero":
        dw0 = 0.0
    elif dw0_mode == "sqrt2":
        dw0 = math.sqrt(2.0) * t0
    elif dw0_mode == "wop":
        dw0 = 4.0 * t0**2 * u / (u**2 - (eps_over_u * u) ** 2)
    else:
        raise ValueError(dw0_mode)
    return DoubleDotParams(TWO_PI * omega_0_hz, dw0, t0, u, eps_over_u * u)


class TestHamiltonian:
    def test_hermitian(self):
        h = hamiltonian6(params("sqrt2", eps_over_u=0.5))
        assert np.abs(h - h.conj().T).max() == 0.0

    def test_t0_zero_block_diagonal_and_eigenvalues(self):
        p = params("zero", t0_hz=0.0, eps_over_u=0.3)
        p = DoubleDotParams(p.omega_0, TWO_PI * 1e9, 0.0, p.u, p.epsilon)
        h = hamiltonian6(p)
        assert np.abs(h[:4, 4:]).max() == 0.0
        w = np.sort(np.linalg.eigvalsh(h))
        expected = np.sort([-p.omega_0, p.delta_omega_0 / 2,
                            -p.delta_omega_0 / 2, p.omega_0,
                            p.u - p.epsilon, p.u + p.epsilon])
        assert np.allclose(w, expected, rtol=1e-12)

    def test_gate_point_validation(self):
        with pytest.raises(ValueError, match="epsilon"):
            params("zero", eps_over_u=1.1)


class TestOmegaOp:
    def test_table3_value(self):
        assert omega_op(params("zero")) / TWO_PI == pytest.approx(2e6, rel=0.02)

    def test_finite_detuning_value(self):
        # at the operating point with the exchange rate pushed to 20 MHz
        x = math.sqrt(1.0 - (4.0 * T0_HZ**2 / U_HZ) / 20e6)
        assert omega_op(params("zero", eps_over_u=x)) / TWO_PI == pytest.approx(
            20e6, rel=0.02)

    def test_quadratic_in_t0(self):
        w1 = omega_op(params("zero", t0_hz=T0_HZ))
        w2 = omega_op(params("zero", t0_hz=T0_HZ / 2))
        assert w1 / w2 == pytest.approx(4.0, rel=1e-12)

    def test_monotone_in_detuning(self):
        vals = [omega_op(params("zero", eps_over_u=x))
                for x in (0.0, 0.3, 0.6, 0.9, 0.99)]
        assert all(b > a for a, b in zip(vals, vals[1:]))


class TestEigenenergies:
    def test_exact_edges_and_sum_rule(self):
        for mode in ("zero", "sqrt2"):
            p = params(mode)
            sol = eigenenergies(p, "exact")
            assert sol.lambdas[0] == -p.omega_0
            assert sol.lambdas[3] == p.omega_0
            assert sol.lambdas[1] + sol.lambdas[2] == pytest.approx(
                -sol.omega_op, rel=0.01)

    def test_exact_vs_approx_table3_point(self):
        p = params("zero")
        exact = eigenenergies(p, "exact")
        approx = eigenenergies(p, "approx")
        assert approx.lambdas[2] == pytest.approx(exact.lambdas[2], rel=0.01)

    def test_char_poly_residual_vanishes(self):
        for mode in ("zero", "sqrt2", "wop"):
            for x in (0.0, 0.5, 0.9):
                p = params(mode, eps_over_u=x)
                sol = eigenenergies(p, "exact")
                for lam in sol.lambdas[1:3]:
                    assert char_poly_residual(lam, p) < 1e-6

    def test_grid_accuracy_within_5pct(self):
        for mode in ("zero", "sqrt2"):
            for t0_hz in (1e8, 7e8, 1e9):
                for x in (0.0, 0.5, 0.9, 0.99):
                    p = params(mode, t0_hz=t0_hz, eps_over_u=x)
                    exact = eigenenergies(p, "exact")
                    approx = eigenenergies(p, "approx")
                    scale = max(abs(exact.lambdas[2]), exact.omega_op)
                    for a, b in zip(exact.lambdas[1:3], approx.lambdas[1:3]):
                        assert abs(a - b) <= 0.05 * max(abs(a), scale)

    def test_ambiguity_near_crossing_reported(self):
        t0 = TWO_PI * 5e10
        u = TWO_PI * U_HZ
        p = DoubleDotParams(TWO_PI * 1e10, 0.0, t0, u, 0.999 * u)
        with pytest.raises(ValueError, match="ambiguous"):
            eigenenergies(p, "exact")

    def test_approx_warns_for_large_t0(self):
        p = DoubleDotParams(0.0, 0.0, TWO_PI * 1e11, TWO_PI * U_HZ, 0.0)
        with pytest.warns(UserWarning, match="t0"):
            eigenenergies(p, "approx")


class TestGateUnitaries:
    def test_cphase_zero_time_identity(self):
        res = cphase_unitary(params("sqrt2"), 0.0)
        assert np.allclose(res.u_rot, np.eye(4))
        assert res.theta_cz == 0.0

    def test_cphase_sqrt2_equal_phases(self):
        p = params("sqrt2")
        t = math.pi / omega_op(p)
        res = cphase_unitary(p, t)
        assert res.phi_z_a == pytest.approx(res.phi_z_b, rel=1e-12)
        assert res.theta_cz == pytest.approx(math.pi, rel=1e-12)

    def test_cphase_zero_regime_phi_a_vanishes(self):
        p = params("zero")
        res = cphase_unitary(p, math.pi / omega_op(p))
        assert res.phi_z_a == 0.0
        assert abs(res.phi_z_b) == pytest.approx(math.pi, rel=1e-12)

    @pytest.mark.parametrize("mode,regime", [
        ("zero", REGIME_DW0_ZERO),
        ("wop", REGIME_DW0_EQ_WOP),
        ("sqrt2", REGIME_DW0_EQ_SQRT2_T0),
    ])
    def test_z_corrections_recover_pure_cz(self, mode, regime):
        p = params(mode)
        t = math.pi / omega_op(p)
        res = cphase_unitary(p, t, regime=regime)
        z_corr = np.diag([1.0, np.exp(1j * res.phi_z_a), np.exp(1j * res.phi_z_b),
                          np.exp(1j * (res.phi_z_a + res.phi_z_b))])
        target = np.diag([1.0, 1.0, 1.0, np.exp(-1j * res.theta_cz)])
        assert process_fidelity(target, z_corr @ res.u_rot) == pytest.approx(
            1.0, abs=1e-12)

    def test_regime_classification(self):
        assert twoqubit.classify_regime(params("zero")) == REGIME_DW0_ZERO
        assert twoqubit.classify_regime(params("sqrt2")) == REGIME_DW0_EQ_SQRT2_T0
        assert twoqubit.classify_regime(params("wop")) == REGIME_DW0_EQ_WOP
        odd = DoubleDotParams(0.0, TWO_PI * 123e6, TWO_PI * T0_HZ,
                              TWO_PI * U_HZ, 0.0)
        with pytest.raises(ValueError, match="regime"):
            twoqubit.classify_regime(odd)

    def test_exchange_pi_is_swap(self):
        p = params("zero")
        t = math.pi / omega_op(p)
        u = exchange_unitary(p, t)
        swap_block = np.array([[0.0, 1.0], [1.0, 0.0]])
        assert np.allclose(u[1:3, 1:3], swap_block, atol=1e-12)
        assert unitarity_defect(u) < 1e-12

    def test_exchange_zero_time_identity(self):
        assert np.allclose(exchange_unitary(params("zero"), 0.0), np.eye(4))

    def test_exchange_semigroup(self):
        p = params("zero")
        t1, t2 = 40e-9, 75e-9
        u = exchange_unitary(p, t1) @ exchange_unitary(p, t2)
        assert np.allclose(u, exchange_unitary(p, t1 + t2), atol=1e-12)

    def test_exchange_requires_matched_larmor(self):
        with pytest.raises(ValueError, match="delta_omega_0"):
            exchange_unitary(params("sqrt2"), 1e-9)


TABLE_CELLS = [(GATE_EXCHANGE, REGIME_DW0_ZERO),
               (GATE_CPHASE, REGIME_DW0_ZERO),
               (GATE_CPHASE, REGIME_DW0_EQ_WOP),
               (GATE_CPHASE, REGIME_DW0_EQ_SQRT2_T0)]


class TestGateErrorFidelities:
    def test_taylor_coefficients_match_reference_rows(self):
        s2 = math.sqrt(2.0)
        expected = {
            (GATE_EXCHANGE, REGIME_DW0_ZERO): (3 / 16, 3 / 4, 3 / 16),
            (GATE_CPHASE, REGIME_DW0_ZERO): (3 / 16, 3 / 4, 3 / 16),
            (GATE_CPHASE, REGIME_DW0_EQ_WOP): ((7 - 4 * s2) / 16, 1 / 2, 1 / 8),
            (GATE_CPHASE, REGIME_DW0_EQ_SQRT2_T0): (1 / 16, 1 / 4, 1 / 16),
        }
        for cell, (c_dur, c_tun, c_det4) in expected.items():
            assert taylor_coefficient(*cell, ERROR_DURATION) == (c_dur, 2)
            assert taylor_coefficient(*cell, ERROR_TUNNEL) == (c_tun, 2)
            assert taylor_coefficient(*cell, ERROR_DETUNING, 0.0) == (c_det4, 4)
            c, order = taylor_coefficient(*cell, ERROR_DETUNING, 0.9)
            lever = 0.9 / (1 - 0.81)
            assert order == 2
            assert c == pytest.approx(c_tun * lever**2, rel=1e-12)

    @pytest.mark.parametrize("gate,regime", TABLE_CELLS)
    @pytest.mark.parametrize("error_kind,eps_over_u,tol", [
        (ERROR_DURATION, 0.0, 0.01),
        # the exchange rate responds quadratically to the tunnel coupling,
        # which already shifts the infidelity by ~1 % at a 1 % error
        (ERROR_TUNNEL, 0.0, 0.016),
        (ERROR_DETUNING, 0.0, 0.01)])
    def test_taylor_matches_exact_at_small_errors(self, gate, regime,
                                                  error_kind, eps_over_u, tol):
        theta = math.pi
        pair = fid_gate_inaccuracy(gate, regime, theta, error_kind, 0.01,
                                   eps_over_u)
        infid = 1.0 - pair.exact
        assert infid > 0
        assert abs(pair.taylor - pair.exact) <= tol * infid
        # the expansion converges onto the exact form for shrinking errors
        small = fid_gate_inaccuracy(gate, regime, theta, error_kind, 0.002,
                                    eps_over_u)
        assert abs(small.taylor - small.exact) <= tol / 5.0 * (1.0 - small.exact)

    @pytest.mark.parametrize("gate,regime", TABLE_CELLS)
    def test_detuning_taylor_window_shrinks_near_crossing(self, gate, regime):
        # at eps = 0.9 U the natural small parameter is the remaining gap,
        # so the quadratic form needs proportionally smaller errors
        theta = math.pi
        wide = fid_gate_inaccuracy(gate, regime, theta, ERROR_DETUNING, 0.01, 0.9)
        assert abs(wide.taylor - wide.exact) / (1.0 - wide.exact) > 0.05
        narrow = fid_gate_inaccuracy(gate, regime, theta, ERROR_DETUNING,
                                     2e-4, 0.9)
        assert abs(narrow.taylor - narrow.exact) / (1.0 - narrow.exact) < 0.011

    def test_table3_duration_row(self):
        pair = fid_gate_inaccuracy(GATE_CPHASE, REGIME_DW0_EQ_SQRT2_T0, math.pi,
                                   ERROR_DURATION, 5.3 / 250.0)
        assert 1.0 - pair.exact == pytest.approx(2.8e-4, rel=0.02)

    def test_table3_tunnel_row(self):
        pair = fid_gate_inaccuracy(GATE_CPHASE, REGIME_DW0_EQ_SQRT2_T0, math.pi,
                                   ERROR_TUNNEL, 7.5 / 710.0)
        assert 1.0 - pair.exact == pytest.approx(2.75e-4, rel=0.02)

    def test_swap_detuning_tolerance_at_09u(self):
        # 99.9 % SWAP at eps = 0.9 U tolerates only ~0.25 % detuning error
        theta = math.pi
        c, order = taylor_coefficient(GATE_EXCHANGE, REGIME_DW0_ZERO,
                                      ERROR_DETUNING, 0.9)
        rel = (1e-3 / (c * theta**2)) ** (1.0 / order)
        assert rel == pytest.approx(0.0025, rel=0.03)
        pair = fid_gate_inaccuracy(GATE_EXCHANGE, REGIME_DW0_ZERO, theta,
                                   ERROR_DETUNING, rel, 0.9)
        assert pair.taylor == pytest.approx(0.999, abs=1e-12)
        assert pair.exact == pytest.approx(0.999, abs=1.2e-4)

    def test_duration_error_symmetric(self):
        for gate, regime in TABLE_CELLS:
            plus = fid_gate_inaccuracy(gate, regime, math.pi, ERROR_DURATION, 0.02)
            minus = fid_gate_inaccuracy(gate, regime, math.pi, ERROR_DURATION, -0.02)
            assert plus.exact == pytest.approx(minus.exact, rel=1e-12)
            assert plus.taylor == pytest.approx(minus.taylor, rel=1e-12)

    def test_detuning_domain_guard(self):
        with pytest.raises(ValueError, match="below U"):
            fid_gate_inaccuracy(GATE_CPHASE, REGIME_DW0_ZERO, math.pi,
                                ERROR_DETUNING, 0.2, 0.9)

    def test_exchange_limited_to_zero_regime(self):
        with pytest.raises(ValueError):
            fid_gate_inaccuracy(GATE_EXCHANGE, REGIME_DW0_EQ_SQRT2_T0, math.pi,
                                ERROR_DURATION, 0.01)


class TestGateNoise:
    def test_sigma_zero(self):
        assert fid_gate_noise(GATE_CPHASE, REGIME_DW0_EQ_SQRT2_T0, math.pi,
                              ERROR_DETUNING, 0.0) == 1.0

    def test_table3_detuning_noise_row(self):
        f = fid_gate_noise(GATE_CPHASE, REGIME_DW0_EQ_SQRT2_T0, math.pi,
                           ERROR_DETUNING, 9.2 / 82.7, 0.0)
        assert 1.0 - f == pytest.approx(2.84e-4, rel=5e-3)

    def test_monte_carlo_consistency(self, rng):
        theta = math.pi
        for error_kind, eps, sigma in [(ERROR_TUNNEL, 0.0, 0.004),
                                       (ERROR_DETUNING, 0.0, 0.1)]:
            draws = rng.normal(0.0, sigma, 100_000)
            samples = np.array([
                fid_gate_inaccuracy(GATE_CPHASE, REGIME_DW0_ZERO, theta,
                                    error_kind, d, eps).taylor
                for d in draws[:20_000]])
            se = samples.std(ddof=1) / math.sqrt(len(samples))
            f = fid_gate_noise(GATE_CPHASE, REGIME_DW0_ZERO, theta, error_kind,
                               sigma, eps)
            assert abs(samples.mean() - f) < 3 * se


class TestIdleFidelity:
    def test_off_zero(self):
        for regime in REGIMES:
            assert fid_idle(regime, 0.0, 500e-9).exact == 1.0

    def test_taylor_coefficients(self):
        w, t = 1e5, 1e-6
        s2 = math.sqrt(2.0)
        coeffs = {REGIME_DW0_ZERO: 3 / 16,
                  REGIME_DW0_EQ_WOP: (7 - 4 * s2) / 16,
                  REGIME_DW0_EQ_SQRT2_T0: 1 / 16}
        for regime, c in coeffs.items():
            pair = fid_idle(regime, w, t)
            assert 1.0 - pair.taylor == pytest.approx(c * (w * t) ** 2, rel=1e-12)
            assert pair.exact == pytest.approx(pair.taylor, rel=1e-4)
        pair = fid_idle(REGIME_DW0_ZERO, w, t, kind=GATE_EXCHANGE)
        assert 1.0 - pair.taylor == pytest.approx(3 / 16 * (w * t) ** 2, rel=1e-12)

    def test_reduction_factors_for_999(self):
        # identity over ten pi-gate durations at 99.9 %: the exchange rate
        # must drop ~430x, the tunnel coupling ~21x
        t_nop = 10.0 * math.pi
        from spinspec.budget import invert_forward
        w_off = invert_forward(
            lambda w: 1.0 - fid_idle(REGIME_DW0_ZERO, w, t_nop).exact,
            1e-3, seed=math.sqrt(16e-3 / 3.0) / t_nop)
        assert 1.0 / w_off == pytest.approx(430.0, rel=0.02)
        assert math.sqrt(1.0 / w_off) == pytest.approx(21.0, rel=0.02)

    def test_table3_off_value_row(self):
        t0_off_hz = 78e6
        wop_off = TWO_PI * 4.0 * t0_off_hz**2 / U_HZ
        pair = fid_idle(REGIME_DW0_EQ_SQRT2_T0, wop_off, 500e-9)
        assert 1.0 - pair.exact == pytest.approx(3.7e-4, rel=0.03)


class TestSimulateGate:
    def test_zero_duration_identity(self):
        p = params("zero")
        res = simulate_gate(p, [(p.t0, 0.0, 0.0)])
        assert np.allclose(res.u_rot, np.eye(4))

    def test_instantaneous_switch_matches_exchange(self):
        p = params("zero", t0_hz=7e-4 * U_HZ)
        t = math.pi / omega_op(p)
        res = simulate_gate(p, [(p.t0, p.epsilon, t)])
        f = process_fidelity(exchange_unitary(p, t), res.u_rot)
        assert f > 0.999
        assert res.leakage < 0.01

    def test_slow_ramp_matches_cphase_phases(self):
        p = params("sqrt2", t0_hz=7e-4 * U_HZ)
        dw0 = p.delta_omega_0
        t_ramp = 30.0 / dw0
        t_plateau = math.pi / omega_op(p)
        pulse = ramped_pulse(p, t_ramp, t_plateau, n_ramp=150)
        res = simulate_gate(p, pulse)
        theta_eff = pulse_theta(p, pulse)
        assert res.leakage < 1e-4
        assert res.phi_z_a == pytest.approx(-theta_eff / 2.0, rel=0.01)
        assert res.phi_z_b == pytest.approx(-theta_eff / 2.0, rel=0.01)

    def test_leakage_warning_when_diabatic_near_crossing(self):
        p = params("zero", t0_hz=0.02 * U_HZ, eps_over_u=0.9)
        t = 0.5 / (p.u / TWO_PI)
        with pytest.warns(UserWarning, match="leakage"):
            res = simulate_gate(p, [(p.t0, p.epsilon, 200.0 / p.u)])
            assert res.leakage > 0.01
