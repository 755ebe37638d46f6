"""Infidelity budgets and derived electronics specifications.

Forward formulas from the gate and read-out modules are inverted to the
maximum tolerable electronics error for an allocated infidelity, unit
conversions map energies between gate volts, eV and frequency, and the
case studies regenerate complete specification tables from first
principles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.constants import value as _const
from scipy.optimize import brentq
from scipy.special import erfinv

from . import onequbit, readout, twoqubit
from .noise import linear_to_dbc, phase_psd_to_dbchz
from .twoqubit import (
    ERROR_DETUNING,
    ERROR_DURATION,
    ERROR_TUNNEL,
    GATE_CPHASE,
    REGIME_DW0_EQ_SQRT2_T0,
)

PLANCK_EV_S = _const("Planck constant in eV/Hz")
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ConversionContext:
    """Transduction constants tying electrical signals to qubit quantities."""

    lever_arm_ev_per_v: float = 0.05
    # drive voltage to Rabi rate; default calibrated so 2 mV gives 1 MHz
    drive_radps_per_v: float = TWO_PI * 1e6 / 2e-3
    gamma_e_radps_per_t: float = TWO_PI * 28e9

    def __post_init__(self):
        if min(self.lever_arm_ev_per_v, self.drive_radps_per_v,
               self.gamma_e_radps_per_t) <= 0:
            raise ValueError("conversion constants must be positive")


UNITS = ("v", "ev", "hz", "rad/s")


def convert(value: float, src: str, dst: str,
            ctx: ConversionContext | None = None) -> float:
    """Convert along the chain V <-> eV <-> Hz <-> rad/s (lever arm, E = h f)."""
    ctx = ctx or ConversionContext()
    if src not in UNITS or dst not in UNITS:
        raise ValueError(f"units must be among {UNITS}")
    as_hz = {
        "v": lambda x: x * ctx.lever_arm_ev_per_v / PLANCK_EV_S,
        "ev": lambda x: x / PLANCK_EV_S,
        "hz": lambda x: x,
        "rad/s": lambda x: x / TWO_PI,
    }
    from_hz = {
        "v": lambda x: x * PLANCK_EV_S / ctx.lever_arm_ev_per_v,
        "ev": lambda x: x * PLANCK_EV_S,
        "hz": lambda x: x,
        "rad/s": lambda x: x * TWO_PI,
    }
    return from_hz[dst](as_hz[src](value))


class InversionError(RuntimeError):
    """The forward formula could not be inverted for the requested target."""


def invert_forward(infidelity_of: Callable[[float], float], target: float,
                   seed: float, cap: float | None = None,
                   roundtrip_rtol: float = 1e-6) -> float:
    """Solve infidelity_of(x) = target for x > 0 by bracketed root finding.

    ``seed`` is an initial scale (e.g. the Taylor-inverted value); the
    bracket expands geometrically around it.  The solution is round-trip
    verified against the forward formula.
    """
    if not 0.0 < target < 0.5:
        raise InversionError(f"target infidelity {target} outside (0, 0.5)")
    if seed <= 0:
        raise InversionError("seed must be positive")

    def f(x: float) -> float:
        return infidelity_of(x) - target

    lo, hi = seed / 2.0, seed * 2.0
    if cap is not None:
        hi = min(hi, cap)
    for _ in range(80):
        if f(lo) < 0.0 <= f(hi):
            break
        if f(lo) >= 0.0:
            lo /= 2.0
        else:
            hi = min(hi * 1.5, cap) if cap is not None else hi * 1.5
            if cap is not None and hi >= cap and f(hi) < 0.0:
                raise InversionError(
                    f"target {target} unreachable below the bracket cap {cap}"
                )
    else:
        raise InversionError("could not bracket the inversion target")
    x = brentq(f, lo, hi, rtol=1e-14, maxiter=200)
    got = infidelity_of(x)
    if not math.isclose(got, target, rel_tol=roundtrip_rtol):
        raise InversionError(
            f"round-trip failed: forward({x:.6g}) = {got:.6g} != {target:.6g}"
        )
    return float(x)


# ---------------------------------------------------------------------
# specification tables

@dataclass(frozen=True)
class BudgetItem:
    section: str
    label: str
    value: float | None
    unit: str
    infid_op: float | None
    infid_idle: float | None
    comment: str
    formula_id: str


@dataclass(frozen=True)
class SpecTable:
    name: str
    items: tuple[BudgetItem, ...]
    target_op: float | None
    target_idle: float | None

    @property
    def total_op(self) -> float:
        return sum(i.infid_op for i in self.items if i.infid_op is not None)

    @property
    def total_idle(self) -> float:
        return sum(i.infid_idle for i in self.items if i.infid_idle is not None)


def _fmt(x: float, sig: int = 3) -> str:
    return f"{x:.{sig}g}"


# -- single-qubit case study ------------------------------------------

TABLE1_DEFAULTS = {
    "f_rabi_hz": 1e6,
    "f_larmor_hz": 1e10,
    "f_spacing_hz": 1e9,
    "theta_rad": math.pi,
    "t_nop_s": None,          # defaults to the pi-pulse duration
    "budget_op": 1e-3,
    "budget_idle": 1e-3,
    "sigma_nuclear_hz_rms": 1.9e3,
    "t2_star_s": 120e-6,
    "drive_amplitude_v": 2e-3,
    "rwa_samples_per_cycle": 10.0,
}


def case_table1(overrides: dict | None = None,
                ctx: ConversionContext | None = None) -> SpecTable:
    """Specification table for a single-qubit rotation plus idling."""
    cfg = dict(TABLE1_DEFAULTS)
    cfg.update(overrides or {})
    th = float(cfg["theta_rad"])
    wr = TWO_PI * cfg["f_rabi_hz"]
    t_pulse = abs(th) / wr
    t_nop = cfg["t_nop_s"] if cfg["t_nop_s"] is not None else t_pulse
    v_amp = cfg["drive_amplitude_v"]
    budget_op = float(cfg["budget_op"])
    budget_idle = float(cfg["budget_idle"])

    # contributions fixed by physics or architecture choices
    ratio = cfg["f_larmor_hz"] / cfg["f_rabi_hz"]
    spec = onequbit.RotationSpec(theta=th, omega_r=wr,
                                 omega_0=TWO_PI * cfg["f_larmor_hz"])
    rwa_infid = 1.0 - onequbit.simulate_lab_rotation(
        spec, cfg["rwa_samples_per_cycle"])
    alpha_space = cfg["f_spacing_hz"] / cfg["f_rabi_hz"]
    fdma_idle = 1.0 / alpha_space**2            # beta = 1 conservative bound
    sig_nuc_rel = cfg["sigma_nuclear_hz_rms"] / cfg["f_rabi_hz"]
    nuc_op = 1.0 - onequbit.quasi_static_expectation("frequency", th, sig_nuc_rel)
    nuc_idle = (TWO_PI * cfg["sigma_nuclear_hz_rms"] * t_nop) ** 2 / 4.0

    # equal split of the remaining operation budget over 8 electronics rows
    x_op = (budget_op - rwa_infid - nuc_op) / 8.0
    if x_op <= 0:
        raise InversionError("operation budget exhausted by fixed contributions")

    # --- carrier frequency
    alpha = invert_forward(
        lambda a: 1.0 - onequbit.fid_freq_inaccuracy(th, a).exact,
        x_op, seed=math.sqrt(2.0 * x_op / (1.0 - math.cos(th))))
    df = alpha * cfg["f_rabi_hz"]
    idle_freq = 1.0 - onequbit.idle_fidelity(
        onequbit.IdleScenario(t_nop, delta_omega=TWO_PI * df)).freq_offset.exact

    # --- carrier phase
    dphi = invert_forward(
        lambda v: 1.0 - onequbit.fid_phase_inaccuracy(th, v).exact,
        x_op, seed=math.sqrt(2.0 * x_op / (1.0 - math.cos(th))))
    idle_phase = 1.0 - onequbit.fid_z_phase(dphi).exact

    # --- wideband additive noise (band-pass around the carrier)
    dc_add = th**2 / 4.0 + 0.5 * (1.0 - math.cos(th))
    sig_add_rel = math.sqrt(x_op / dc_add)
    enbw_add_hz = 2.0 * onequbit.filter_response("additive", th, wr).enbw / TWO_PI
    v_add = sig_add_rel * v_amp

    # --- amplitude
    rel_amp = invert_forward(
        lambda v: 1.0 - onequbit.fid_amplitude_inaccuracy(th, v).exact,
        x_op, seed=2.0 * math.sqrt(x_op) / abs(th))
    sig_amp = invert_forward(
        lambda v: 1.0 - onequbit.quasi_static_expectation("amplitude", th, v),
        x_op, seed=2.0 * math.sqrt(x_op) / abs(th))
    enbw_amp_hz = onequbit.filter_response("amplitude", th, wr).enbw / TWO_PI

    # --- duration
    rel_dur = invert_forward(
        lambda v: 1.0 - onequbit.fid_duration_inaccuracy(th, v).exact,
        x_op, seed=2.0 * math.sqrt(x_op) / abs(th))
    sig_dur = invert_forward(
        lambda v: 1.0 - onequbit.quasi_static_expectation("duration", th, v),
        x_op, seed=2.0 * math.sqrt(x_op) / abs(th))

    # --- idle-only rows absorb the remaining idle budget
    x_offnoise = x_op
    spent_idle = (fdma_idle + 2.0 * idle_freq + nuc_idle + idle_phase
                  + x_offnoise)
    x_spur = budget_idle - spent_idle
    if x_spur <= 0:
        raise InversionError("idle budget exhausted by operation-derived rows")
    w_spur = invert_forward(
        lambda w: 1.0 - onequbit.idle_fidelity(
            onequbit.IdleScenario(t_nop, omega_spur=w)).spur.exact,
        x_spur, seed=2.0 * math.sqrt(x_spur) / t_nop)
    spur_rel = w_spur / wr
    # residual drive-line noise while idle: brick wall theta_nop^2/2 weight
    th_nop = wr * t_nop
    sig_off_rel = math.sqrt(x_offnoise / (th_nop**2 / 2.0))
    enbw_off_hz = 2.0 * (math.pi / t_nop) / TWO_PI
    v_off = sig_off_rel * v_amp

    # oscillator-noise comments: white frequency noise in the carrier ENBW
    enbw_mw_hz = onequbit.filter_response("frequency", th, wr).enbw / TWO_PI
    s_omega = (TWO_PI * df) ** 2 / enbw_mw_hz          # (rad/s)^2/Hz
    s_phi_1mhz = s_omega / (TWO_PI * 1e6) ** 2
    l_dbchz = phase_psd_to_dbchz(s_phi_1mhz)

    items = [
        BudgetItem("frequency", "nominal", cfg["f_larmor_hz"], "hz",
                   rwa_infid, None,
                   f"counter-rotating drive terms at carrier/Rabi ratio {_fmt(ratio)}",
                   "onequbit.rwa_simulation"),
        BudgetItem("frequency", "spacing", cfg["f_spacing_hz"], "hz",
                   None, fdma_idle,
                   "multiplexed-neighbor leakage bound, rectangular envelope, beta = 1",
                   "onequbit.fdma_bound"),
        BudgetItem("frequency", "inaccuracy", df, "hz", x_op, idle_freq,
                   "", "onequbit.freq_inaccuracy.exact"),
        BudgetItem("frequency", "oscillator noise", df, "hz_rms", x_op, idle_freq,
                   f"ENBW = {_fmt(enbw_mw_hz)} Hz, L(1 MHz) = {_fmt(l_dbchz, 4)} dBc/Hz "
                   "for a -20 dB/dec profile",
                   "onequbit.quasi_static.frequency"),
        BudgetItem("frequency", "nuclear spin noise",
                   cfg["sigma_nuclear_hz_rms"], "hz_rms", nuc_op, nuc_idle,
                   f"host-material dephasing, T2* = {_fmt(cfg['t2_star_s'])} s",
                   "onequbit.quasi_static.frequency"),
        BudgetItem("frequency", "wideband noise", v_add, "v_rms", x_op, None,
                   f"ENBW = {_fmt(enbw_add_hz)} Hz (both sidebands), "
                   f"PSD = {_fmt(v_add / math.sqrt(enbw_add_hz))} V/rtHz",
                   "onequbit.additive_noise.brickwall"),
        BudgetItem("phase", "inaccuracy", math.degrees(dphi), "deg",
                   x_op, idle_phase,
                   "idle column: accuracy of the software Z-corrections",
                   "onequbit.phase_inaccuracy.exact"),
        BudgetItem("amplitude", "nominal", v_amp, "v", None, None,
                   f"full-scale {_fmt(2 * v_amp)} V, "
                   f"rms {_fmt(v_amp / math.sqrt(2.0))} V",
                   "context.drive_amplitude"),
        BudgetItem("amplitude", "inaccuracy", rel_amp * v_amp, "v", x_op, None,
                   "", "onequbit.amplitude_inaccuracy.exact"),
        BudgetItem("amplitude", "noise", sig_amp * v_amp, "v_rms", x_op, None,
                   f"ENBW = {_fmt(enbw_amp_hz)} Hz, "
                   f"PSD = {_fmt(sig_amp * v_amp / math.sqrt(enbw_amp_hz))} V/rtHz, "
                   f"noise-to-signal {_fmt(20 * math.log10(sig_amp * math.sqrt(2.0)), 4)} dB",
                   "onequbit.quasi_static.amplitude"),
        BudgetItem("amplitude", "off-spur", spur_rel * v_amp, "v",
                   None, x_spur,
                   f"{_fmt(linear_to_dbc(spur_rel), 4)} dBc of the pi-pulse amplitude",
                   "onequbit.idle.spur.exact"),
        BudgetItem("amplitude", "off-noise", v_off, "v_rms", None, x_offnoise,
                   f"ENBW = {_fmt(enbw_off_hz)} Hz (both sidebands), "
                   f"PSD = {_fmt(v_off / math.sqrt(enbw_off_hz))} V/rtHz",
                   "onequbit.idle.drive_noise.brickwall"),
        BudgetItem("duration", "nominal", t_pulse, "s", None, None, "",
                   "context.pulse_duration"),
        BudgetItem("duration", "inaccuracy", rel_dur * t_pulse, "s", x_op, None,
                   "", "onequbit.duration_inaccuracy.exact"),
        BudgetItem("duration", "noise", sig_dur * t_pulse, "s_rms", x_op, None,
                   "reference-clock jitter integrated over the pulse",
                   "onequbit.quasi_static.duration"),
    ]
    return SpecTable("table1", tuple(items), budget_op, budget_idle)


# -- two-qubit case studies -------------------------------------------

TABLE3_DEFAULTS = {
    "u_v": 0.083,
    "t0_hz": 0.71e9,
    "theta_rad": math.pi,
    "budget_op": 1e-3,
    "budget_idle": 1e-3,
    "f_inaccuracy_hz": None,     # defaults to the single-qubit derivation
    "sigma_nuclear_hz_rms": 1.9e3,
    "t_nop_s": 500e-9,
    "enbw_over_omega_op": 5.0,
    "f_omega_op_target_hz": None,   # None: operate at zero detuning
}


def _table1_frequency_spec(theta: float, budget_op: float,
                           sigma_nuc_hz: float, f_rabi_hz: float = 1e6) -> float:
    """Carrier accuracy (Hz) implied by the single-qubit table's equal split."""
    nuc = 1.0 - onequbit.quasi_static_expectation("frequency", theta,
                                                  sigma_nuc_hz / f_rabi_hz)
    x = (budget_op - nuc) / 8.0
    alpha = invert_forward(
        lambda a: 1.0 - onequbit.fid_freq_inaccuracy(theta, a).exact,
        x, seed=math.sqrt(2.0 * x / (1.0 - math.cos(theta))))
    return alpha * f_rabi_hz


def _idle_phase_infid(f_offset_hz: float, t: float) -> float:
    w = TWO_PI * f_offset_hz
    return float(math.sin(w * t / 2.0) ** 2)


def _two_qubit_table(name: str, cfg: dict, ctx: ConversionContext) -> SpecTable:
    th = float(cfg["theta_rad"])
    u_hz = convert(cfg["u_v"], "v", "hz", ctx)
    t0_hz = float(cfg["t0_hz"])
    budget_op = float(cfg["budget_op"])
    budget_idle = float(cfg["budget_idle"])
    t_nop = float(cfg["t_nop_s"])
    regime = REGIME_DW0_EQ_SQRT2_T0

    wop0_hz = 4.0 * t0_hz**2 / u_hz          # zero-detuning exchange rate
    if cfg["f_omega_op_target_hz"]:
        wop_hz = float(cfg["f_omega_op_target_hz"])
        if wop_hz <= wop0_hz:
            raise InversionError("target exchange rate below the zero-detuning rate")
        x_eps = math.sqrt(1.0 - wop0_hz / wop_hz)
    else:
        wop_hz = wop0_hz
        x_eps = 0.0
    t_gate = abs(th) / (TWO_PI * wop_hz)

    df = cfg["f_inaccuracy_hz"]
    if df is None:
        df = _table1_frequency_spec(math.pi, budget_op,
                                    cfg["sigma_nuclear_hz_rms"])
    freq_op = _idle_phase_infid(df, t_gate)
    freq_idle = _idle_phase_infid(df, t_nop)
    nuc_op = _idle_phase_infid(cfg["sigma_nuclear_hz_rms"], t_gate)
    nuc_idle = _idle_phase_infid(cfg["sigma_nuclear_hz_rms"], t_nop)

    x_op = (budget_op - 2.0 * freq_op - nuc_op) / 3.0
    if x_op <= 0:
        raise InversionError("operation budget exhausted by carrier rows")

    def gate_infid(err_kind: str):
        return lambda rel: 1.0 - twoqubit.fid_gate_inaccuracy(
            GATE_CPHASE, regime, th, err_kind, rel, eps_over_u=x_eps).exact

    c_dur, _ = twoqubit.taylor_coefficient(GATE_CPHASE, regime, ERROR_DURATION)
    rel_dur = invert_forward(gate_infid(ERROR_DURATION), x_op,
                             seed=math.sqrt(x_op / c_dur) / abs(th))
    c_tun, _ = twoqubit.taylor_coefficient(GATE_CPHASE, regime, ERROR_TUNNEL)
    rel_tun = invert_forward(gate_infid(ERROR_TUNNEL), x_op,
                             seed=math.sqrt(x_op / c_tun) / abs(th))
    c_det, order_det = twoqubit.taylor_coefficient(GATE_CPHASE, regime,
                                                   ERROR_DETUNING, x_eps)
    seed_det = (x_op / c_det) ** (1.0 / order_det) / abs(th) ** (2.0 / order_det)
    rel_det = invert_forward(gate_infid(ERROR_DETUNING), x_op, seed=seed_det,
                             cap=0.999 - x_eps)
    if order_det == 4:
        sigma_det = invert_forward(
            lambda s: 1.0 - twoqubit.fid_gate_noise(
                GATE_CPHASE, regime, th, ERROR_DETUNING, s, x_eps),
            x_op, seed=rel_det / 3.0**0.25)
    else:
        sigma_det = rel_det

    # idle: remaining budget goes to the residual exchange coupling
    x_idle = budget_idle - 2.0 * freq_idle - nuc_idle
    if x_idle <= 0:
        raise InversionError("idle budget exhausted by carrier rows")
    wop_off = invert_forward(
        lambda w: 1.0 - twoqubit.fid_idle(regime, w, t_nop).exact,
        x_idle, seed=math.sqrt(16.0 * x_idle) / t_nop)
    t0_off_hz = math.sqrt(wop_off / TWO_PI * u_hz / 4.0)

    enbw_hz = cfg["enbw_over_omega_op"] * wop_hz
    eps_v = x_eps * cfg["u_v"]
    det_v = rel_det * cfg["u_v"]
    sig_v = sigma_det * cfg["u_v"]
    tun_v_comment = (f"{_fmt(convert(t0_hz, 'hz', 'ev', ctx))} eV nominal, "
                     f"error {_fmt(convert(rel_tun * t0_hz, 'hz', 'ev', ctx))} eV")

    items = [
        BudgetItem("frequency", "spacing", math.sqrt(2.0) * t0_hz, "hz",
                   None, None,
                   "Larmor difference matched to sqrt(2) x tunnel coupling",
                   "context.regime"),
        BudgetItem("frequency", "inaccuracy", df, "hz", freq_op, freq_idle,
                   "phase accumulated against the rotating frame",
                   "onequbit.idle.freq_offset.exact"),
        BudgetItem("frequency", "oscillator noise", df, "hz_rms",
                   freq_op, freq_idle, "",
                   "onequbit.idle.freq_offset.exact"),
        BudgetItem("frequency", "nuclear spin noise",
                   cfg["sigma_nuclear_hz_rms"], "hz_rms", nuc_op, nuc_idle,
                   "", "onequbit.idle.freq_offset.exact"),
        BudgetItem("charging energy", "nominal", cfg["u_v"], "v", None, None,
                   f"{_fmt(convert(cfg['u_v'], 'v', 'ev', ctx))} eV, "
                   f"{_fmt(u_hz)} Hz",
                   "budget.convert"),
        BudgetItem("duration", "nominal", t_gate, "s", None, None,
                   f"exchange rate = {_fmt(wop_hz)} Hz",
                   "twoqubit.omega_op"),
        BudgetItem("duration", "error", rel_dur * t_gate, "s", x_op, None,
                   "", "twoqubit.cz_sqrt2.duration.exact"),
        BudgetItem("detuning energy", "nominal", eps_v, "v", None, None,
                   f"{_fmt(convert(eps_v, 'v', 'ev', ctx))} eV, "
                   f"{_fmt(convert(eps_v, 'v', 'hz', ctx))} Hz"
                   if eps_v else "charge symmetry point",
                   "budget.convert"),
        BudgetItem("detuning energy", "error", det_v, "v", x_op, None,
                   f"{_fmt(convert(det_v, 'v', 'ev', ctx))} eV, "
                   f"{_fmt(convert(det_v, 'v', 'hz', ctx))} Hz",
                   "twoqubit.cz_sqrt2.detuning.exact"),
        BudgetItem("detuning energy", "noise", sig_v, "v_rms", None, None,
                   "same allocation as the static detuning error; "
                   f"PSD = {_fmt(sig_v / math.sqrt(enbw_hz))} V/rtHz "
                   f"in ENBW = {_fmt(enbw_hz)} Hz",
                   "twoqubit.cz_sqrt2.detuning.noise"),
        BudgetItem("tunnel coupling", "nominal", t0_hz, "hz", None, None,
                   f"{_fmt(convert(t0_hz, 'hz', 'ev', ctx))} eV",
                   "budget.convert"),
        BudgetItem("tunnel coupling", "error", rel_tun * t0_hz, "hz",
                   x_op, None, tun_v_comment,
                   "twoqubit.cz_sqrt2.tunnel.exact"),
        BudgetItem("tunnel coupling", "off-value", t0_off_hz, "hz",
                   None, x_idle,
                   f"{_fmt(convert(t0_off_hz, 'hz', 'ev', ctx))} eV; residual "
                   f"exchange rate {_fmt(wop_off / TWO_PI)} Hz",
                   "twoqubit.idle.cz_sqrt2.exact"),
    ]
    return SpecTable(name, tuple(items), budget_op, budget_idle)


def case_table3(overrides: dict | None = None,
                ctx: ConversionContext | None = None) -> SpecTable:
    """C-phase gate at the charge symmetry point."""
    cfg = dict(TABLE3_DEFAULTS)
    cfg.update(overrides or {})
    return _two_qubit_table("table3", cfg, ctx or ConversionContext())


def case_table4(overrides: dict | None = None,
                ctx: ConversionContext | None = None) -> SpecTable:
    """C-phase gate at finite detuning (faster, tighter detuning spec)."""
    cfg = dict(TABLE3_DEFAULTS)
    cfg["f_omega_op_target_hz"] = 20e6
    cfg["enbw_over_omega_op"] = 5.0
    cfg.update(overrides or {})
    return _two_qubit_table("table4", cfg, ctx or ConversionContext())


# -- read-out case study ----------------------------------------------

TABLE5_DEFAULTS = {
    "u_v": 0.0827,
    "e_st_ev": 50e-6,
    "f_target": 0.999,
    "i_s_a": 400e-12,
    "sensor_noise_a_rthz": 57e-15,
    "circuit_noise_ratio": 0.5,
    "enbw_detuning_hz": 1e6,
    "scan_steps": 2500,
}


def _charge_sim_params(e_st_hz: float, t0_hz: float, u_hz: float):
    # master-curve property: the conversion error depends on E_ST / t0;
    # simulate with small Larmor scales to stay in the curve's validity range
    base = twoqubit.DoubleDotParams(
        omega_0=TWO_PI * e_st_hz / 100.0,
        delta_omega_0=TWO_PI * e_st_hz / 1000.0,
        t0=TWO_PI * t0_hz,
        u=TWO_PI * u_hz,
        epsilon=0.0,
    )
    return readout.ReadoutDotParams(base, TWO_PI * e_st_hz)


def case_table5(overrides: dict | None = None,
                ctx: ConversionContext | None = None) -> SpecTable:
    """Read-out chain specifications at equal error split."""
    ctx = ctx or ConversionContext()
    cfg = dict(TABLE5_DEFAULTS)
    cfg.update(overrides or {})
    f_target = float(cfg["f_target"])
    p_each = f_target ** (1.0 / 3.0)
    err_each = 1.0 - p_each

    u_hz = convert(cfg["u_v"], "v", "hz", ctx)
    e_st_hz = convert(cfg["e_st_ev"], "ev", "hz", ctx)
    e_st_v = convert(cfg["e_st_ev"], "ev", "v", ctx)
    eps_read_v = cfg["u_v"] + e_st_v / 2.0

    # tunnel coupling for half the conversion budget at the optimal detuning
    def conversion_error(t0_hz: float) -> float:
        p = _charge_sim_params(e_st_hz, t0_hz, u_hz)
        res = readout.adiabatic_charge_transfer(
            p, p.base.u + p.e_st / 2.0, n_steps=int(cfg["scan_steps"]))
        return 1.0 - res.p_charge

    seed_t0 = e_st_hz * math.sqrt(err_each / 2.0) / 4.0
    t0_hz = invert_forward(conversion_error, err_each / 2.0, seed=seed_t0,
                           roundtrip_rtol=1e-4)

    # detuning window where the conversion error at most doubles
    p_sim = _charge_sim_params(e_st_hz, t0_hz, u_hz)
    eps_opt, err_min, scan = readout.optimal_read_detuning(
        p_sim, n_steps=int(cfg["scan_steps"]))
    x = (scan.epsilons - p_sim.base.u) / p_sim.e_st
    norm = scan.error / err_min
    x_opt = float(x[np.argmin(np.abs(scan.epsilons - eps_opt))])
    inside = norm <= 2.0
    lo = x[inside & (x < x_opt)].min()
    hi = x[inside & (x > x_opt)].max()
    half_width = min(x_opt - lo, hi - x_opt)
    det_v = half_width * e_st_v

    # detector chain sized for the detection share of the budget
    snr_req = 8.0 * float(erfinv(2.0 * p_each - 1.0)) ** 2
    s_sensor = cfg["sensor_noise_a_rthz"] ** 2
    s_circuit = (cfg["circuit_noise_ratio"] * cfg["sensor_noise_a_rthz"]) ** 2
    t_read = snr_req * (s_sensor + s_circuit) / (2.0 * cfg["i_s_a"] ** 2)
    enbw_hz = 1.0 / (2.0 * t_read)
    sig_sensor = math.sqrt(s_sensor * enbw_hz)
    sig_circuit = math.sqrt(s_circuit * enbw_hz)
    amp_total = math.sqrt(s_sensor) + math.sqrt(s_circuit)
    det_err = 1.0 - p_each
    err_sensor = det_err * math.sqrt(s_sensor) / amp_total
    err_circuit = det_err * math.sqrt(s_circuit) / amp_total

    p_charge = 1.0 - 2.0 * err_min
    composed = readout.readout_fidelity(
        readout.ReadoutBudget(p_charge, p_each, p_each), "approx")

    items = [
        BudgetItem("charging energy", "nominal", cfg["u_v"], "v", None, None,
                   f"{_fmt(convert(cfg['u_v'], 'v', 'ev', ctx))} eV, "
                   f"{_fmt(u_hz)} Hz", "budget.convert"),
        BudgetItem("singlet-triplet energy", "nominal", e_st_v, "v", None, None,
                   f"{_fmt(cfg['e_st_ev'])} eV, {_fmt(e_st_hz)} Hz",
                   "budget.convert"),
        BudgetItem("detuning energy", "nominal", eps_read_v, "v", None, None,
                   f"{_fmt(convert(eps_read_v, 'v', 'ev', ctx))} eV, "
                   f"{_fmt(convert(eps_read_v, 'v', 'hz', ctx))} Hz; "
                   "midpoint between the avoided crossings",
                   "readout.optimal_detuning"),
        BudgetItem("detuning energy", "error", det_v, "v", err_min, None,
                   f"{_fmt(convert(det_v, 'v', 'ev', ctx))} eV, "
                   f"{_fmt(convert(det_v, 'v', 'hz', ctx))} Hz; window where "
                   "the conversion error at most doubles; sigma = "
                   f"{_fmt(det_v)} V rms, PSD = "
                   f"{_fmt(det_v / math.sqrt(cfg['enbw_detuning_hz']))} V/rtHz "
                   f"in ENBW = {_fmt(cfg['enbw_detuning_hz'])} Hz",
                   "readout.charge_scan"),
        BudgetItem("tunnel coupling", "nominal", t0_hz, "hz", err_min, None,
                   f"{_fmt(convert(t0_hz, 'hz', 'ev', ctx))} eV; conversion "
                   f"error at the optimal detuning, E_ST/t0 = {_fmt(e_st_hz / t0_hz)}",
                   "readout.charge_error_vs_splitting"),
        BudgetItem("conversion", "P_charge", p_charge, "probability",
                   1.0 - p_charge, None, "", "readout.p_charge"),
        BudgetItem("sensing", "P_sense", p_each, "probability",
                   1.0 - p_each, None,
                   "sensor-specific physics, supplied as an input",
                   "context.p_sense"),
        BudgetItem("charge sensor", "signal", cfg["i_s_a"], "a", None, None,
                   "", "context.sensor"),
        BudgetItem("charge sensor", "noise", sig_sensor, "a_rms", err_sensor,
                   None,
                   f"PSD = {_fmt(cfg['sensor_noise_a_rthz'])} A/rtHz",
                   "readout.snr.white"),
        BudgetItem("readout circuit", "input-referred noise", sig_circuit,
                   "a_rms", err_circuit, None,
                   f"PSD = {_fmt(cfg['circuit_noise_ratio'] * cfg['sensor_noise_a_rthz'])} "
                   "A/rtHz", "readout.snr.white"),
        BudgetItem("detection", "P_detect", p_each, "probability",
                   det_err, None,
                   f"SNR = {_fmt(snr_req)}, T_read = {_fmt(t_read)} s",
                   "readout.p_detect"),
        BudgetItem("total", "read-out fidelity", composed, "probability",
                   1.0 - composed, None, "product composition",
                   "readout.compose.approx"),
    ]
    return SpecTable("table5", tuple(items), 1.0 - f_target, None)


CASE_STUDIES = {
    "table1": case_table1,
    "table3": case_table3,
    "table4": case_table4,
    "table5": case_table5,
}


def case_study(name: str, overrides: dict | None = None,
               ctx: ConversionContext | None = None) -> SpecTable:
    try:
        fn = CASE_STUDIES[name]
    except KeyError:
        raise ValueError(
            f"unknown case study {name!r}; expected one of {sorted(CASE_STUDIES)}"
        ) from None
    return fn(overrides, ctx)


# -- custom budgets ----------------------------------------------------

SINGLE_QUBIT_SOURCES = (
    "freq_inaccuracy",
    "phase_inaccuracy",
    "amplitude_inaccuracy",
    "duration_inaccuracy",
    "freq_noise",
    "amplitude_noise",
    "duration_noise",
    "additive_noise",
    "idle_freq_offset",
    "idle_spur",
    "idle_drive_noise",
)


def derive_custom(requests: Sequence[tuple[str, float]],
                  context: dict | None = None,
                  ctx: ConversionContext | None = None) -> SpecTable:
    """Invert a list of (source, allocated infidelity) single-qubit items.

    ``context`` carries theta_rad, f_rabi_hz and t_nop_s.  Idle sources
    are budgeted against the idle column; a warning comment is attached
    when the idle frequency requirement is tighter than the operation one.
    """
    context = dict(context or {})
    th = float(context.get("theta_rad", math.pi))
    f_rabi = float(context.get("f_rabi_hz", 1e6))
    wr = TWO_PI * f_rabi
    t_nop = float(context.get("t_nop_s", abs(th) / wr))
    th_nop = wr * t_nop
    items = []
    df_op: float | None = None
    df_idle: float | None = None
    for source, target in requests:
        if target <= 0:
            raise InversionError(f"allocation for {source!r} must be positive")
        comment = ""
        if source == "freq_inaccuracy":
            alpha = invert_forward(
                lambda a: 1.0 - onequbit.fid_freq_inaccuracy(th, a).exact,
                target, seed=math.sqrt(2.0 * target / (1.0 - math.cos(th))))
            value, unit, op, idle = alpha * f_rabi, "hz", target, None
            df_op = alpha * f_rabi
        elif source == "phase_inaccuracy":
            v = invert_forward(
                lambda a: 1.0 - onequbit.fid_phase_inaccuracy(th, a).exact,
                target, seed=math.sqrt(2.0 * target / (1.0 - math.cos(th))))
            value, unit, op, idle = v, "rad", target, None
        elif source in ("amplitude_inaccuracy", "duration_inaccuracy"):
            v = invert_forward(
                lambda a: 1.0 - onequbit.fid_amplitude_inaccuracy(th, a).exact,
                target, seed=2.0 * math.sqrt(target) / abs(th))
            value, unit, op, idle = v, "relative", target, None
        elif source == "freq_noise":
            v = invert_forward(
                lambda s: 1.0 - onequbit.quasi_static_expectation("frequency", th, s),
                target, seed=math.sqrt(2.0 * target / (1.0 - math.cos(th))))
            value, unit, op, idle = v * f_rabi, "hz_rms", target, None
        elif source in ("amplitude_noise", "duration_noise"):
            kind = source.split("_")[0]
            v = invert_forward(
                lambda s: 1.0 - onequbit.quasi_static_expectation(kind, th, s),
                target, seed=2.0 * math.sqrt(target) / abs(th))
            value, unit, op, idle = v, "relative_rms", target, None
        elif source == "additive_noise":
            dc = th**2 / 4.0 + 0.5 * (1.0 - math.cos(th))
            value, unit = math.sqrt(target / dc), "relative_rms"
            op, idle = target, None
        elif source == "idle_freq_offset":
            w = invert_forward(
                lambda v: 1.0 - onequbit.idle_fidelity(
                    onequbit.IdleScenario(t_nop, delta_omega=v)).freq_offset.exact,
                target, seed=2.0 * math.sqrt(target) / t_nop)
            value, unit, op, idle = w / TWO_PI, "hz", None, target
            df_idle = w / TWO_PI
        elif source == "idle_spur":
            w = invert_forward(
                lambda v: 1.0 - onequbit.idle_fidelity(
                    onequbit.IdleScenario(t_nop, omega_spur=v)).spur.exact,
                target, seed=2.0 * math.sqrt(target) / t_nop)
            value, unit, op, idle = linear_to_dbc(w / wr), "dbc", None, target
        elif source == "idle_drive_noise":
            value = math.sqrt(target / (th_nop**2 / 2.0))
            unit, op, idle = "relative_rms", None, target
        else:
            raise ValueError(f"unknown budget source {source!r}; "
                             f"known: {SINGLE_QUBIT_SOURCES}")
        items.append(BudgetItem("custom", source, value, unit, op, idle,
                                comment, f"budget.derive.{source}"))
    if df_op is not None and df_idle is not None and df_idle < df_op:
        items.append(BudgetItem(
            "custom", "note", None, "", None, None,
            f"idle frequency accuracy ({_fmt(df_idle)} Hz) is more stringent "
            f"than the operation requirement ({_fmt(df_op)} Hz)",
            "budget.consistency"))
    return SpecTable("custom", tuple(items),
                     sum(t for s, t in requests
                         if not s.startswith("idle_")) or None,
                     sum(t for s, t in requests
                         if s.startswith("idle_")) or None)
