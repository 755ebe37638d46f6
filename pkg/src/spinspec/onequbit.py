"""Single-qubit rotations under control-chain imperfections.

Covers static inaccuracies of the carrier (frequency, phase) and envelope
(amplitude, duration), quasi-static Gaussian noise, the three intrinsic
noise filter functions of a driven rotation, crosstalk onto frequency-
multiplexed unaddressed qubits, and degradation while idling.

Closed forms come in pairs: the exact trigonometric fidelity and its
second-order Taylor expansion.  Budget inversion uses the exact forms.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import qcore
from .noise import (
    UNIT_RADS2_PER_HZ,
    FilterResponse,
    PowerSpectrum,
    filtered_infidelity,
)


class FidelityPair(NamedTuple):
    """Exact fidelity and its quadratic (or quartic) Taylor companion."""

    exact: float
    taylor: float


def clamp_theta(theta: float) -> float:
    """Reduce a rotation angle into [-pi, pi] (with a warning if it moved)."""
    if abs(theta) <= math.pi + 1e-12:
        return theta
    reduced = math.remainder(theta, 2.0 * math.pi)
    warnings.warn(
        f"rotation angle {theta:.6g} rad reduced to {reduced:.6g} rad",
        stacklevel=3,
    )
    return reduced


@dataclass(frozen=True)
class RotationSpec:
    """Intended rotation and its drive parameters (angular frequencies)."""

    theta: float                  # rad, in [-pi, pi]
    omega_r: float                # rad/s, Rabi frequency
    phi: float = 0.0              # rad, rotation-axis phase
    omega_0: float = 0.0          # rad/s, Larmor frequency
    omega_mw: float | None = None  # rad/s, carrier; defaults to omega_0
    envelope: str = "rectangular"
    sigma_t: float | None = None  # s, Gaussian envelope width

    def __post_init__(self):
        if self.omega_r <= 0:
            raise ValueError("Rabi frequency must be positive")
        if self.envelope not in ("rectangular", "gaussian"):
            raise ValueError("envelope must be 'rectangular' or 'gaussian'")
        object.__setattr__(self, "theta", clamp_theta(self.theta))

    @property
    def carrier(self) -> float:
        return self.omega_0 if self.omega_mw is None else self.omega_mw

    @property
    def duration(self) -> float:
        """Pulse length T = |theta| / omega_R for a rectangular envelope."""
        return abs(self.theta) / self.omega_r


@dataclass(frozen=True)
class CarrierError:
    delta_omega: float = 0.0      # rad/s, carrier minus Larmor
    delta_phi: float = 0.0        # rad
    s_freq: PowerSpectrum | None = None   # (rad/s)^2/Hz
    s_add: PowerSpectrum | None = None    # (rad/s)^2/Hz, additive drive noise


@dataclass(frozen=True)
class EnvelopeError:
    delta_omega_r_rel: float = 0.0
    delta_t_rel: float = 0.0
    s_amp: PowerSpectrum | None = None    # (rad/s)^2/Hz
    sigma_t: float = 0.0                  # s, rms jitter of the duration


@dataclass(frozen=True)
class FdmaScenario:
    """Unaddressed qubit on a shared drive line.

    alpha is the frequency spacing over the Rabi frequency, beta the
    relative drive strength seen by the unaddressed qubit.
    """

    alpha: float
    beta: float
    theta: float
    envelope: str = "rectangular"

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be nonnegative")
        if self.alpha == 0 and self.beta == 0:
            raise ValueError("alpha and beta cannot both vanish")
        if self.envelope not in ("rectangular", "gaussian"):
            raise ValueError("envelope must be 'rectangular' or 'gaussian'")


@dataclass(frozen=True)
class IdleScenario:
    t_nop: float                  # s
    delta_omega: float = 0.0      # rad/s, carrier-Larmor offset while idle
    omega_spur: float = 0.0       # rad/s, Rabi rate of a residual tone
    s_drive: PowerSpectrum | None = None  # (rad/s)^2/Hz on the drive line
    omega_0: float = 0.0          # rad/s

    def __post_init__(self):
        if self.t_nop < 0:
            raise ValueError("idle duration must be nonnegative")


# ---------------------------------------------------------------------
# Hamiltonians and brute-force propagation

def rwa_hamiltonian(spec: RotationSpec, err: CarrierError | None = None) -> np.ndarray:
    """Rotating-frame generator: detuning on Z plus the drive in the XY plane."""
    err = err or CarrierError()
    phi = spec.phi + err.delta_phi
    return (err.delta_omega * qcore.SIGMA_Z / 2.0
            + spec.omega_r * (math.cos(phi) * qcore.SIGMA_X / 2.0
                              - math.sin(phi) * qcore.SIGMA_Y / 2.0))


def lab_hamiltonian(spec: RotationSpec, t: float) -> np.ndarray:
    """Lab-frame generator with the explicit oscillating drive."""
    drive = 2.0 * spec.omega_r * math.cos(spec.carrier * t + spec.phi)
    return -spec.omega_0 * qcore.SIGMA_Z / 2.0 + drive * qcore.SIGMA_X / 2.0


def ideal_rotation(theta: float, phi: float = 0.0) -> np.ndarray:
    axis = math.cos(phi) * qcore.SIGMA_X - math.sin(phi) * qcore.SIGMA_Y
    return (math.cos(theta / 2.0) * qcore.IDENTITY_2
            - 1j * math.sin(theta / 2.0) * axis)


def simulate_lab_rotation(spec: RotationSpec,
                          samples_per_cycle: float = 10.0) -> float:
    """Propagate the lab-frame drive and score it against the RWA ideal.

    The carrier is sampled at midpoints and held per step; holding rescales
    the fundamental of a sampled tone by sinc(w dt / 2), so the samples are
    divided by that factor to keep the staircase driving at the nominal
    Rabi rate.
    """
    w0 = spec.omega_0
    wmw = spec.carrier
    if w0 <= 0 or wmw <= 0:
        raise ValueError("lab-frame simulation needs positive Larmor/carrier frequencies")
    t_total = spec.duration
    dt_target = (2.0 * math.pi / wmw) / samples_per_cycle
    n = max(1, int(math.ceil(t_total / dt_target)))
    dt = t_total / n
    t_mid = (np.arange(n) + 0.5) * dt
    comp = np.sinc(wmw * dt / 2.0 / math.pi)
    drive = np.cos(wmw * t_mid + spec.phi) / comp
    hams = np.zeros((n, 2, 2), dtype=complex)
    hams[:, 0, 0] = -w0 / 2.0
    hams[:, 1, 1] = w0 / 2.0
    hams[:, 0, 1] = spec.omega_r * drive
    hams[:, 1, 0] = spec.omega_r * drive
    u_lab = qcore.unitary_product(qcore.expm_batch_2x2(hams, dt))
    # move to the frame rotating at the carrier
    half = wmw * t_total / 2.0
    u_rot = np.diag([np.exp(-1j * half), np.exp(1j * half)]) @ u_lab
    # the drive realizes the positive rotation angle; a negative intended
    # angle is a pi offset in the drive phase, encoded by the caller
    return qcore.process_fidelity(
        ideal_rotation(spec.omega_r * t_total, spec.phi), u_rot)


def rwa_validity_sweep(ratios: Sequence[float], thetas: Sequence[float],
                       samples_per_cycle: float = 10.0,
                       omega_r: float = 2.0 * math.pi * 1e6):
    """Fidelity of lab-frame rotations vs the Larmor/Rabi ratio."""
    rows = []
    for ratio in ratios:
        if ratio < 1:
            raise ValueError("Larmor/Rabi ratio must be >= 1")
        for theta in thetas:
            spec = RotationSpec(theta=theta, omega_r=omega_r,
                                omega_0=ratio * omega_r)
            f = simulate_lab_rotation(spec, samples_per_cycle)
            rows.append((float(ratio), float(theta), f))
    return rows


# ---------------------------------------------------------------------
# static inaccuracies (exact + Taylor)

def fid_z_phase(delta_phi: float) -> FidelityPair:
    """Fidelity of a software Z-rotation with a phase-setting error."""
    return FidelityPair(math.cos(delta_phi / 2.0) ** 2,
                        1.0 - delta_phi**2 / 4.0)


def fid_freq_inaccuracy(theta: float, alpha: float) -> FidelityPair:
    """Carrier frequency offset, alpha = (omega_mw - omega_0) / omega_R."""
    theta = clamp_theta(theta)
    s = math.sqrt(alpha**2 + 1.0)
    num = (math.sin(theta / 2.0) * math.sin(theta / 2.0 * s)
           + s * math.cos(theta / 2.0) * math.cos(theta / 2.0 * s))
    exact = num**2 / s**2
    taylor = 1.0 - 0.5 * (1.0 - math.cos(theta)) * alpha**2
    return FidelityPair(exact, taylor)


def fid_phase_inaccuracy(theta: float, delta_phi: float) -> FidelityPair:
    theta = clamp_theta(theta)
    exact = (math.cos(delta_phi) * math.sin(theta / 2.0) ** 2
             + math.cos(theta / 2.0) ** 2) ** 2
    taylor = 1.0 - 0.5 * (1.0 - math.cos(theta)) * delta_phi**2
    return FidelityPair(exact, taylor)


def fid_amplitude_inaccuracy(theta: float, rel: float) -> FidelityPair:
    """Relative drive-amplitude error; an under- or over-rotation."""
    theta = clamp_theta(theta)
    return FidelityPair(math.cos(theta / 2.0 * rel) ** 2,
                        1.0 - (theta * rel / 2.0) ** 2)


def fid_duration_inaccuracy(theta: float, rel: float) -> FidelityPair:
    """Relative pulse-duration error; same rotation-angle effect as amplitude."""
    return fid_amplitude_inaccuracy(theta, rel)


def quasi_static_expectation(kind: str, theta: float, sigma: float) -> float:
    """Expected fidelity under zero-mean Gaussian quasi-static errors.

    ``sigma`` is in radians for ``phase``, relative for ``amplitude`` /
    ``duration`` / ``frequency`` (the latter relative to the Rabi rate).
    Phase and amplitude/duration use the exact Gaussian averages; frequency
    has no closed form and falls back to the quadratic expansion.
    """
    theta = clamp_theta(theta)
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if kind == "phase":
        return (0.5 * (1.0 + math.exp(-2.0 * sigma**2)) * math.sin(theta / 2.0) ** 4
                + math.cos(theta / 2.0) ** 4
                + 0.5 * math.exp(-sigma**2 / 2.0) * math.sin(theta) ** 2)
    if kind in ("amplitude", "duration"):
        return 0.5 + 0.5 * math.exp(-sigma**2 * theta**2 / 2.0)
    if kind == "frequency":
        return qcore.gaussian_expectation(2, 0.5 * (1.0 - math.cos(theta)), sigma)
    raise ValueError(f"unknown quasi-static error kind {kind!r}")


# ---------------------------------------------------------------------
# intrinsic filter functions

def _h2_amplitude(theta: float):
    def lp2(nu, _theta=theta):
        alpha = np.abs(np.asarray(nu, dtype=float))
        out = np.empty_like(alpha)
        small = alpha < 1e-6
        a = alpha[~small]
        out[~small] = np.sin(a * _theta / 2.0) ** 2 / a**2
        out[small] = (_theta / 2.0) ** 2 * (1.0 - (alpha[small] * _theta / 2.0) ** 2 / 3.0)
        return out
    return lp2


def _h2_frequency(theta: float):
    def lp2(nu, _theta=theta):
        alpha = np.abs(np.asarray(nu, dtype=float))
        out = np.empty_like(alpha)
        near = np.abs(alpha - 1.0) < 1e-4
        a = alpha[~near]
        num = ((1.0 - math.cos(_theta) * np.cos(a * _theta)) * (a**2 + 1.0)
               - 2.0 * a * math.sin(_theta) * np.sin(a * _theta))
        out[~near] = num / (2.0 * (a**2 - 1.0) ** 2)
        # removable pole at alpha = 1: leading series term
        out[near] = (_theta**2 + math.sin(_theta) ** 2) / (2.0 * (alpha[near] + 1.0) ** 2)
        return out
    return lp2


def filter_response(kind: str, theta: float, omega_r: float,
                    center: float = 0.0) -> FilterResponse:
    """Intrinsic qubit filter |H(w)|^2 for one noise entry point.

    Frequencies inside the prototype are normalized to the Rabi rate.
    ``amplitude`` and ``frequency`` are low-pass; ``additive`` is their sum
    acting as a band-pass around the Larmor frequency (pass it as
    ``center``).
    """
    theta = clamp_theta(theta)
    if omega_r <= 0:
        raise ValueError("Rabi frequency must be positive")
    ath = abs(theta)
    if ath == 0.0:
        if kind == "amplitude":
            zero = FilterResponse(lambda nu: np.zeros_like(np.asarray(nu, float)),
                                  dc_gain=0.0, enbw=0.0, center=center,
                                  osc_period=omega_r, tail_coeff=0.0,
                                  expects_unit=UNIT_RADS2_PER_HZ)
            return zero
        raise ValueError("theta = 0 only has a well-defined amplitude filter")

    lp_amp = _h2_amplitude(theta)
    lp_frq = _h2_frequency(theta)
    osc = 2.0 * math.pi * omega_r / ath

    if kind == "amplitude":
        return FilterResponse(
            lp2=lambda nu: lp_amp(np.asarray(nu, float) / omega_r),
            dc_gain=theta**2 / 4.0,
            enbw=omega_r * math.pi / ath,
            center=center, osc_period=osc,
            tail_coeff=omega_r**2 / 2.0,
            expects_unit=UNIT_RADS2_PER_HZ,
        )
    if kind == "frequency":
        return FilterResponse(
            lp2=lambda nu: lp_frq(np.asarray(nu, float) / omega_r),
            dc_gain=0.5 * (1.0 - math.cos(theta)),
            enbw=omega_r * math.pi * ath / (2.0 * (1.0 - math.cos(theta))),
            center=center, osc_period=osc,
            tail_coeff=omega_r**2 / 2.0,
            expects_unit=UNIT_RADS2_PER_HZ,
        )
    if kind == "additive":
        dc = theta**2 / 4.0 + 0.5 * (1.0 - math.cos(theta))
        return FilterResponse(
            lp2=lambda nu: (lp_amp(np.asarray(nu, float) / omega_r)
                            + lp_frq(np.asarray(nu, float) / omega_r)),
            dc_gain=dc,
            enbw=omega_r * 2.0 * math.pi * ath / (theta**2 + 2.0 * (1.0 - math.cos(theta))),
            center=center, osc_period=osc,
            tail_coeff=omega_r**2,
            expects_unit=UNIT_RADS2_PER_HZ,
        )
    raise ValueError(f"unknown filter kind {kind!r}")


def idle_drive_filter(t_nop: float, omega_0: float) -> FilterResponse:
    """Band-pass response of an idling qubit to residual drive-line noise.

    Sinc-shaped around the Larmor frequency; the prototype carries s^2 so
    the infidelity integral uses omega_r = 1.
    """
    if t_nop <= 0:
        raise ValueError("idle duration must be positive")

    def lp2(nu, _t=t_nop):
        nu = np.abs(np.asarray(nu, dtype=float))
        out = np.empty_like(nu)
        small = nu < 1e-9 / _t
        n = nu[~small]
        out[~small] = 2.0 * np.sin(n * _t / 2.0) ** 2 / n**2
        out[small] = _t**2 / 2.0
        return out

    return FilterResponse(
        lp2=lp2,
        dc_gain=t_nop**2 / 2.0,
        enbw=math.pi / t_nop,
        center=omega_0,
        osc_period=2.0 * math.pi / t_nop,
        tail_coeff=1.0,
        expects_unit=UNIT_RADS2_PER_HZ,
    )


# ---------------------------------------------------------------------
# frequency multiplexing (FDMA)

class FdmaResult(NamedTuple):
    f_raw: float
    f_z_corrected: float
    f_corr_bound: float
    decomposition: qcore.PauliDecomposition


def _fdma_unitaries(alpha: float, beta: float, theta: float):
    u_real = qcore.matexp_hermitian(
        alpha * qcore.SIGMA_Z / 2.0 + beta * qcore.SIGMA_X / 2.0, theta)
    u_ideal = qcore.matexp_hermitian(alpha * qcore.SIGMA_Z / 2.0, theta)
    return u_ideal, u_real


def fdma_raw_fidelity(alpha: float, beta: float, theta: float) -> float:
    """Identity fidelity of the unaddressed qubit, rectangular envelope."""
    s = math.hypot(alpha, beta)
    ca = math.cos(theta * alpha)
    sa = math.sin(theta * alpha)
    num = (s * math.cos(theta / 2.0 * s) * complex(1.0 + ca, sa)
           + alpha * math.sin(theta / 2.0 * s) * complex(sa, 1.0 - ca))
    return abs(num) ** 2 / (4.0 * s**2)


def fdma_unaddressed(scenario: FdmaScenario, n_segments: int | None = None) -> FdmaResult:
    """Crosstalk on an unaddressed qubit, raw and after Z-correction.

    Rectangular envelopes use the closed forms; Gaussian envelopes are
    simulated (truncated at +-3 sigma_t, peak drive equal to the addressed
    qubit's Rabi rate, area matching the intended angle).
    """
    a, b, th = scenario.alpha, scenario.beta, clamp_theta(scenario.theta)
    if scenario.envelope == "rectangular":
        u_ideal, u_real = _fdma_unitaries(a, b, th)
        f_raw = fdma_raw_fidelity(a, b, th)
    else:
        # time in units of 1/omega_R of the addressed qubit
        area = math.sqrt(2.0 * math.pi) * math.erf(3.0 / math.sqrt(2.0))
        sigma_t = abs(th) / area          # peak envelope = omega_R
        t_total = 6.0 * sigma_t
        n = n_segments or max(2000, int(50.0 * max(a, 1.0) * abs(th)))
        dt = t_total / n
        t_mid = (np.arange(n) + 0.5) * dt
        env = np.exp(-((t_mid - t_total / 2.0) ** 2) / (2.0 * sigma_t**2))
        env *= math.copysign(1.0, th)
        hams = np.zeros((n, 2, 2), dtype=complex)
        hams[:, 0, 0] = a / 2.0
        hams[:, 1, 1] = -a / 2.0
        hams[:, 0, 1] = b * env / 2.0
        hams[:, 1, 0] = b * env / 2.0
        u_real = qcore.unitary_product(qcore.expm_batch_2x2(hams, dt))
        u_ideal = qcore.matexp_hermitian(a * qcore.SIGMA_Z / 2.0, t_total)
        f_raw = qcore.process_fidelity(u_ideal, u_real)
    dec = qcore.pauli_decompose(u_ideal.conj().T @ u_real)
    wx, wy, wz, _ = dec.weights
    f_corr = 1.0 - wx - wy
    bound = 1.0 - (b / a) ** 2 if a > 0 else 0.0
    return FdmaResult(f_raw, f_corr, bound, dec)


class AttenuationRequirement(NamedTuple):
    beta_max: float
    beta_bound: float
    at_notch: bool


def fdma_required_attenuation(alpha: float, theta: float,
                              f_target: float) -> AttenuationRequirement:
    """Largest relative drive strength keeping the Z-corrected fidelity."""
    if not 0.0 <= f_target <= 1.0:
        raise ValueError("target fidelity must lie in [0, 1]")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    theta = clamp_theta(theta)
    root = math.sqrt(1.0 - f_target)
    bound = root * alpha
    if root == 0.0:
        return AttenuationRequirement(0.0, 0.0, False)
    s = abs(math.sin(theta / 2.0 * alpha))
    if s < 1e-12:
        return AttenuationRequirement(math.inf, bound, True)
    return AttenuationRequirement(root * alpha / s, bound, False)


# ---------------------------------------------------------------------
# idle gate

class IdleBreakdown(NamedTuple):
    freq_offset: FidelityPair
    spur: FidelityPair
    drive_noise: float | None      # fidelity, like the other fields


def idle_fidelity(scenario: IdleScenario, method: str = "quadrature") -> IdleBreakdown:
    """Identity-operation fidelity over an idle period, per mechanism."""
    t = scenario.t_nop
    x = scenario.delta_omega * t / 2.0
    freq = FidelityPair(math.cos(x) ** 2, 1.0 - x**2)
    y = scenario.omega_spur * t / 2.0
    spur = FidelityPair(math.cos(y) ** 2, 1.0 - y**2)
    drive = None
    if scenario.s_drive is not None:
        if t <= 0:
            drive = 1.0
        else:
            filt = idle_drive_filter(t, scenario.omega_0)
            drive = 1.0 - filtered_infidelity(scenario.s_drive, filt, omega_r=1.0,
                                              omega_min=0.0, method=method)
    return IdleBreakdown(freq, spur, drive)
