"""Exchange-based two-qubit gates in a double quantum dot.

The 6x6 Hamiltonian couples the four (1,1) spin states to the two doubly
occupied singlets.  Adiabatic activation of the exchange interaction gives
a controlled-phase gate, diabatic activation an exchange (SWAP-type) gate;
both run at the exchange rate omega_op = 4 t0^2 U / (U^2 - eps^2).

Gate-error fidelities are evaluated two ways: exact cosine forms built
from the acquired-phase errors, and their quadratic (quartic for detuning
at the symmetry point) Taylor coefficients.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import qcore
from .onequbit import FidelityPair

REGIME_DW0_ZERO = "dw0_zero"
REGIME_DW0_EQ_WOP = "dw0_eq_wop"
REGIME_DW0_EQ_SQRT2_T0 = "dw0_eq_sqrt2_t0"
REGIMES = (REGIME_DW0_ZERO, REGIME_DW0_EQ_WOP, REGIME_DW0_EQ_SQRT2_T0)

GATE_CPHASE = "cphase"
GATE_EXCHANGE = "exchange"

ERROR_DURATION = "duration"
ERROR_TUNNEL = "tunnel"
ERROR_DETUNING = "detuning"


@dataclass(frozen=True)
class DoubleDotParams:
    """Operating point of the double dot (angular frequencies, hbar = 1)."""

    omega_0: float          # rad/s, mean Larmor frequency
    delta_omega_0: float    # rad/s, Larmor difference (right minus left)
    t0: float               # rad/s, interdot tunnel coupling
    u: float                # rad/s, charging energy
    epsilon: float          # rad/s, detuning

    def __post_init__(self):
        if self.u <= 0:
            raise ValueError("charging energy must be positive")
        if self.t0 < 0:
            raise ValueError("tunnel coupling must be nonnegative")
        if abs(self.epsilon) >= self.u:
            raise ValueError(
                "gate analysis requires |epsilon| < U (inside the avoided crossing)"
            )


def hamiltonian6(p: DoubleDotParams) -> np.ndarray:
    """Basis [uu, ud, du, dd, S(0,2), S(2,0)]."""
    w0, dw0, t0, u, e = p.omega_0, p.delta_omega_0, p.t0, p.u, p.epsilon
    h = np.zeros((6, 6), dtype=complex)
    h[0, 0] = -w0
    h[1, 1] = dw0 / 2.0
    h[2, 2] = -dw0 / 2.0
    h[3, 3] = w0
    h[4, 4] = u - e
    h[5, 5] = u + e
    for s in (4, 5):
        h[1, s] = h[s, 1] = t0
        h[2, s] = h[s, 2] = -t0
    return h


def omega_op(p: DoubleDotParams) -> float:
    """Exchange interaction strength; sets the two-qubit gate speed."""
    return 4.0 * p.t0**2 * p.u / (p.u**2 - p.epsilon**2)


class EigenSolution(NamedTuple):
    lambdas: tuple[float, float, float, float]
    omega_op: float
    method: str


def char_poly_residual(lam: float, p: DoubleDotParams) -> float:
    """Residual of the coupled-block characteristic polynomial at ``lam``.

    Normalized by the largest polynomial term at the spin-flip eigenvalue
    scale, so it vanishes (to rounding) exactly on the two spin-flip
    branches.
    """
    d, t0, u, e = p.delta_omega_0, p.t0, p.u, p.epsilon
    value = ((lam**2 - d**2 / 4.0)
             * (lam**2 - 2.0 * u * lam + (u**2 - e**2))
             + 4.0 * lam * t0**2 * (u - lam))
    ref = max(abs(lam), omega_op(p))
    scale = max(ref**4, 2.0 * u * ref**3, ref**2 * abs(u**2 - e**2),
                d**2 / 4.0 * ref**2, d**2 / 2.0 * u * ref,
                d**2 / 4.0 * abs(u**2 - e**2),
                4.0 * ref * t0**2 * u, 4.0 * ref**2 * t0**2, 1e-300)
    return abs(value) / scale


def eigenenergies(p: DoubleDotParams, method: str = "exact") -> EigenSolution:
    """Four spin-branch eigenenergies (lambda_1 <= ... ordering by role).

    ``exact`` diagonalizes the 6x6 Hamiltonian and keeps the four branches
    with dominant spin character; ``approx`` uses the closed forms valid
    for t0 << U.
    """
    wop = omega_op(p)
    if method == "approx":
        if p.t0 / p.u > 0.05:
            warnings.warn("closed-form eigenenergies assume t0 << U", stacklevel=2)
        root = math.sqrt(p.delta_omega_0**2 + wop**2)
        lam2 = (-wop + root) / 2.0
        lam3 = (-wop - root) / 2.0
        return EigenSolution((-p.omega_0, lam2, lam3, p.omega_0), wop, "approx")
    if method != "exact":
        raise ValueError("method must be 'exact' or 'approx'")
    w, keep = _coupled_block_eigensolve(p)
    lam2, lam3 = sorted((float(w[keep[0]]), float(w[keep[1]])), reverse=True)
    return EigenSolution((-p.omega_0, lam2, lam3, p.omega_0), wop, "exact")


def _coupled_block_eigensolve(p: DoubleDotParams):
    """Eigenvalues of the coupled {ud, du, S(0,2), S(2,0)} block and the
    indices of the two spin-flip branches (uu and dd decouple exactly)."""
    block = np.ix_((1, 2, 4, 5), (1, 2, 4, 5))
    w, v = np.linalg.eigh(hamiltonian6(p)[block])
    spin_weight = np.sum(np.abs(v[:2, :]) ** 2, axis=0)
    keep = sorted(range(4), key=lambda i: spin_weight[i], reverse=True)[:2]
    # near |eps| -> U a spin branch hybridizes half-and-half with a singlet;
    # demand a clear spin majority before labeling it
    if min(spin_weight[i] for i in keep) < 0.55:
        raise ValueError(
            "spin-branch selection is ambiguous (eigenvector weight "
            f"{min(spin_weight[i] for i in keep):.3f} is barely spin-like); "
            "the operating point is too close to the avoided crossing"
        )
    return w, keep


# ---------------------------------------------------------------------
# gate construction

def _regime_phases(regime: str, wop: float, t: float,
                   delta_pinned: float | None = None) -> tuple[float, float]:
    """Acquired Z-phases (phi_A, phi_B) of the adiabatic operation."""
    th = wop * t
    if regime == REGIME_DW0_ZERO:
        return 0.0, -th
    if regime == REGIME_DW0_EQ_SQRT2_T0:
        return -th / 2.0, -th / 2.0
    if regime == REGIME_DW0_EQ_WOP:
        d = wop if delta_pinned is None else delta_pinned
        root = math.sqrt(d**2 + wop**2)
        lam2 = (-wop + root) / 2.0
        lam3 = (-wop - root) / 2.0
        return t * (lam2 - d / 2.0), t * (lam3 + d / 2.0)
    raise ValueError(f"unknown regime {regime!r}")


def classify_regime(p: DoubleDotParams, rtol: float = 1e-6) -> str:
    wop = omega_op(p)
    d = p.delta_omega_0
    if d == 0.0:
        return REGIME_DW0_ZERO
    if abs(d - math.sqrt(2.0) * p.t0) <= rtol * d:
        return REGIME_DW0_EQ_SQRT2_T0
    if abs(d - wop) <= rtol * max(d, wop):
        return REGIME_DW0_EQ_WOP
    raise ValueError(
        "Larmor difference matches none of the supported operating regimes; "
        "pass the regime explicitly"
    )


class CPhaseResult(NamedTuple):
    u_lab: np.ndarray        # 6x6 diagonal in the adiabatic frame
    u_rot: np.ndarray        # 4x4 rotating-frame operation
    phi_z_a: float
    phi_z_b: float
    theta_cz: float


def cphase_unitary(p: DoubleDotParams, t: float,
                   regime: str | None = None,
                   method: str = "regime") -> CPhaseResult:
    """Adiabatic (controlled-phase) operation after time t at the operating
    point.  ``method='exact'`` takes the phases from the 6x6 eigensolve,
    ``'regime'`` from the closed forms of the classified operating regime.
    """
    wop = omega_op(p)
    if method == "exact":
        w_block, keep = _coupled_block_eigensolve(p)
        lam2, lam3 = sorted((float(w_block[keep[0]]), float(w_block[keep[1]])),
                            reverse=True)
        phi_a = t * (lam2 - p.delta_omega_0 / 2.0)
        phi_b = t * (lam3 + p.delta_omega_0 / 2.0)
        singlets = [float(w_block[i]) for i in range(4) if i not in keep]
        lam = [-p.omega_0, lam2, lam3, p.omega_0] + sorted(singlets)
        u_lab = np.diag(np.exp(-1j * np.asarray(lam) * t))
    else:
        regime = regime or classify_regime(p)
        phi_a, phi_b = _regime_phases(regime, wop, t)
        sol = eigenenergies(p, "approx")
        lam = list(sol.lambdas) + [p.u - p.epsilon, p.u + p.epsilon]
        u_lab = np.diag(np.exp(-1j * np.asarray(lam) * t))
    theta_cz = -(phi_a + phi_b)
    u_rot = np.diag([1.0, cmath.exp(-1j * phi_a), cmath.exp(-1j * phi_b), 1.0])
    return CPhaseResult(u_lab, u_rot, phi_a, phi_b, theta_cz)


def exchange_unitary(p: DoubleDotParams, t: float) -> np.ndarray:
    """Diabatic exchange gate; requires matched Larmor frequencies."""
    wop = omega_op(p)
    if abs(p.delta_omega_0) > 1e-6 * wop:
        raise ValueError(
            "exchange gate requires delta_omega_0 = 0 (it must be << omega_op)"
        )
    th = wop * t
    e = cmath.exp(1j * th)
    u = np.eye(4, dtype=complex)
    u[1, 1] = u[2, 2] = (1.0 + e) / 2.0
    u[1, 2] = u[2, 1] = (1.0 - e) / 2.0
    return u


# ---------------------------------------------------------------------
# gate-error fidelities

# quadratic infidelity coefficients (units of theta^2 * rel^2); in the
# pinned-Larmor-difference regime the exchange-rate response differs from
# plain duration scaling, so tunnel coefficients are tabulated separately
_DURATION_COEFF = {
    (GATE_EXCHANGE, REGIME_DW0_ZERO): 3.0 / 16.0,
    (GATE_CPHASE, REGIME_DW0_ZERO): 3.0 / 16.0,
    (GATE_CPHASE, REGIME_DW0_EQ_WOP): (7.0 - 4.0 * math.sqrt(2.0)) / 16.0,
    (GATE_CPHASE, REGIME_DW0_EQ_SQRT2_T0): 1.0 / 16.0,
}
_TUNNEL_COEFF = {
    (GATE_EXCHANGE, REGIME_DW0_ZERO): 3.0 / 4.0,
    (GATE_CPHASE, REGIME_DW0_ZERO): 3.0 / 4.0,
    (GATE_CPHASE, REGIME_DW0_EQ_WOP): 1.0 / 2.0,
    (GATE_CPHASE, REGIME_DW0_EQ_SQRT2_T0): 1.0 / 4.0,
}


def _check_cell(kind: str, regime: str):
    if kind == GATE_EXCHANGE and regime != REGIME_DW0_ZERO:
        raise ValueError("the exchange gate is only defined for delta_omega_0 = 0")
    if (kind, regime) not in _DURATION_COEFF:
        raise ValueError(f"unsupported gate/regime combination ({kind}, {regime})")


def taylor_coefficient(kind: str, regime: str, error_kind: str,
                       eps_over_u: float = 0.0) -> tuple[float, int]:
    """(c, order) such that 1 - F = c * theta^2 * rel^order for small rel."""
    _check_cell(kind, regime)
    if error_kind == ERROR_DURATION:
        return _DURATION_COEFF[(kind, regime)], 2
    if error_kind == ERROR_TUNNEL:
        return _TUNNEL_COEFF[(kind, regime)], 2
    if error_kind == ERROR_DETUNING:
        x = eps_over_u
        if x == 0.0:
            return _TUNNEL_COEFF[(kind, regime)] / 4.0, 4
        lever = x / (1.0 - x**2)
        return _TUNNEL_COEFF[(kind, regime)] * lever**2, 2
    raise ValueError(f"unknown error kind {error_kind!r}")


def _cz_fid_from_phase_errors(da: float, db: float) -> float:
    return (3.0 / 8.0 + 0.25 * math.cos(da) + 0.25 * math.cos(db)
            + 0.125 * math.cos(da - db))


def _swap_fid_from_angle_error(dth: float) -> float:
    return 5.0 / 8.0 + 3.0 / 8.0 * math.cos(dth)


def fid_gate_inaccuracy(kind: str, regime: str, theta: float,
                        error_kind: str, rel: float,
                        eps_over_u: float = 0.0) -> FidelityPair:
    """Gate fidelity under a static control inaccuracy.

    ``rel`` is Delta T / T, Delta t0 / t0, or Delta eps / U depending on
    ``error_kind``; ``eps_over_u`` locates the operating point for
    detuning errors.
    """
    _check_cell(kind, regime)
    if error_kind == ERROR_DETUNING and abs(eps_over_u) + abs(rel) >= 1.0:
        raise ValueError("|epsilon| + |Delta epsilon| must stay below U")

    # perturbed duration and exchange-rate scale factors
    t_scale = 1.0
    w_scale = 1.0
    if error_kind == ERROR_DURATION:
        t_scale = 1.0 + rel
    elif error_kind == ERROR_TUNNEL:
        w_scale = (1.0 + rel) ** 2
    elif error_kind == ERROR_DETUNING:
        x = eps_over_u
        w_scale = (1.0 - x**2) / (1.0 - (x + rel) ** 2)
    else:
        raise ValueError(f"unknown error kind {error_kind!r}")

    c, order = taylor_coefficient(kind, regime, error_kind, eps_over_u)
    taylor = 1.0 - c * theta**2 * rel**order

    if kind == GATE_EXCHANGE:
        exact = _swap_fid_from_angle_error(theta - theta * w_scale * t_scale)
        return FidelityPair(exact, taylor)

    # nominal phases in units of omega_op * T = theta; the Larmor difference
    # stays pinned at its nominal value while omega_op and T take the error
    pa_i, pb_i = _regime_phases(regime, 1.0, theta)
    pa_r, pb_r = _regime_phases(regime, w_scale, theta * t_scale,
                                delta_pinned=1.0)
    exact = _cz_fid_from_phase_errors(pa_i - pa_r, pb_i - pb_r)
    return FidelityPair(exact, taylor)


def fid_gate_noise(kind: str, regime: str, theta: float, error_kind: str,
                   sigma_rel: float, eps_over_u: float = 0.0) -> float:
    """Expected fidelity for quasi-static Gaussian control noise."""
    c, order = taylor_coefficient(kind, regime, error_kind, eps_over_u)
    return qcore.gaussian_expectation(order, c * theta**2, sigma_rel)


_IDLE_COEFF = {
    REGIME_DW0_ZERO: 3.0 / 16.0,
    REGIME_DW0_EQ_WOP: (7.0 - 4.0 * math.sqrt(2.0)) / 16.0,
    REGIME_DW0_EQ_SQRT2_T0: 1.0 / 16.0,
}


def fid_idle(regime: str, omega_op_off: float, t_nop: float,
             kind: str = GATE_CPHASE) -> FidelityPair:
    """Identity fidelity while the exchange interaction is merely reduced."""
    if omega_op_off < 0 or t_nop < 0:
        raise ValueError("residual rate and idle duration must be nonnegative")
    th = omega_op_off * t_nop
    if kind == GATE_EXCHANGE:
        c = 3.0 / 16.0
        exact = _swap_fid_from_angle_error(th)
    else:
        c = _IDLE_COEFF[regime]
        pa, pb = _regime_phases(regime, omega_op_off, t_nop,
                                delta_pinned=omega_op_off)
        exact = _cz_fid_from_phase_errors(pa, pb)
    return FidelityPair(exact, 1.0 - c * th**2)


# ---------------------------------------------------------------------
# brute-force oracle

class SimulatedGate(NamedTuple):
    u_rot: np.ndarray       # 4x4 spin-sector operation, Larmor phases removed
    leakage: float          # worst-column population lost to the singlets
    phi_z_a: float
    phi_z_b: float


def simulate_gate(p: DoubleDotParams,
                  pulse: Sequence[tuple[float, float, float]],
                  step_hint: float | None = None) -> SimulatedGate:
    """Propagate a (t0, epsilon, duration) control pulse on the full 6x6.

    Returns the rotating-frame spin-sector operation for comparison with
    the closed-form gates.  Population leaking into the doubly occupied
    singlets is reported; above 1 % it is flagged with a warning.
    """
    if not pulse:
        raise ValueError("pulse must contain at least one segment")
    segs = []
    total = 0.0
    for t0_k, eps_k, dt_k in pulse:
        if dt_k < 0:
            raise ValueError("segment durations must be nonnegative")
        if dt_k == 0.0:
            continue
        pk = DoubleDotParams(p.omega_0, p.delta_omega_0, t0_k, p.u, eps_k)
        n = 1 if step_hint is None else max(1, int(math.ceil(dt_k / step_hint)))
        segs.extend([(hamiltonian6(pk), dt_k / n)] * n)
        total += dt_k
    if not segs:
        return SimulatedGate(np.eye(4, dtype=complex), 0.0, 0.0, 0.0)
    u6 = qcore.propagate(qcore.schedule(segs))
    m = u6[:4, :4]
    leakage = float((1.0 - np.sum(np.abs(m) ** 2, axis=0)).max())
    if leakage > 0.01:
        warnings.warn(f"spin-sector leakage {leakage:.3g} exceeds 1%", stacklevel=2)
    free = np.array([-p.omega_0, p.delta_omega_0 / 2.0,
                     -p.delta_omega_0 / 2.0, p.omega_0])
    u_rot = np.diag(np.exp(1j * free * total)) @ m
    phi_a = -cmath.phase(u_rot[1, 1])
    phi_b = -cmath.phase(u_rot[2, 2])
    return SimulatedGate(u_rot, leakage, phi_a, phi_b)


def ramped_pulse(p: DoubleDotParams, t_ramp: float, t_plateau: float,
                 n_ramp: int = 200) -> list[tuple[float, float, float]]:
    """Linear turn-on/off of the tunnel coupling around a constant plateau."""
    if t_ramp < 0 or t_plateau <= 0 or n_ramp < 1:
        raise ValueError("need t_ramp >= 0, t_plateau > 0, n_ramp >= 1")
    segs: list[tuple[float, float, float]] = []
    if t_ramp > 0:
        dt = t_ramp / n_ramp
        for k in range(n_ramp):
            frac = (k + 0.5) / n_ramp
            segs.append((p.t0 * frac, p.epsilon, dt))
    segs.append((p.t0, p.epsilon, t_plateau))
    if t_ramp > 0:
        dt = t_ramp / n_ramp
        for k in range(n_ramp):
            frac = 1.0 - (k + 0.5) / n_ramp
            segs.append((p.t0 * frac, p.epsilon, dt))
    return segs


def smooth_ramped_pulse(p: DoubleDotParams, t_ramp: float, t_plateau: float,
                        n_ramp: int = 200) -> list[tuple[float, float, float]]:
    """Raised-cosine turn-on/off of the tunnel coupling.

    The smooth edges excite the doubly occupied levels far less than a
    linear ramp of equal length, which matters when comparing against
    closed forms at infidelities near the hybridization floor.
    """
    if t_ramp < 0 or t_plateau <= 0 or n_ramp < 1:
        raise ValueError("need t_ramp >= 0, t_plateau > 0, n_ramp >= 1")
    segs: list[tuple[float, float, float]] = []
    if t_ramp > 0:
        dt = t_ramp / n_ramp
        for k in range(n_ramp):
            f = math.sin(math.pi / 2.0 * (k + 0.5) / n_ramp) ** 2
            segs.append((p.t0 * f, p.epsilon, dt))
    segs.append((p.t0, p.epsilon, t_plateau))
    if t_ramp > 0:
        dt = t_ramp / n_ramp
        for k in range(n_ramp):
            f = math.sin(math.pi / 2.0 * (1.0 - (k + 0.5) / n_ramp)) ** 2
            segs.append((p.t0 * f, p.epsilon, dt))
    return segs


def pulse_theta(p: DoubleDotParams,
                pulse: Sequence[tuple[float, float, float]]) -> float:
    """Exchange angle accumulated by a control pulse, int omega_op dt."""
    th = 0.0
    for t0_k, eps_k, dt_k in pulse:
        th += 4.0 * t0_k**2 * p.u / (p.u**2 - eps_k**2) * dt_k
    return th
