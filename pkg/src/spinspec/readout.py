"""Pauli spin-blockade read-out: spin-to-charge conversion and detection.

The double-dot Hamiltonian is extended with the lowest-energy triplet
states, spaced by the singlet-triplet splitting from the singlet level.
Spin-to-charge conversion is modeled as ideal adiabatic detuning into the
window between the singlet and triplet avoided crossings; charge detection
as matched-filter integration of a sensor current against a threshold.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import erf

from .noise import PowerSpectrum, UNIT_A2_PER_HZ
from .twoqubit import DoubleDotParams


@dataclass(frozen=True)
class ReadoutDotParams:
    base: DoubleDotParams
    e_st: float               # rad/s, singlet-triplet splitting

    def __post_init__(self):
        if self.e_st <= 0:
            raise ValueError("singlet-triplet splitting must be positive")
        if self.base.omega_0 > self.e_st / 10.0:
            warnings.warn(
                "charge-transfer curves assume omega_0 << E_ST; "
                f"omega_0 = {self.base.omega_0:.3g} rad/s is above E_ST/10",
                stacklevel=2,
            )


def hamiltonian8(p: ReadoutDotParams, epsilon: float | None = None) -> np.ndarray:
    """Basis [uu, ud, du, dd, (0,uu), (0,ud), (0,du), (0,dd)]."""
    b = p.base
    e = b.epsilon if epsilon is None else epsilon
    w0, dw0, t0, u, est = b.omega_0, b.delta_omega_0, b.t0, b.u, p.e_st
    st = math.sqrt(2.0) * t0
    h = np.zeros((8, 8), dtype=complex)
    h[0, 0] = -w0
    h[1, 1] = dw0 / 2.0
    h[2, 2] = -dw0 / 2.0
    h[3, 3] = w0
    h[4, 4] = u - e + est - w0
    h[5, 5] = u - e + est / 2.0
    h[6, 6] = u - e + est / 2.0
    h[7, 7] = u - e + est + w0
    for i in range(4):
        h[i, 4 + i] = h[4 + i, i] = st
    h[5, 6] = h[6, 5] = est / 2.0
    return h


class ChargeTransferResult(NamedTuple):
    p_charge: float
    p_transfer_given_down_down: float
    p_no_transfer_given_down_up: float
    epsilon_read: float


class ChargeTransferScan(NamedTuple):
    epsilons: np.ndarray
    p_transfer_dd: np.ndarray
    p_no_transfer_du: np.ndarray

    @property
    def error(self) -> np.ndarray:
        return self.p_transfer_dd + self.p_no_transfer_du


def _read_grid(eps_end: float, u: float, e_st: float, n_steps: int) -> np.ndarray:
    """Detuning grid from 0 to eps_end, geometrically refined toward the
    crossing region at the far end."""
    span = eps_end
    tail = np.geomspace(span, span * 1e-7, n_steps)
    grid = np.concatenate([[0.0], np.sort(span - tail), [span]])
    return np.unique(grid)


# spin projection is conserved: crossings between these sectors are true
# crossings, while every crossing inside a sector is avoided.  The ideal
# adiabatic branch therefore keeps its energy-ordered index within its
# sector, which tracks arbitrarily sharp anticrossings exactly (a
# step-by-step overlap match would tunnel through an anticrossing narrower
# than the grid spacing).
_SECTOR_SZ0 = (1, 2, 5, 6)      # ud, du, (0,ud), (0,du)
_SECTOR_DOWN = (3, 7)           # dd, (0,dd)


def _sector_branch(p: ReadoutDotParams, sector: tuple[int, ...],
                   start_index: int, epsilon: float) -> np.ndarray:
    h = hamiltonian8(p, epsilon)[np.ix_(sector, sector)]
    _, v = np.linalg.eigh(h)
    return v[:, start_index]


def charge_transfer_scan(p: ReadoutDotParams, epsilon_max: float,
                         n_steps: int = 2000) -> ChargeTransferScan:
    """Ideal-adiabatic error probabilities of the two measurement branches.

    The branches starting (at zero detuning) nearest to the blocked and the
    transferring spin state are followed by their energy order inside their
    spin-projection sector; their residual weight in the wrong charge
    sector at each grid detuning is the conversion error as if the sweep
    ended there.
    """
    b = p.base
    grid = _read_grid(epsilon_max, b.u, p.e_st, n_steps)[1:]

    # identify the starting branches at zero detuning
    h0 = hamiltonian8(p, 0.0)
    idx_du = _identify_branch(h0, _SECTOR_SZ0, basis_index=2)
    idx_dd = _identify_branch(h0, _SECTOR_DOWN, basis_index=3)

    charge_du = [i for i, j in enumerate(_SECTOR_SZ0) if j >= 4]
    charge_dd = [i for i, j in enumerate(_SECTOR_DOWN) if j >= 4]
    err_dd = np.empty(len(grid))
    err_du = np.empty(len(grid))
    for k, eps in enumerate(grid):
        v_du = _sector_branch(p, _SECTOR_SZ0, idx_du, eps)
        v_dd = _sector_branch(p, _SECTOR_DOWN, idx_dd, eps)
        err_du[k] = 1.0 - float(np.sum(np.abs(v_du[charge_du]) ** 2))
        err_dd[k] = float(np.sum(np.abs(v_dd[charge_dd]) ** 2))
    return ChargeTransferScan(np.asarray(grid), err_dd, err_du)


def _identify_branch(h8: np.ndarray, sector: tuple[int, ...],
                     basis_index: int) -> int:
    h = h8[np.ix_(sector, sector)]
    _, v = np.linalg.eigh(h)
    row = sector.index(basis_index)
    overlaps = np.abs(v[row, :]) ** 2
    best = int(np.argmax(overlaps))
    if overlaps[best] < 0.55:
        raise RuntimeError(
            "starting branch is ambiguous at zero detuning (overlap "
            f"{overlaps[best]:.3f}); a nonzero Larmor-frequency difference "
            "well above the residual exchange rate is required"
        )
    return best


def adiabatic_charge_transfer(p: ReadoutDotParams, epsilon_read: float,
                              n_steps: int = 2000) -> ChargeTransferResult:
    """Spin-to-charge conversion probability at a read-out detuning."""
    b = p.base
    if epsilon_read >= b.u + p.e_st:
        raise ValueError(
            "read-out detuning must stay below the triplet avoided crossing "
            "(epsilon < U + E_ST)"
        )
    scan = charge_transfer_scan(p, epsilon_read, n_steps)
    p_dd = float(scan.p_transfer_dd[-1])
    p_du = float(scan.p_no_transfer_du[-1])
    return ChargeTransferResult(1.0 - p_dd - p_du, p_dd, p_du, epsilon_read)


def optimal_read_detuning(p: ReadoutDotParams, n_steps: int = 3000,
                          window: tuple[float, float] = (0.1, 0.92)):
    """Locate the detuning minimizing the conversion error.

    Returns (epsilon_opt, min_error, scan); the window is in units of
    (epsilon - U) / E_ST.
    """
    b = p.base
    scan = charge_transfer_scan(p, b.u + window[1] * p.e_st, n_steps)
    x = (scan.epsilons - b.u) / p.e_st
    mask = (x >= window[0]) & (x <= window[1])
    err = scan.error[mask]
    eps = scan.epsilons[mask]
    k = int(np.argmin(err))
    return float(eps[k]), float(err[k]), scan


def charge_error_vs_splitting(p: ReadoutDotParams,
                              ratios: Sequence[float],
                              n_steps: int = 2000):
    """Minimum conversion error versus E_ST / t0 at the optimal detuning.

    The splitting is held fixed and the tunnel coupling swept; by the
    master-curve property the result depends only on the ratio.
    """
    rows = []
    for ratio in ratios:
        if ratio <= 0:
            raise ValueError("E_ST / t0 must be positive")
        t0 = p.e_st / ratio
        pr = ReadoutDotParams(
            DoubleDotParams(p.base.omega_0, p.base.delta_omega_0, t0,
                            p.base.u, p.base.epsilon), p.e_st)
        res = adiabatic_charge_transfer(pr, p.base.u + p.e_st / 2.0, n_steps)
        rows.append((float(ratio), 1.0 - res.p_charge))
    return rows


# ---------------------------------------------------------------------
# charge detection

@dataclass(frozen=True)
class DetectorChain:
    """Sensor step current, the noise spectra riding on it, and the
    integration time of the matched-filter detector."""

    i_s: float                        # A, sensor signal step
    s_sensor: PowerSpectrum           # A^2/Hz
    s_circuit: PowerSpectrum          # A^2/Hz
    t_read: float                     # s
    threshold: float | None = None    # A, defaults to i_s / 2

    def __post_init__(self):
        if self.i_s <= 0 or self.t_read <= 0:
            raise ValueError("signal current and read time must be positive")
        for s in (self.s_sensor, self.s_circuit):
            if s.unit != UNIT_A2_PER_HZ:
                raise ValueError("detector noise spectra must be tagged a2_per_hz")

    @property
    def s_total(self) -> PowerSpectrum:
        return self.s_sensor + self.s_circuit

    @property
    def enbw_hz(self) -> float:
        return 1.0 / (2.0 * self.t_read)


def snr(chain: DetectorChain, method: str = "white") -> float:
    """Power SNR of the integrated sensor current.

    ``white`` evaluates I_s^2 / (S_i * ENBW) with ENBW = 1 / (2 T_read);
    ``full`` integrates the noise PSD against the sinc^2 response of the
    boxcar integrator (signal (I_s T)^2 over the filtered noise variance).
    """
    s = chain.s_total
    if s.is_zero:
        return math.inf
    if method == "white":
        level = float(s.psd(chain.enbw_hz / 2.0))
        return chain.i_s**2 / (level * chain.enbw_hz)
    if method != "full":
        raise ValueError("method must be 'white' or 'full'")
    t = chain.t_read
    # boxcar response |H(f)|^2 = (sin(pi f T) / (pi f))^2, half-period 1/(2T)
    hi = 400.0 / t
    sup = s.max_support_hz
    if math.isfinite(sup):
        hi = min(hi, sup)
    from .noise import _gauss_panels, _integration_edges
    edges = _integration_edges(0.0, hi, 0.5 / t)
    nodes, weights = _gauss_panels(edges)
    with np.errstate(invalid="ignore", divide="ignore"):
        resp = np.where(nodes > 0,
                        (np.sin(math.pi * nodes * t) / (math.pi * nodes)) ** 2,
                        t**2)
    var = float(np.sum(weights * s.psd(nodes) * resp))
    if not math.isfinite(sup):
        # mean-sinc tail: <resp> ~ 1 / (2 pi^2 f^2)
        var += float(s.psd(hi)) / (2.0 * math.pi**2 * hi)
    return (chain.i_s * t) ** 2 / var


def p_detect(snr_value: float) -> float:
    """Probability of correct threshold discrimination under Gaussian noise."""
    if snr_value < 0:
        raise ValueError("SNR must be nonnegative")
    if math.isinf(snr_value):
        return 1.0
    return (1.0 + float(erf(math.sqrt(snr_value / 8.0)))) / 2.0


# ---------------------------------------------------------------------
# composition

@dataclass(frozen=True)
class ReadoutBudget:
    p_charge: float
    p_sense: float
    p_detect: float

    def __post_init__(self):
        for name in ("p_charge", "p_sense", "p_detect"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")


def readout_fidelity(budget: ReadoutBudget, mode: str = "approx") -> float:
    """Compose the conversion, sensing and discrimination probabilities.

    ``approx`` is the plain product; ``full`` also credits the case where
    a sensing error and a detection error cancel.
    """
    if mode == "approx":
        return budget.p_charge * budget.p_sense * budget.p_detect
    if mode == "full":
        return budget.p_charge * (
            budget.p_sense * budget.p_detect
            + (1.0 - budget.p_sense) * (1.0 - budget.p_detect)
        )
    raise ValueError("mode must be 'approx' or 'full'")
