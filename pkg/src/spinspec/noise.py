"""Noise spectra and spectral integrals.

Power spectral densities are stored one-sided in per-Hz units (the form in
which oscillator and detector noise is quoted); ``psd(f_hz)`` evaluates
them.  The rotating-frame infidelity integrals use the symmetric angular
convention internally, where total power sigma^2 = (1/pi) int_0^inf S(w) dw
and S(w) = psd(w / 2pi) / 2.  With one-sided storage, a band-pass filter
centered at the carrier admits both sidebands, which is what reconciles
the brick-wall shortcut with the quoted effective noise bandwidths.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable

import numpy as np
from numpy.polynomial.legendre import leggauss

UNIT_RADS2_PER_HZ = "rads2_per_hz"   # (rad/s)^2 / Hz, frequency noise
UNIT_V2_PER_HZ = "v2_per_hz"         # V^2 / Hz, voltage noise
UNIT_A2_PER_HZ = "a2_per_hz"         # A^2 / Hz, current noise
UNIT_RAD2_PER_HZ = "rad2_per_hz"     # rad^2 / Hz, phase noise

KNOWN_UNITS = (
    UNIT_RADS2_PER_HZ,
    UNIT_V2_PER_HZ,
    UNIT_A2_PER_HZ,
    UNIT_RAD2_PER_HZ,
)


class SpectrumDivergenceError(ValueError):
    """An integral over the spectrum does not converge as posed."""


@dataclass(frozen=True)
class _Component:
    kind: str                 # "white" | "power_law" | "tabulated"
    level: float = 0.0        # white level, or power-law level at f_ref
    f_ref: float = 1.0
    exponent: float = 0.0
    f_lo: float = 0.0
    f_hi: float = math.inf
    f_tab: tuple[float, ...] = ()
    s_tab: tuple[float, ...] = ()

    def psd(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        out = np.zeros_like(f)
        inside = (f >= self.f_lo) & (f <= self.f_hi)
        if self.kind == "white":
            out[inside] = self.level
        elif self.kind == "power_law":
            fok = inside & (f > 0)
            out[fok] = self.level * (f[fok] / self.f_ref) ** self.exponent
        else:
            ftab = np.asarray(self.f_tab)
            stab = np.asarray(self.s_tab)
            fok = inside & (f >= ftab[0]) & (f <= ftab[-1])
            # interpolate piecewise power laws (linear in log-log)
            out[fok] = np.exp(
                np.interp(np.log(f[fok]), np.log(ftab), np.log(np.maximum(stab, 1e-300)))
            )
        return out

    def band_power(self, f1: float, f2: float) -> float:
        f1 = max(f1, self.f_lo)
        f2 = min(f2, self.f_hi)
        if f2 <= f1:
            return 0.0
        if self.kind == "white":
            return self.level * (f2 - f1)
        if self.kind == "power_law":
            if f1 <= 0.0 and self.exponent <= -1.0:
                raise SpectrumDivergenceError(
                    "power-law spectrum diverges at f = 0; supply a positive lower limit"
                )
            a = self.exponent
            if f1 <= 0.0:
                f1 = 0.0
            if a == -1.0:
                return self.level * self.f_ref * math.log(f2 / f1)
            c = self.level / self.f_ref**a / (a + 1.0)
            return c * (f2 ** (a + 1.0) - (f1 ** (a + 1.0) if f1 > 0 else 0.0))
        # tabulated: exact integral of the log-log interpolant per segment
        ftab = np.asarray(self.f_tab)
        stab = np.asarray(self.s_tab)
        total = 0.0
        for i in range(len(ftab) - 1):
            a, b = ftab[i], ftab[i + 1]
            lo, hi = max(f1, a), min(f2, b)
            if hi <= lo or stab[i] <= 0 or stab[i + 1] <= 0:
                continue
            expo = math.log(stab[i + 1] / stab[i]) / math.log(b / a)
            c = stab[i] / a**expo
            if abs(expo + 1.0) < 1e-12:
                total += c * math.log(hi / lo)
            else:
                total += c / (expo + 1.0) * (hi ** (expo + 1.0) - lo ** (expo + 1.0))
        return total

    @property
    def diverges_at_dc(self) -> bool:
        return (self.kind == "power_law" and self.exponent <= -1.0
                and self.f_lo <= 0.0)

    @property
    def upper_limited(self) -> bool:
        if math.isfinite(self.f_hi):
            return True
        if self.kind == "tabulated":
            return True
        return self.kind == "power_law" and self.exponent < -1.0


@dataclass(frozen=True)
class PowerSpectrum:
    """One-sided noise PSD (f >= 0) built from white/power-law/tabulated parts."""

    components: tuple[_Component, ...]
    unit: str = UNIT_RADS2_PER_HZ

    def __post_init__(self):
        if self.unit not in KNOWN_UNITS:
            raise ValueError(f"unknown PSD unit tag {self.unit!r}; expected one of {KNOWN_UNITS}")

    # -- constructors -------------------------------------------------
    @staticmethod
    def white(level: float, unit: str = UNIT_RADS2_PER_HZ,
              f_lo: float = 0.0, f_hi: float = math.inf) -> "PowerSpectrum":
        if level < 0:
            raise ValueError("PSD level must be nonnegative")
        return PowerSpectrum((_Component("white", level, f_lo=f_lo, f_hi=f_hi),), unit)

    @staticmethod
    def power_law(level: float, f_ref: float, exponent: float,
                  unit: str = UNIT_RADS2_PER_HZ, f_lo: float = 0.0,
                  f_hi: float = math.inf) -> "PowerSpectrum":
        if level < 0 or f_ref <= 0:
            raise ValueError("need level >= 0 and f_ref > 0")
        return PowerSpectrum(
            (_Component("power_law", level, f_ref, exponent, f_lo, f_hi),), unit)

    @staticmethod
    def flicker(level: float, f_ref: float, unit: str = UNIT_RADS2_PER_HZ,
                f_lo: float = 0.0, f_hi: float = math.inf) -> "PowerSpectrum":
        return PowerSpectrum.power_law(level, f_ref, -1.0, unit, f_lo, f_hi)

    @staticmethod
    def tabulated(f_hz: Iterable[float], values: Iterable[float],
                  unit: str = UNIT_RADS2_PER_HZ) -> "PowerSpectrum":
        f = tuple(float(x) for x in f_hz)
        s = tuple(float(x) for x in values)
        if len(f) != len(s) or len(f) < 2:
            raise ValueError("tabulated spectrum needs >= 2 matching points")
        if any(b <= a for a, b in zip(f, f[1:])):
            raise ValueError("tabulated frequencies must be strictly increasing")
        if f[0] <= 0:
            raise ValueError("tabulated frequencies must be positive")
        if any(v < 0 for v in s):
            raise ValueError("tabulated PSD values must be nonnegative")
        return PowerSpectrum((_Component("tabulated", f_tab=f, s_tab=s),), unit)

    @staticmethod
    def zero(unit: str = UNIT_RADS2_PER_HZ) -> "PowerSpectrum":
        return PowerSpectrum.white(0.0, unit)

    # -- algebra -------------------------------------------------------
    def __add__(self, other: "PowerSpectrum") -> "PowerSpectrum":
        if self.unit != other.unit:
            raise ValueError(f"cannot add spectra with units {self.unit} and {other.unit}")
        return PowerSpectrum(self.components + other.components, self.unit)

    def scaled(self, factor: float, unit: str | None = None) -> "PowerSpectrum":
        """Multiply PSD values by ``factor`` (e.g. a squared transduction gain)."""
        comps = []
        for c in self.components:
            comps.append(replace(c, level=c.level * factor,
                                 s_tab=tuple(v * factor for v in c.s_tab)))
        return PowerSpectrum(tuple(comps), unit or self.unit)

    # -- evaluation ----------------------------------------------------
    def psd(self, f_hz) -> np.ndarray:
        """One-sided PSD at frequency f (Hz), in the tagged unit per Hz."""
        scalar = np.isscalar(f_hz) or np.ndim(f_hz) == 0
        f = np.atleast_1d(np.asarray(f_hz, dtype=float))
        out = np.zeros_like(f)
        for c in self.components:
            out = out + c.psd(f)
        return out[0] if scalar else out

    def band_power(self, f1_hz: float, f2_hz: float) -> float:
        """Integrated power between two frequencies (Hz)."""
        if f2_hz < f1_hz:
            raise ValueError("band limits must satisfy f1 <= f2")
        if math.isinf(f2_hz) and not all(c.upper_limited for c in self.components):
            raise SpectrumDivergenceError(
                "spectrum has unbounded support; supply a finite upper band limit"
            )
        return sum(c.band_power(f1_hz, f2_hz) for c in self.components)

    def rms(self, f1_hz: float, f2_hz: float) -> float:
        return math.sqrt(self.band_power(f1_hz, f2_hz))

    @property
    def diverges_at_dc(self) -> bool:
        return any(c.diverges_at_dc for c in self.components)

    @property
    def is_zero(self) -> bool:
        return all(c.kind == "white" and c.level == 0.0 for c in self.components)

    @property
    def max_support_hz(self) -> float:
        sup = 0.0
        for c in self.components:
            if c.kind == "tabulated":
                sup = max(sup, c.f_tab[-1])
            elif math.isfinite(c.f_hi):
                sup = max(sup, c.f_hi)
            else:
                return math.inf
        return sup


# ---------------------------------------------------------------------
# unit helpers

def dbc_to_linear(dbc: float) -> float:
    """dBc -> amplitude ratio relative to the carrier."""
    return 10.0 ** (dbc / 20.0)


def linear_to_dbc(ratio: float) -> float:
    if ratio <= 0:
        raise ValueError("amplitude ratio must be positive")
    return 20.0 * math.log10(ratio)


def dbchz_to_phase_psd(l_dbchz: float) -> float:
    """Single-sideband phase noise L(f) in dBc/Hz -> S_phi in rad^2/Hz."""
    return 2.0 * 10.0 ** (l_dbchz / 10.0)


def phase_psd_to_dbchz(s_phi: float) -> float:
    if s_phi <= 0:
        raise ValueError("phase PSD must be positive")
    return 10.0 * math.log10(s_phi / 2.0)


def rms_in_enbw(psd_level: float, enbw_hz: float) -> float:
    """sigma = sqrt(S * ENBW) for a white PSD admitted by a brick-wall filter."""
    if psd_level < 0 or enbw_hz < 0:
        raise ValueError("PSD level and ENBW must be nonnegative")
    return math.sqrt(psd_level * enbw_hz)


def phase_to_frequency_noise(s_phi: float, offset_radps: float) -> float:
    """S_omega = (Delta omega)^2 * S_phi at a carrier offset (rad/s)."""
    if offset_radps <= 0:
        raise ValueError("carrier offset must be positive")
    return offset_radps**2 * s_phi


def frequency_noise_spectrum(s_phi: PowerSpectrum) -> PowerSpectrum:
    """Convert a phase-noise spectrum (rad^2/Hz) to frequency noise ((rad/s)^2/Hz).

    Multiplies each component by (2 pi f)^2, shifting power-law exponents up
    by two.
    """
    if s_phi.unit != UNIT_RAD2_PER_HZ:
        raise ValueError("expected a phase-noise spectrum tagged rad2_per_hz")
    comps = []
    for c in s_phi.components:
        w2 = (2.0 * math.pi) ** 2
        if c.kind == "white":
            comps.append(_Component("power_law", c.level * w2, 1.0, 2.0,
                                    c.f_lo, c.f_hi))
        elif c.kind == "power_law":
            comps.append(_Component("power_law", c.level * w2 * c.f_ref**2,
                                    c.f_ref, c.exponent + 2.0, c.f_lo, c.f_hi))
        else:
            f = np.asarray(c.f_tab)
            s = np.asarray(c.s_tab) * (2.0 * math.pi * f) ** 2
            comps.append(_Component("tabulated", f_tab=tuple(f), s_tab=tuple(s)))
    return PowerSpectrum(tuple(comps), UNIT_RADS2_PER_HZ)


# ---------------------------------------------------------------------
# filter responses and infidelity integrals

@dataclass(frozen=True)
class FilterResponse:
    """Amplitude response |H(w)|^2 with its brick-wall summary.

    ``lp2`` is the symmetric low-pass prototype evaluated at the offset from
    ``center`` (rad/s).  ``dc_gain`` and ``enbw`` describe the equivalent
    brick wall; a band-pass response (center > 0) admits both sidebands.
    ``tail_coeff`` is the large-offset mean of nu^2 * lp2(nu), used to close
    the quadrature beyond its truncation point.
    """

    lp2: Callable[[np.ndarray], np.ndarray]
    dc_gain: float
    enbw: float
    center: float = 0.0
    osc_period: float | None = None
    tail_coeff: float = 0.0
    expects_unit: str | None = None

    def h2(self, omega: np.ndarray) -> np.ndarray:
        """Response at absolute angular frequency omega."""
        return self.lp2(np.asarray(omega, dtype=float) - self.center)


def _gauss_panels(edges: np.ndarray, npts: int = 12):
    x, w = leggauss(npts)
    a = edges[:-1]
    b = edges[1:]
    mid = 0.5 * (a + b)[:, None]
    half = 0.5 * (b - a)[:, None]
    nodes = (mid + half * x[None, :]).ravel()
    weights = (half * w[None, :]).ravel()
    return nodes, weights


def _integration_edges(lo: float, hi: float, osc: float, n_cap: int = 6000) -> np.ndarray:
    """Panel edges: log-spaced up to the first oscillation, then half-period."""
    edges = [lo]
    first = min(hi, max(lo * 1.0000001, osc))
    if lo < first:
        if lo <= 0:
            edges.extend(np.linspace(lo, min(first, hi), 24)[1:])
        else:
            edges.extend(np.geomspace(lo, min(first, hi), 24)[1:])
    start = edges[-1]
    if start < hi:
        n = int(math.ceil((hi - start) / (osc / 2.0)))
        n = min(n, n_cap)
        edges.extend(np.linspace(start, hi, n + 1)[1:])
    return np.asarray(edges)


def filtered_infidelity(spectrum: PowerSpectrum, filt: FilterResponse,
                        omega_r: float, omega_min: float = 0.0,
                        method: str = "quadrature") -> float:
    """(1/pi) int_{w_min}^inf S(w) / w_R^2 * |H(w)|^2 dw.

    ``method`` selects adaptive quadrature of the exact response or the
    brick-wall shortcut (dc_gain times the admitted noise power; both
    sidebands for band-pass responses).
    """
    if omega_min < 0:
        raise ValueError("omega_min must be nonnegative")
    if filt.expects_unit is not None and spectrum.unit != filt.expects_unit:
        raise ValueError(
            f"spectrum unit {spectrum.unit} does not match filter expectation "
            f"{filt.expects_unit}"
        )
    if spectrum.is_zero:
        return 0.0
    if filt.center == 0.0 and omega_min == 0.0 and spectrum.diverges_at_dc:
        raise SpectrumDivergenceError(
            "spectrum diverges at DC; supply a positive omega_min"
        )

    if method == "brickwall":
        if filt.center == 0.0:
            f1 = omega_min / (2.0 * math.pi)
            f2 = (filt.enbw) / (2.0 * math.pi)
            power = spectrum.band_power(f1, min(f2, spectrum.max_support_hz)) \
                if f2 > f1 else 0.0
        else:
            a = max(filt.center - filt.enbw, omega_min)
            b = filt.center + filt.enbw
            power = spectrum.band_power(a / (2 * math.pi),
                                        min(b / (2 * math.pi), spectrum.max_support_hz))
        return filt.dc_gain * power / omega_r**2

    if method != "quadrature":
        raise ValueError("method must be 'quadrature' or 'brickwall'")

    osc = filt.osc_period if filt.osc_period else filt.enbw
    span = 400.0 * max(filt.enbw, osc)
    hi = filt.center + span
    sup = spectrum.max_support_hz * 2.0 * math.pi
    hi = min(hi, sup) if math.isfinite(sup) else hi
    lo = omega_min
    if lo >= hi:
        return 0.0
    edges = _integration_edges(lo, hi, osc)
    nodes, weights = _gauss_panels(edges)
    s_ang = spectrum.psd(nodes / (2.0 * math.pi)) / 2.0
    integral = float(np.sum(weights * s_ang * filt.lp2(nodes - filt.center)))
    # mean-response tail beyond the truncation point
    if filt.tail_coeff and (not math.isfinite(sup) or sup > hi):
        s_tail = float(spectrum.psd(hi / (2.0 * math.pi))) / 2.0
        integral += filt.tail_coeff * s_tail / (hi - filt.center)
    return integral / (math.pi * omega_r**2)


def jitter_sigma(s_phi: PowerSpectrum, t: float, f_min: float = 0.0) -> float:
    """Period jitter sigma_T = (T/pi) sqrt(int S_phi(f) sin^2(2 pi f T) df)."""
    if t <= 0:
        raise ValueError("period must be positive")
    if s_phi.unit != UNIT_RAD2_PER_HZ:
        raise ValueError("jitter integral expects a phase-noise spectrum (rad2_per_hz)")
    if s_phi.is_zero:
        return 0.0
    if not all(c.upper_limited for c in s_phi.components):
        raise SpectrumDivergenceError(
            "phase-noise spectrum has unbounded flat support; "
            "band-limit it for the jitter integral"
        )
    if f_min == 0.0 and any(c.kind == "power_law" and c.exponent <= -3.0
                            and c.f_lo <= 0.0 for c in s_phi.components):
        # sin^2 ~ f^2 tames up to f^-3; steeper needs a positive f_min
        raise SpectrumDivergenceError(
            "phase-noise spectrum too steep at DC; supply a positive f_min"
        )
    sup = s_phi.max_support_hz
    hi = sup if math.isfinite(sup) else 0.0
    for c in s_phi.components:
        if not math.isfinite(c.f_hi) and c.kind == "power_law":
            # integrable tail: truncate where the remainder is negligible
            f_at = max(c.f_ref, 1.0 / t)
            hi = max(hi, f_at * 1e4)
        if c.kind == "tabulated":
            hi = max(hi, c.f_tab[-1])
    osc = 0.5 / t
    edges = _integration_edges(f_min, hi, osc)
    nodes, weights = _gauss_panels(edges)
    vals = s_phi.psd(nodes) * np.sin(2.0 * math.pi * nodes * t) ** 2
    integral = float(np.sum(weights * vals))
    return t / math.pi * math.sqrt(max(integral, 0.0))


# ---------------------------------------------------------------------
# tabulated-spectrum file interface

def read_psd_csv(path) -> PowerSpectrum:
    """Load a tabulated PSD from a two-column CSV.

    The header must be exactly ``f_hz,psd_<unit>`` where ``<unit>`` is one
    of ``rads2_per_hz``, ``v2_per_hz``, ``a2_per_hz``, ``rad2_per_hz``.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or len(rows[0]) != 2 or rows[0][0] != "f_hz" \
            or not rows[0][1].startswith("psd_"):
        raise ValueError("PSD CSV must start with header 'f_hz,psd_<unit>'")
    unit = rows[0][1][len("psd_"):]
    if unit not in KNOWN_UNITS:
        raise ValueError(f"unknown PSD unit tag {unit!r} in header")
    f = [float(r[0]) for r in rows[1:]]
    s = [float(r[1]) for r in rows[1:]]
    return PowerSpectrum.tabulated(f, s, unit)
