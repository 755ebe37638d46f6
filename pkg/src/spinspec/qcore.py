"""Dense complex linear algebra and fidelity metrics.

Everything downstream is validated against this module: Hermitian matrix
exponentials, piecewise-constant time propagation, process/average fidelity
and Pauli decompositions. All generators are angular frequencies (rad/s,
hbar = 1); all durations are seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

HERMITICITY_TOL = 1e-12
UNITARITY_TOL = 1e-10

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)


class DimensionError(ValueError):
    """Operands have incompatible Hilbert-space dimensions."""


def hermiticity_defect(a: np.ndarray) -> float:
    """max|A - A^dag| relative to max|A| (0 for the zero matrix)."""
    scale = np.abs(a).max()
    if scale == 0.0:
        return 0.0
    return float(np.abs(a - a.conj().T).max() / scale)


def unitarity_defect(u: np.ndarray) -> float:
    """max|U^dag U - I|."""
    n = u.shape[0]
    return float(np.abs(u.conj().T @ u - np.eye(n)).max())


def require_hermitian(h: np.ndarray, tol: float = HERMITICITY_TOL) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {h.shape}")
    defect = hermiticity_defect(h)
    if defect > tol:
        raise ValueError(
            f"matrix is not Hermitian: max asymmetry {defect:.3e} exceeds {tol:.1e}"
        )
    return h


def require_unitary(u: np.ndarray, tol: float = UNITARITY_TOL) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    defect = unitarity_defect(u)
    if defect > tol:
        raise ValueError(f"matrix is not unitary: max defect {defect:.3e}")
    return u


def _matexp2(h: np.ndarray, t: float) -> np.ndarray:
    # closed form for 2x2 Hermitian generators: H = mu*I + n.sigma
    mu = 0.5 * (h[0, 0].real + h[1, 1].real)
    nz = 0.5 * (h[0, 0].real - h[1, 1].real)
    nx = h[0, 1].real
    ny = -h[0, 1].imag
    r = math.sqrt(nx * nx + ny * ny + nz * nz)
    phase = np.exp(-1j * mu * t)
    if r == 0.0:
        return phase * IDENTITY_2
    c = math.cos(r * t)
    s = math.sin(r * t) / r
    u = np.array(
        [
            [c - 1j * s * nz, -1j * s * (nx - 1j * ny)],
            [-1j * s * (nx + 1j * ny), c + 1j * s * nz],
        ],
        dtype=complex,
    )
    return phase * u


def matexp_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i H t) for Hermitian H, via eigendecomposition.

    The spectral route stays phase-accurate for degenerate spectra (e.g.
    a symmetric double dot at zero detuning), unlike scaling-and-squaring.
    """
    h = require_hermitian(h)
    if not math.isfinite(t):
        raise ValueError("duration must be finite")
    if h.shape[0] == 2:
        return _matexp2(h, t)
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


@dataclass(frozen=True)
class PiecewiseSchedule:
    """Ordered piecewise-constant generator schedule.

    Each segment is (generator in rad/s, duration in s).  ``step_hint``
    bounds the discretization used when a time-varying Hamiltonian is
    sampled into segments (see :func:`sample_schedule`); constant segments
    are propagated exactly regardless of it.
    """

    segments: tuple[tuple[np.ndarray, float], ...]
    step_hint: float | None = None

    def __post_init__(self):
        if not self.segments:
            raise ValueError("schedule must contain at least one segment")
        dim = self.segments[0][0].shape[0]
        for h, dt in self.segments:
            if h.shape != (dim, dim):
                raise DimensionError(
                    f"segment generator shape {h.shape} does not match ({dim}, {dim})"
                )
            if not dt > 0:
                raise ValueError("segment durations must be positive")

    @property
    def dim(self) -> int:
        return self.segments[0][0].shape[0]

    @property
    def duration(self) -> float:
        return sum(dt for _, dt in self.segments)


def schedule(segments: Sequence[tuple[np.ndarray, float]],
             step_hint: float | None = None) -> PiecewiseSchedule:
    return PiecewiseSchedule(
        tuple((np.asarray(h, dtype=complex), float(dt)) for h, dt in segments),
        step_hint,
    )


def sample_schedule(h_of_t: Callable[[float], np.ndarray], duration: float,
                    step_hint: float) -> PiecewiseSchedule:
    """Discretize a time-varying Hamiltonian into midpoint-sampled segments."""
    if not duration > 0:
        raise ValueError("duration must be positive")
    n = max(1, int(math.ceil(duration / step_hint)))
    dt = duration / n
    segs = [(np.asarray(h_of_t((k + 0.5) * dt), dtype=complex), dt) for k in range(n)]
    return PiecewiseSchedule(tuple(segs), step_hint)


def propagate(sched: PiecewiseSchedule) -> np.ndarray:
    """Time-ordered product of the segment propagators.

    The last segment is applied leftmost: U = U_N ... U_2 U_1.
    """
    u = None
    prev = None
    for h, dt in sched.segments:
        if prev is not None and prev[1] == dt and prev[0] is h:
            seg = prev[2]
        else:
            seg = matexp_hermitian(h, dt)
            prev = (h, dt, seg)
        u = seg if u is None else seg @ u
    return u


def unitary_product(unitaries: np.ndarray) -> np.ndarray:
    """Ordered product U[-1] @ ... @ U[0] of a stack shaped (N, d, d).

    Pairwise tree reduction: same operator as the sequential product but
    O(log N) passes of batched matmul.
    """
    m = np.asarray(unitaries)
    if m.ndim != 3:
        raise DimensionError("expected a stack of matrices shaped (N, d, d)")
    while m.shape[0] > 1:
        n2 = m.shape[0] // 2
        head = np.matmul(m[1:2 * n2:2], m[0:2 * n2:2])
        m = head if m.shape[0] % 2 == 0 else np.concatenate([head, m[-1:]])
    return m[0]


def expm_batch_2x2(hams: np.ndarray, dt: float) -> np.ndarray:
    """Vectorized exp(-i H dt) for a stack of 2x2 Hermitian generators."""
    mu = 0.5 * (hams[:, 0, 0].real + hams[:, 1, 1].real)
    nz = 0.5 * (hams[:, 0, 0].real - hams[:, 1, 1].real)
    nx = hams[:, 0, 1].real
    ny = -hams[:, 0, 1].imag
    r = np.sqrt(nx * nx + ny * ny + nz * nz)
    c = np.cos(r * dt)
    s = np.empty_like(r)
    small = r == 0.0
    s[~small] = np.sin(r[~small] * dt) / r[~small]
    s[small] = dt
    u = np.empty(hams.shape, dtype=complex)
    u[:, 0, 0] = c - 1j * s * nz
    u[:, 1, 1] = c + 1j * s * nz
    u[:, 0, 1] = -1j * s * (nx - 1j * ny)
    u[:, 1, 0] = -1j * s * (nx + 1j * ny)
    return u * np.exp(-1j * mu * dt)[:, None, None]


def process_fidelity(u_ideal: np.ndarray, u_real: np.ndarray) -> float:
    """|Tr(U_ideal^dag U_real)|^2 / n^2, insensitive to global phase."""
    u_ideal = np.asarray(u_ideal)
    u_real = np.asarray(u_real)
    if u_ideal.shape != u_real.shape:
        raise DimensionError(
            f"dimension mismatch: {u_ideal.shape} vs {u_real.shape}"
        )
    n = u_ideal.shape[0]
    tr = np.trace(u_ideal.conj().T @ u_real)
    return float(abs(tr) ** 2 / n**2)


def average_fidelity(process_fid: float, n: int) -> float:
    """Average gate fidelity (1 + n F) / (n + 1) from the process fidelity."""
    if not 0.0 <= process_fid <= 1.0 + 1e-12:
        raise ValueError("process fidelity must lie in [0, 1]")
    if n < 2:
        raise ValueError("Hilbert-space dimension must be at least 2")
    return (1.0 + n * process_fid) / (n + 1.0)


class PauliDecomposition(NamedTuple):
    """Coefficients of U = x X + y Y + z Z + i I for a 2x2 operator."""

    x: complex
    y: complex
    z: complex
    i: complex

    @property
    def weights(self) -> tuple[float, float, float, float]:
        return (abs(self.x) ** 2, abs(self.y) ** 2, abs(self.z) ** 2,
                abs(self.i) ** 2)


def pauli_decompose(u: np.ndarray) -> PauliDecomposition:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise DimensionError("Pauli decomposition is defined for 2x2 operators")
    return PauliDecomposition(
        x=complex(np.trace(SIGMA_X @ u)) / 2.0,
        y=complex(np.trace(SIGMA_Y @ u)) / 2.0,
        z=complex(np.trace(SIGMA_Z @ u)) / 2.0,
        i=complex(np.trace(u)) / 2.0,
    )


def gaussian_expectation(order: int, c: float, sigma: float) -> float:
    """Expected fidelity of F(x) = 1 - c x^order under zero-mean Gaussian x.

    Second order gives 1 - c sigma^2, fourth order 1 - 3 c sigma^4.
    """
    if c < 0 or sigma < 0:
        raise ValueError("curvature and standard deviation must be nonnegative")
    if order == 2:
        return 1.0 - c * sigma**2
    if order == 4:
        return 1.0 - 3.0 * c * sigma**4
    raise ValueError(f"unsupported order {order}; expected 2 or 4")
