"""Fidelity modeling for spin-qubit control electronics.

Forward direction: given imperfections of the classical control chain
(static inaccuracies, quasi-static noise, wideband noise spectra), compute
the process fidelity of single-qubit rotations, two-qubit exchange gates,
idle periods and spin read-out, both from closed forms and from brute-force
propagation of the relevant small Hamiltonians.

Inverse direction: given an infidelity budget, derive the maximum tolerable
electronics errors (frequency accuracy, phase noise, amplitude noise,
timing jitter, detuning accuracy, detector noise) and emit them as
specification tables.
"""

__version__ = "0.1.0"

from . import budget, noise, onequbit, qcore, readout, twoqubit

__all__ = [
    "__version__",
    "budget",
    "noise",
    "onequbit",
    "qcore",
    "readout",
    "twoqubit",
]
