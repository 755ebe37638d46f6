"""Optional figure rendering for CLI reports.

Each renderer takes the same (columns, rows) table the report writers see
and draws a summary figure next to the delimited output.  The data files
remain the authoritative product; figures are a convenience view.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _col(columns, rows, name):
    idx = columns.index(name)
    return np.array([row[idx] for row in rows], dtype=float)


def _series(columns, rows, key_col):
    keys = sorted({row[columns.index(key_col)] for row in rows})
    for key in keys:
        sub = [row for row in rows if row[columns.index(key_col)] == key]
        yield key, sub


def render_figure(command: str, mode: str | None, columns: list[str],
                  rows: list[list], path: str) -> bool:
    """Render the standard figure for a command; returns False when the
    command has no figure representation."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    try:
        if command == "filters":
            for theta, sub in _series(columns, rows, "theta_rad"):
                x = _col(columns, sub, "omega_over_omega_r")
                for name, style in (("h2_amplitude", "-"),
                                    ("h2_frequency", "--"),
                                    ("h2_additive", ":")):
                    ax.loglog(x, _col(columns, sub, name), style,
                              label=f"{name} (theta={theta:.3g})")
            ax.set_xlabel("offset frequency / Rabi frequency")
            ax.set_ylabel("|H|^2")
        elif command == "rwa-sweep":
            for theta, sub in _series(columns, rows, "theta_rad"):
                ax.loglog(_col(columns, sub, "ratio"),
                          _col(columns, sub, "infidelity"),
                          "o-", label=f"theta={theta:.3g}")
            ax.set_xlabel("Larmor / Rabi frequency ratio")
            ax.set_ylabel("1 - F vs rotating-frame ideal")
        elif command == "fdma":
            x = _col(columns, rows, "alpha")
            ax.loglog(x, _col(columns, rows, "infidelity_raw"), label="raw")
            ax.loglog(x, _col(columns, rows, "infidelity_z_corrected"),
                      label="Z-corrected")
            ax.loglog(x, _col(columns, rows, "infidelity_bound"), "--",
                      label="bound")
            ax.set_xlabel("frequency spacing / Rabi frequency")
            ax.set_ylabel("identity infidelity of the unaddressed qubit")
        elif command == "two-qubit" and mode == "omega_op_map":
            t0 = _col(columns, rows, "t0_hz")
            eps = _col(columns, rows, "epsilon_over_u")
            w = _col(columns, rows, "omega_op_hz")
            t0u = np.unique(t0)
            epsu = np.unique(eps)
            grid = w.reshape(len(t0u), len(epsu))
            pc = ax.pcolormesh(epsu, t0u, np.log10(grid), shading="nearest")
            fig.colorbar(pc, ax=ax, label="log10 exchange rate (Hz)")
            ax.set_xlabel("detuning / charging energy")
            ax.set_ylabel("tunnel coupling (Hz)")
        elif command == "readout" and mode == "charge_scan":
            ax.semilogy(_col(columns, rows, "epsilon_rel"),
                        _col(columns, rows, "error_normalized"))
            ax.set_xlabel("(detuning - U) / E_ST")
            ax.set_ylabel("conversion error / minimum")
        elif command == "readout" and mode == "splitting_scan":
            ax.loglog(_col(columns, rows, "e_st_over_t0"),
                      _col(columns, rows, "error"), "o-")
            ax.set_xlabel("E_ST / t0 at the read point")
            ax.set_ylabel("1 - P_charge")
        elif command == "derive":
            idx = columns.index("infidelity_operation")
            labels, values = [], []
            for row in rows:
                if row[idx] is not None:
                    labels.append(f"{row[0]}: {row[1]}")
                    values.append(row[idx])
            if not values:
                return False
            ax.barh(range(len(values)), values)
            ax.set_yticks(range(len(values)), labels, fontsize=7)
            ax.set_xlabel("infidelity contribution")
        else:
            return False
        if ax.get_legend_handles_labels()[0]:
            ax.legend(fontsize=7)
        ax.grid(True, which="both", alpha=0.3)
        fig.tight_layout()
        fig.savefig(path, dpi=150)
        return True
    finally:
        plt.close(fig)
