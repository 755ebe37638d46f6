"""Command-line front end.

Usage: ``spinspec <command> --config <path> [--out <path>] [--format csv|json]
[--seed N] [--workers N] [--plot]``.  The config file is a flat JSON
document whose keys carry unit suffixes (``_hz``, ``_rad``, ``_s``, ``_v``,
``_a``, ``_ev``); unknown keys are rejected.  Reports are byte-identical
for a fixed (config, seed, version).  Exit codes: 0 success, 2 config
validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import budget, onequbit, readout, report, twoqubit
from .budget import ConversionContext, InversionError, convert
from .noise import SpectrumDivergenceError, read_psd_csv
from .twoqubit import DoubleDotParams


class ConfigError(ValueError):
    """The run configuration is malformed."""


TWO_PI = 2.0 * math.pi

# key -> (type, required, default); "number" accepts int/float,
# "list" a JSON array of numbers, "str" a string, "pairs" an array of
# [string, number] pairs.
SCHEMAS: dict[str, dict[str, tuple[str, bool, object]]] = {
    "single-gate": {
        "theta_rad": ("number", True, None),
        "f_rabi_hz": ("number", True, None),
        "delta_f_hz": ("number", False, 0.0),
        "delta_phi_rad": ("number", False, 0.0),
        "amplitude_rel_error": ("number", False, 0.0),
        "duration_rel_error": ("number", False, 0.0),
        "sigma_f_hz_rms": ("number", False, 0.0),
        "sigma_phase_rad_rms": ("number", False, 0.0),
        "sigma_amplitude_rel_rms": ("number", False, 0.0),
        "sigma_duration_rel_rms": ("number", False, 0.0),
    },
    "filters": {
        "thetas_rad": ("list", True, None),
        "f_rabi_hz": ("number", True, None),
        "ratio_min": ("number", False, 1e-2),
        "ratio_max": ("number", False, 1e2),
        "n_points": ("number", False, 200),
    },
    "rwa-sweep": {
        "ratios": ("list", True, None),
        "thetas_rad": ("list", False, [math.pi]),
        "f_rabi_hz": ("number", False, 1e6),
        "samples_per_cycle": ("number", False, 10.0),
    },
    "fdma": {
        "alphas": ("list", True, None),
        "beta": ("number", False, 1.0),
        "theta_rad": ("number", False, math.pi),
        "envelope": ("str", False, "rectangular"),
    },
    "two-qubit": {
        "mode": ("str", True, None),
        "u_v": ("number", False, 0.083),
        "t0_hz": ("number", False, 0.71e9),
        "t0_hz_list": ("list", False, None),
        "epsilon_over_u": ("number", False, 0.0),
        "epsilon_over_u_list": ("list", False, None),
        "delta_f_larmor_hz": ("number", False, 0.0),
        "f_larmor_hz": ("number", False, 1e10),
        "gate": ("str", False, "cphase"),
        "regime": ("str", False, twoqubit.REGIME_DW0_EQ_SQRT2_T0),
        "theta_rad": ("number", False, math.pi),
        "error_kind": ("str", False, twoqubit.ERROR_DURATION),
        "rel_errors": ("list", False, [0.01]),
        "f_omega_op_off_hz_list": ("list", False, [78e6]),
        "t_nop_s": ("number", False, 500e-9),
        "lever_arm_ev_per_v": ("number", False, 0.05),
    },
    "readout": {
        "mode": ("str", True, None),
        "u_v": ("number", False, 0.0827),
        "e_st_ev": ("number", False, 50e-6),
        "t0_hz": ("number", False, 39e6),
        "f_larmor_hz": ("number", False, None),
        "delta_f_larmor_hz": ("number", False, None),
        "n_steps": ("number", False, 2500),
        "x_max": ("number", False, 0.92),
        "ratios": ("list", False, None),
        "i_s_a": ("number", False, 400e-12),
        "sensor_noise_a_rthz": ("number", False, 57e-15),
        "circuit_noise_a_rthz": ("number", False, 28e-15),
        "sensor_psd_csv": ("str", False, None),
        "circuit_psd_csv": ("str", False, None),
        "t_read_s": ("number", False, 0.6e-6),
        "snr_method": ("str", False, "white"),
        "p_charge": ("number", False, 0.99967),
        "p_sense": ("number", False, 0.99967),
        "p_detect": ("number", False, 0.99967),
        "compose_mode": ("str", False, "approx"),
        "lever_arm_ev_per_v": ("number", False, 0.05),
    },
    "derive": {
        "name": ("str", True, None),
        "lever_arm_ev_per_v": ("number", False, 0.05),
        "drive_v_per_mhz": ("number", False, 2e-3),
        "items": ("pairs", False, None),
        # context / override keys shared by the case studies; validated
        # against the selected table's defaults at run time
        "f_rabi_hz": ("number", False, None),
        "f_larmor_hz": ("number", False, None),
        "f_spacing_hz": ("number", False, None),
        "theta_rad": ("number", False, None),
        "t_nop_s": ("number", False, None),
        "budget_op": ("number", False, None),
        "budget_idle": ("number", False, None),
        "sigma_nuclear_hz_rms": ("number", False, None),
        "t2_star_s": ("number", False, None),
        "drive_amplitude_v": ("number", False, None),
        "rwa_samples_per_cycle": ("number", False, None),
        "u_v": ("number", False, None),
        "t0_hz": ("number", False, None),
        "f_inaccuracy_hz": ("number", False, None),
        "enbw_over_omega_op": ("number", False, None),
        "f_omega_op_target_hz": ("number", False, None),
        "e_st_ev": ("number", False, None),
        "f_target": ("number", False, None),
        "i_s_a": ("number", False, None),
        "sensor_noise_a_rthz": ("number", False, None),
        "circuit_noise_ratio": ("number", False, None),
        "enbw_detuning_hz": ("number", False, None),
        "scan_steps": ("number", False, None),
    },
}


def validate_config(command: str, raw: dict) -> dict:
    schema = SCHEMAS[command]
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: {unknown}")
    cfg = {}
    for key, (kind, required, default) in schema.items():
        if key not in raw:
            if required:
                raise ConfigError(f"missing required config key {key!r}")
            cfg[key] = default
            continue
        v = raw[key]
        if kind == "number":
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise ConfigError(f"config key {key!r} must be a number")
            cfg[key] = float(v)
        elif kind == "list":
            if (not isinstance(v, list) or not v
                    or not all(isinstance(x, (int, float)) and not isinstance(x, bool)
                               for x in v)):
                raise ConfigError(f"config key {key!r} must be a non-empty numeric array")
            cfg[key] = [float(x) for x in v]
        elif kind == "str":
            if not isinstance(v, str):
                raise ConfigError(f"config key {key!r} must be a string")
            cfg[key] = v
        elif kind == "pairs":
            if (not isinstance(v, list)
                    or not all(isinstance(p, list) and len(p) == 2
                               and isinstance(p[0], str)
                               and isinstance(p[1], (int, float)) for p in v)):
                raise ConfigError(
                    f"config key {key!r} must be an array of [source, allocation] pairs")
            cfg[key] = [(p[0], float(p[1])) for p in v]
    return cfg


# ---------------------------------------------------------------------
# command handlers: each returns (columns, rows)

def cmd_single_gate(cfg: dict):
    th = cfg["theta_rad"]
    rows = []

    def add(source, value, unit, pair, formula):
        rows.append([source, value, unit, pair.exact, pair.taylor,
                     1.0 - pair.exact, formula])

    alpha = cfg["delta_f_hz"] / cfg["f_rabi_hz"]
    add("freq_inaccuracy", cfg["delta_f_hz"], "hz",
        onequbit.fid_freq_inaccuracy(th, alpha), "onequbit.freq_inaccuracy")
    add("phase_inaccuracy", cfg["delta_phi_rad"], "rad",
        onequbit.fid_phase_inaccuracy(th, cfg["delta_phi_rad"]),
        "onequbit.phase_inaccuracy")
    add("amplitude_inaccuracy", cfg["amplitude_rel_error"], "relative",
        onequbit.fid_amplitude_inaccuracy(th, cfg["amplitude_rel_error"]),
        "onequbit.amplitude_inaccuracy")
    add("duration_inaccuracy", cfg["duration_rel_error"], "relative",
        onequbit.fid_duration_inaccuracy(th, cfg["duration_rel_error"]),
        "onequbit.duration_inaccuracy")
    for kind, key, unit, scale in (
            ("frequency", "sigma_f_hz_rms", "hz_rms", cfg["f_rabi_hz"]),
            ("phase", "sigma_phase_rad_rms", "rad_rms", 1.0),
            ("amplitude", "sigma_amplitude_rel_rms", "relative_rms", 1.0),
            ("duration", "sigma_duration_rel_rms", "relative_rms", 1.0)):
        sigma = cfg[key] / scale
        f = onequbit.quasi_static_expectation(kind, th, sigma)
        rows.append([f"{kind}_noise", cfg[key], unit, f, f, 1.0 - f,
                     f"onequbit.quasi_static.{kind}"])
    columns = ["source", "value", "unit", "fidelity_exact", "fidelity_taylor",
               "infidelity_exact", "formula_id"]
    return columns, rows


def cmd_filters(cfg: dict):
    wr = TWO_PI * cfg["f_rabi_hz"]
    grid = np.geomspace(cfg["ratio_min"], cfg["ratio_max"], int(cfg["n_points"]))
    columns = ["theta_rad", "omega_over_omega_r", "h2_amplitude",
               "h2_frequency", "h2_additive", "formula_id"]
    rows = []
    for th in cfg["thetas_rad"]:
        amp = onequbit.filter_response("amplitude", th, wr)
        frq = onequbit.filter_response("frequency", th, wr)
        add = onequbit.filter_response("additive", th, wr)
        for r in grid:
            w = r * wr
            rows.append([th, float(r), float(amp.lp2(np.array([w]))[0]),
                         float(frq.lp2(np.array([w]))[0]),
                         float(add.lp2(np.array([w]))[0]),
                         "onequbit.filter_response"])
    return columns, rows


def _rwa_point(args):
    ratio, theta, f_rabi, spc = args
    spec = onequbit.RotationSpec(theta=theta, omega_r=TWO_PI * f_rabi,
                                 omega_0=TWO_PI * f_rabi * ratio)
    return onequbit.simulate_lab_rotation(spec, spc)


def cmd_rwa_sweep(cfg: dict, workers: int = 1):
    tasks = [(r, th, cfg["f_rabi_hz"], cfg["samples_per_cycle"])
             for r in cfg["ratios"] for th in cfg["thetas_rad"]]
    fids = _pool_map(_rwa_point, tasks, workers)
    columns = ["ratio", "theta_rad", "fidelity", "infidelity", "formula_id"]
    rows = [[t[0], t[1], f, 1.0 - f, "onequbit.rwa_simulation"]
            for t, f in zip(tasks, fids)]
    return columns, rows


def _fdma_point(args):
    alpha, beta, theta, envelope = args
    res = onequbit.fdma_unaddressed(
        onequbit.FdmaScenario(alpha, beta, theta, envelope))
    wx, wy, wz, wi = res.decomposition.weights
    return (1.0 - res.f_raw, 1.0 - res.f_z_corrected, 1.0 - res.f_corr_bound,
            wx, wy, wz, wi)


def cmd_fdma(cfg: dict, workers: int = 1):
    if cfg["envelope"] not in ("rectangular", "gaussian"):
        raise ConfigError("envelope must be 'rectangular' or 'gaussian'")
    tasks = [(a, cfg["beta"], cfg["theta_rad"], cfg["envelope"])
             for a in cfg["alphas"]]
    results = _pool_map(_fdma_point, tasks, workers)
    columns = ["alpha", "beta", "theta_rad", "envelope", "infidelity_raw",
               "infidelity_z_corrected", "infidelity_bound",
               "weight_x", "weight_y", "weight_z", "weight_i", "formula_id"]
    formula = ("onequbit.fdma.closed_form" if cfg["envelope"] == "rectangular"
               else "onequbit.fdma.simulated")
    rows = [[t[0], t[1], t[2], cfg["envelope"], *r, formula]
            for t, r in zip(tasks, results)]
    return columns, rows


def cmd_two_qubit(cfg: dict):
    ctx = ConversionContext(lever_arm_ev_per_v=cfg["lever_arm_ev_per_v"])
    u_hz = convert(cfg["u_v"], "v", "hz", ctx)
    mode = cfg["mode"]
    if mode == "omega_op_map":
        t0s = cfg["t0_hz_list"] or list(np.geomspace(1e8, 2e9, 15))
        epss = cfg["epsilon_over_u_list"] or list(np.linspace(0.0, 0.95, 20))
        columns = ["t0_hz", "epsilon_over_u", "omega_op_hz", "formula_id"]
        rows = [[t0, x, 4.0 * t0**2 / u_hz / (1.0 - x**2), "twoqubit.omega_op"]
                for t0 in t0s for x in epss]
        return columns, rows
    if mode == "eigenenergies":
        p = DoubleDotParams(
            omega_0=TWO_PI * cfg["f_larmor_hz"],
            delta_omega_0=TWO_PI * cfg["delta_f_larmor_hz"],
            t0=TWO_PI * cfg["t0_hz"],
            u=TWO_PI * u_hz,
            epsilon=TWO_PI * cfg["epsilon_over_u"] * u_hz)
        columns = ["method", "lambda1_hz", "lambda2_hz", "lambda3_hz",
                   "lambda4_hz", "omega_op_hz", "formula_id"]
        rows = []
        for method in ("exact", "approx"):
            sol = twoqubit.eigenenergies(p, method)
            rows.append([method, *[x / TWO_PI for x in sol.lambdas],
                         sol.omega_op / TWO_PI, f"twoqubit.eigenenergies.{method}"])
        return columns, rows
    if mode == "gate_errors":
        columns = ["gate", "regime", "error_kind", "rel_error",
                   "fidelity_exact", "fidelity_taylor", "formula_id"]
        rows = []
        for rel in cfg["rel_errors"]:
            pair = twoqubit.fid_gate_inaccuracy(
                cfg["gate"], cfg["regime"], cfg["theta_rad"],
                cfg["error_kind"], rel, eps_over_u=cfg["epsilon_over_u"])
            rows.append([cfg["gate"], cfg["regime"], cfg["error_kind"], rel,
                         pair.exact, pair.taylor,
                         f"twoqubit.{cfg['gate']}.{cfg['error_kind']}"])
        return columns, rows
    if mode == "idle":
        columns = ["regime", "f_omega_op_off_hz", "t_nop_s", "fidelity_exact",
                   "fidelity_taylor", "formula_id"]
        rows = []
        for f_off in cfg["f_omega_op_off_hz_list"]:
            wop_off = 4.0 * (TWO_PI * f_off) ** 2 / (TWO_PI * u_hz)
            pair = twoqubit.fid_idle(cfg["regime"], wop_off, cfg["t_nop_s"])
            rows.append([cfg["regime"], f_off, cfg["t_nop_s"], pair.exact,
                         pair.taylor, "twoqubit.fid_idle"])
        return columns, rows
    raise ConfigError(f"unknown two-qubit mode {mode!r}")


def _readout_params(cfg: dict, ctx: ConversionContext):
    e_st_hz = convert(cfg["e_st_ev"], "ev", "hz", ctx)
    f0 = cfg["f_larmor_hz"] if cfg["f_larmor_hz"] is not None else e_st_hz / 100.0
    df0 = (cfg["delta_f_larmor_hz"] if cfg["delta_f_larmor_hz"] is not None
           else e_st_hz / 1000.0)
    base = DoubleDotParams(
        omega_0=TWO_PI * f0,
        delta_omega_0=TWO_PI * df0,
        t0=TWO_PI * cfg["t0_hz"],
        u=TWO_PI * convert(cfg["u_v"], "v", "hz", ctx),
        epsilon=0.0)
    return readout.ReadoutDotParams(base, TWO_PI * e_st_hz)


def cmd_readout(cfg: dict):
    ctx = ConversionContext(lever_arm_ev_per_v=cfg["lever_arm_ev_per_v"])
    mode = cfg["mode"]
    if mode == "charge_scan":
        p = _readout_params(cfg, ctx)
        scan = readout.charge_transfer_scan(
            p, p.base.u + cfg["x_max"] * p.e_st, int(cfg["n_steps"]))
        x = (scan.epsilons - p.base.u) / p.e_st
        err = scan.error
        window = (x >= 0.05) & (x <= cfg["x_max"])
        err_min = float(err[window].min())
        columns = ["epsilon_rel", "error", "error_normalized", "formula_id"]
        rows = [[float(xi), float(ei), float(ei / err_min), "readout.charge_scan"]
                for xi, ei in zip(x[window], err[window])]
        return columns, rows
    if mode == "splitting_scan":
        p = _readout_params(cfg, ctx)
        ratios = cfg["ratios"] or list(np.geomspace(30.0, 1000.0, 12))
        rows_raw = readout.charge_error_vs_splitting(p, ratios,
                                                     int(cfg["n_steps"]))
        columns = ["e_st_over_t0", "error", "formula_id"]
        rows = [[r, e, "readout.charge_error_vs_splitting"] for r, e in rows_raw]
        return columns, rows
    if mode == "detect":
        from .noise import UNIT_A2_PER_HZ, PowerSpectrum
        if cfg["sensor_psd_csv"]:
            s_sensor = read_psd_csv(cfg["sensor_psd_csv"])
        else:
            s_sensor = PowerSpectrum.white(cfg["sensor_noise_a_rthz"] ** 2,
                                           UNIT_A2_PER_HZ)
        if cfg["circuit_psd_csv"]:
            s_circuit = read_psd_csv(cfg["circuit_psd_csv"])
        else:
            s_circuit = PowerSpectrum.white(cfg["circuit_noise_a_rthz"] ** 2,
                                            UNIT_A2_PER_HZ)
        chain = readout.DetectorChain(cfg["i_s_a"], s_sensor, s_circuit,
                                      cfg["t_read_s"])
        val = readout.snr(chain, cfg["snr_method"])
        columns = ["snr", "p_detect", "enbw_hz", "t_read_s", "formula_id"]
        rows = [[val, readout.p_detect(val), chain.enbw_hz, cfg["t_read_s"],
                 f"readout.snr.{cfg['snr_method']}"]]
        return columns, rows
    if mode == "compose":
        b = readout.ReadoutBudget(cfg["p_charge"], cfg["p_sense"],
                                  cfg["p_detect"])
        columns = ["p_charge", "p_sense", "p_detect", "mode", "fidelity",
                   "formula_id"]
        rows = [[b.p_charge, b.p_sense, b.p_detect, cfg["compose_mode"],
                 readout.readout_fidelity(b, cfg["compose_mode"]),
                 f"readout.compose.{cfg['compose_mode']}"]]
        return columns, rows
    raise ConfigError(f"unknown readout mode {mode!r}")


def cmd_derive(cfg: dict):
    ctx = ConversionContext(lever_arm_ev_per_v=cfg["lever_arm_ev_per_v"],
                            drive_radps_per_v=TWO_PI * 1e6 / cfg["drive_v_per_mhz"])
    name = cfg["name"]
    passthrough = ("name", "lever_arm_ev_per_v", "drive_v_per_mhz", "items")
    overrides = {k: v for k, v in cfg.items()
                 if k not in passthrough and v is not None}
    if name == "custom":
        if not cfg["items"]:
            raise ConfigError("custom derivation requires 'items'")
        table = budget.derive_custom(cfg["items"], overrides, ctx)
    else:
        if name in budget.CASE_STUDIES:
            allowed = set(budget.TABLE1_DEFAULTS if name == "table1"
                          else budget.TABLE3_DEFAULTS if name in ("table3", "table4")
                          else budget.TABLE5_DEFAULTS)
            extra = sorted(set(overrides) - allowed)
            if extra:
                raise ConfigError(f"overrides {extra} not applicable to {name}")
        table = budget.case_study(name, overrides, ctx)
    columns = ["section", "label", "value", "unit", "infidelity_operation",
               "infidelity_idle", "comment", "formula_id"]
    rows = [[i.section, i.label, i.value, i.unit, i.infid_op, i.infid_idle,
             i.comment, i.formula_id] for i in table.items]
    return columns, rows


# ---------------------------------------------------------------------

def _pool_map(fn, tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


HANDLERS = {
    "single-gate": lambda cfg, workers: cmd_single_gate(cfg),
    "filters": lambda cfg, workers: cmd_filters(cfg),
    "rwa-sweep": cmd_rwa_sweep,
    "fdma": cmd_fdma,
    "two-qubit": lambda cfg, workers: cmd_two_qubit(cfg),
    "readout": lambda cfg, workers: cmd_readout(cfg),
    "derive": lambda cfg, workers: cmd_derive(cfg),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=report.TOOL_NAME,
        description="Fidelity models and derived electronics specifications "
                    "for spin-qubit control hardware.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in HANDLERS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--seed", type=int, default=None,
                       help="seed echoed into the report envelope")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--plot", action="store_true",
                       help="also render a PNG figure next to --out")
    return parser


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = json.loads(Path(args.config).read_text())
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        cfg = validate_config(args.command, raw)
        if args.plot and not args.out:
            raise ConfigError("--plot requires --out")
    except (OSError, json.JSONDecodeError, ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        columns, rows = HANDLERS[args.command](cfg, args.workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (InversionError, SpectrumDivergenceError, RuntimeError,
            ValueError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3

    if args.format == "csv":
        text = report.render_csv(columns, rows)
    else:
        text = report.render_json(args.command, raw, args.seed, columns, rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)

    if args.plot:
        from .plots import render_figure
        png = str(Path(args.out).with_suffix(".png"))
        if render_figure(args.command, cfg.get("mode"), columns, rows, png):
            print(f"figure written to {png}", file=sys.stderr)
    return 0


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
