"""Config-driven command line runner.

Every subcommand reads one JSON config (all fields optional, defaults
below), applies --set overrides on dotted paths, runs the experiment, and
writes its artifacts plus resolved_config.json into --out. Outputs are
byte-identical across repeated runs with the same config and seed; the only
timestamps live in the run.log sidecar.
"""

from __future__ import annotations

import argparse
import copy
import dataclasses
import json
import math
import sys as _sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import analysis, io as io_
from .dynamics import IntegratorConfig, conservation_report, integrate
from .ensemble import moments, sample_gaussian_wigner, separatrix_fraction, transport
from .errors import UsageError, XPhaseError
from .hamiltonians import ExtendedSystem
from .oracle import Grid1D, eigensolve
from .potentials import from_config as potential_from_config

_SQRT_HALF = 1.0 / math.sqrt(2.0)


# ---------------------------------------------------------------------------
# config schema


def _base_config(flavor: str) -> dict:
    return {
        "seed": 0,
        "system": {
            "potential": {"kind": "double_well", "coefficients": None},
            "flavor": flavor,
            "mass": 1.0,
            "hbar": 0.1,
        },
        "integrator": {
            "rel_tol": 1e-10,
            "abs_tol": 1e-12,
            "max_step": None,
            "min_step": 1e-13,
            "escape_radius": 1e6,
            "method": "adaptive_rk",
            "fixed_step": 1e-3,
            "sample_stride": 1,
        },
    }


def default_config(command: str) -> dict:
    """The fully-resolved default config for a subcommand."""
    if command not in _COMMANDS:
        raise UsageError(f"unknown subcommand {command!r}")
    flavor, block, block_defaults, _ = _COMMANDS[command]
    cfg = _base_config(flavor)
    if block is not None:
        cfg[block] = copy.deepcopy(block_defaults)
    if command == "ellipse-check":
        cfg["system"]["potential"]["kind"] = "harmonic"
    if command == "ensemble":
        cfg["system"]["potential"]["kind"] = "inverted_harmonic"
    return cfg


def _check_type(key: str, old, new):
    """Reject a leaf override whose JSON type disagrees with the default."""
    if old is None or new is None:
        return
    if isinstance(old, bool):
        if not isinstance(new, bool):
            raise UsageError(f"config key {key} expects true/false, got {new!r}")
    elif isinstance(old, (int, float)):
        if isinstance(new, bool) or not isinstance(new, (int, float)):
            raise UsageError(f"config key {key} expects a number, got {new!r}")
    elif isinstance(old, str):
        if not isinstance(new, str):
            raise UsageError(f"config key {key} expects a string, got {new!r}")
    elif isinstance(old, list):
        if not isinstance(new, list):
            raise UsageError(f"config key {key} expects a list, got {new!r}")


def _merge(base: dict, user: dict, path: str = ""):
    for key, value in user.items():
        full = f"{path}.{key}" if path else str(key)
        if not isinstance(key, str) or key not in base:
            raise UsageError(f"unknown config key: {full}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise UsageError(f"config key {full} must be an object")
            _merge(base[key], value, full)
        else:
            _check_type(full, base[key], value)
            base[key] = value


def _apply_set(cfg: dict, assignment: str):
    if "=" not in assignment:
        raise UsageError(f"--set expects KEY=VALUE, got {assignment!r}")
    key, raw = assignment.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw  # bare strings like right or harmonic
    node = cfg
    parts = key.split(".")
    for part in parts[:-1]:
        if not isinstance(node, dict) or part not in node:
            raise UsageError(f"unknown config key: {key}")
        node = node[part]
    if not isinstance(node, dict) or parts[-1] not in node:
        raise UsageError(f"unknown config key: {key}")
    target = node[parts[-1]]
    if isinstance(target, dict):
        if not isinstance(value, dict):
            raise UsageError(f"config key {key} must be an object")
        _merge(target, value, key)
    else:
        _check_type(key, target, value)
        node[parts[-1]] = value


def load_config(command: str, config_path=None, overrides=(), seed=None) -> dict:
    cfg = default_config(command)
    if config_path is not None:
        try:
            with open(config_path) as fh:
                user = json.load(fh)
        except OSError as exc:
            raise UsageError(f"cannot read config file {config_path}: {exc}")
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file {config_path} is not valid JSON: {exc}")
        if not isinstance(user, dict):
            raise UsageError("config root must be a JSON object")
        _merge(cfg, user)
    for assignment in overrides:
        _apply_set(cfg, assignment)
    if seed is not None:
        cfg["seed"] = int(seed)
    return cfg


# ---------------------------------------------------------------------------
# builders


def _build_system(cfg: dict) -> ExtendedSystem:
    block = cfg["system"]
    pot = block["potential"]
    V = potential_from_config(pot["kind"], pot["coefficients"])
    try:
        return ExtendedSystem(V, mass=float(block["mass"]),
                              flavor=block["flavor"], hbar=float(block["hbar"]))
    except ValueError:
        raise UsageError(f"system.flavor must be one of mfqm/ccm/classical, "
                         f"got {block['flavor']!r}")


def _build_integrator(cfg: dict) -> IntegratorConfig:
    b = cfg["integrator"]
    try:
        return IntegratorConfig(
            rel_tol=float(b["rel_tol"]), abs_tol=float(b["abs_tol"]),
            max_step=math.inf if b["max_step"] is None else float(b["max_step"]),
            min_step=float(b["min_step"]),
            escape_radius=float(b["escape_radius"]), method=str(b["method"]),
            fixed_step=float(b["fixed_step"]),
            sample_stride=int(b["sample_stride"]))
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad integrator config: {exc}")


def _initial_point(values, field: str):
    arr = np.asarray(values, dtype=float)
    if arr.shape != (4,):
        raise UsageError(f"{field} must be a list of four numbers [x, y, p, q]")
    return arr


# ---------------------------------------------------------------------------
# subcommand runners; each returns (summary_line, report_files)


def _run_simulate(cfg, out):
    sys = _build_system(cfg)
    block = cfg["simulate"]
    X0 = _initial_point(block["initial"], "simulate.initial")
    traj = integrate(sys, X0, (block["t0"], block["t1"]), _build_integrator(cfg),
                     x_split=float(block["x_split"]))
    io_.write_trajectory_csv(traj, out / "trajectory.csv")
    io_.write_events_json(traj, out / "events.json")
    gd, cd = conservation_report(traj)
    summary = (f"simulate: {len(traj.times)} nodes, termination={traj.termination}, "
               f"drift generator={gd:.3e} constraint={cd:.3e}")
    return summary, ["trajectory.csv", "events.json"]


def _run_dwell(cfg, out):
    sys = _build_system(cfg)
    block = cfg["dwell"]
    mode = block["mode"]
    if mode not in ("ccm", "mfqm"):
        raise UsageError(f"dwell.mode must be 'ccm' or 'mfqm', got {mode!r}")
    if sys.flavor.value != mode:
        raise UsageError(f"dwell.mode {mode!r} needs system.flavor {mode!r}, "
                         f"got {sys.flavor.value!r}")
    icfg = _build_integrator(cfg)
    span = (0.0, float(block["t_max"]))
    if mode == "ccm":
        traj = analysis.ccm_double_well_run(
            sys, float(block["e_r"]), float(block["delta_e"]), block["x0"],
            icfg, span, x_split=float(block["x_split"]), branch=int(block["branch"]))
    else:
        traj = analysis.mfqm_double_well_run(
            sys, float(block["e"]), float(block["delta_e_prime"]), block["x0"],
            icfg, span, x_split=float(block["x_split"]))
    dw = analysis.dwell_analysis(traj, float(block["x_split"]),
                                 float(block["x_well_max"]))
    io_.write_trajectory_csv(traj, out / "trajectory.csv")
    io_.write_events_json(traj, out / "events.json")
    io_.write_json({"mode": mode, **dataclasses.asdict(dw)}, out / "dwell.json")
    ratio = "undefined" if dw.ratio is None else f"{dw.ratio:.6g}"
    summary = (f"dwell: flips={dw.flips}, left={dw.time_left:.6g}, "
               f"right={dw.time_right:.6g}, excursion={dw.excursion_time:.6g}, "
               f"ratio={ratio}, termination={dw.termination}")
    return summary, ["trajectory.csv", "events.json", "dwell.json"]


def _run_sweep_uncertainty(cfg, out):
    sys = _build_system(cfg)
    block = cfg["uncertainty"]
    rows = analysis.uncertainty_sweep(
        sys, float(block["e_r"]), block["delta_e"], block["x0"],
        _build_integrator(cfg), float(block["t_max"]), float(block["x_split"]))
    io_.write_uncertainty_csv(rows, out / "uncertainty.csv")
    report = {
        "e_r": float(block["e_r"]),
        "rows": [dataclasses.asdict(r) for r in rows],
    }
    products = [r.product for r in rows if r.product is not None]
    if products:
        report["product_spread"] = max(products) / min(products)
    io_.write_json(report, out / "uncertainty.json")
    done = len(products)
    tail = (f", product range [{min(products):.5g}, {max(products):.5g}]"
            if products else "")
    summary = f"sweep-uncertainty: {done}/{len(rows)} rows measured{tail}"
    return summary, ["uncertainty.csv", "uncertainty.json"]


def _run_sweep_hbar(cfg, out):
    sys = _build_system(cfg)
    block = cfg["classical_limit"]
    rows = analysis.classical_limit_sweep(
        sys, block["hbar"], block["xbar0"], (block["t0"], block["t1"]),
        int(block["n_samples"]), _build_integrator(cfg))
    io_.write_hbar_csv(rows, out / "hbar.csv")
    ordered = sorted(rows, key=lambda r: -r[0])
    devs = [d for _, d in ordered]
    monotone = all(a > b for a, b in zip(devs, devs[1:]))
    io_.write_json({"rows": [[h, d] for h, d in rows],
                    "monotone_decreasing": monotone}, out / "hbar.json")
    summary = (f"sweep-hbar: {len(rows)} rows, deviation {devs[0]:.3e} -> "
               f"{devs[-1]:.3e}, monotone={'yes' if monotone else 'no'}")
    return summary, ["hbar.csv", "hbar.json"]


def _run_ellipse_check(cfg, out):
    sys = _build_system(cfg)
    block = cfg["ellipse"]
    X0 = _initial_point(block["initial"], "ellipse.initial")
    c2 = sys.potential.coefficients[2] if sys.potential.degree >= 2 else 0.0
    if sys.potential.label != "harmonic":
        raise UsageError("ellipse-check needs system.potential.kind = 'harmonic'")
    omega = math.sqrt(2.0 * c2 / sys.mass)
    span = (0.0, float(block["periods"]) * 2.0 * math.pi / omega)
    traj = integrate(sys, X0, span, _build_integrator(cfg))
    fit = analysis.fit_sho_ellipse(traj, sys)
    logged = float(traj.constraint_log[0])
    report = dataclasses.asdict(fit)
    report["constraint_logged"] = logged
    report["constraint_fit_error"] = abs(fit.constraint_estimate - logged)
    io_.write_trajectory_csv(traj, out / "trajectory.csv")
    io_.write_json(report, out / "ellipse.json")
    summary = (f"ellipse-check: A={fit.A:.6g} B={fit.B:.6g} rms={fit.residual_rms:.3e} "
               f"constraint fit error={report['constraint_fit_error']:.3e}")
    return summary, ["trajectory.csv", "ellipse.json"]


def _run_spectrum(cfg, out):
    sys = _build_system(cfg)
    block = cfg["spectrum"]
    g = block["grid"]
    grid = Grid1D(float(g["x_min"]), float(g["x_max"]), int(g["n"]))
    result = eigensolve(sys.potential, grid, hbar=sys.hbar, mass=sys.mass,
                        k=int(block["levels"]),
                        require_confining=bool(block["require_confining"]))
    io_.write_spectrum_json(result, out / "spectrum.json")
    files = ["spectrum.json"]
    if block["wavefunctions"]:
        io_.write_wavefunctions_csv(result, out / "wavefunctions.csv")
        files.append("wavefunctions.csv")
    e = result.energies
    gap = f", E1-E0={e[1] - e[0]:.6g}" if len(e) > 1 else ""
    summary = f"spectrum: {len(e)} levels, E0={e[0]:.10g}{gap}"
    return summary, files


def _run_compare(cfg, out):
    sys = _build_system(cfg)
    block = cfg["compare"]
    g = block["grid"]
    table = analysis.ccm_vs_quantum_report(
        sys, block["delta_e"],
        e_r=None if block["e_r"] is None else float(block["e_r"]),
        level=int(block["level"]), convention=block["convention"],
        x0=block["x0"], grid=Grid1D(float(g["x_min"]), float(g["x_max"]), int(g["n"])),
        cfg=_build_integrator(cfg), t_max=float(block["t_max"]),
        x_split=float(block["x_split"]), x_well_max=float(block["x_well_max"]))
    io_.write_json(dataclasses.asdict(table), out / "compare.json")
    extr = ("undefined" if table.extrapolated_ratio is None
            else f"{table.extrapolated_ratio:.6g}")
    summary = (f"compare: {len(table.rows)} rows at e_r={table.e_r:.8g}, quantum "
               f"P=({table.quantum_p_left:.4f}, {table.quantum_p_right:.4f}), "
               f"extrapolated ratio={extr}")
    return summary, ["compare.json"]


def _run_ensemble(cfg, out):
    sys = _build_system(cfg)
    block = cfg["ensemble"]
    cx, cp = (float(v) for v in block["center"])
    sx, sp = (float(v) for v in block["sigma"])
    samples = sample_gaussian_wigner(cx, cp, sx, sp, int(block["n"]),
                                     seed=int(cfg["seed"]), hbar=sys.hbar)
    io_.write_ensemble_csv(samples, out / "ensemble.csv")
    files = ["ensemble.csv"]
    report = {"initial_moments": dataclasses.asdict(moments(samples))}
    if sys.potential.label == "inverted_harmonic":
        report["separatrix_fraction"] = separatrix_fraction(samples, sys)
    t = float(block["t"])
    if block["transport"] and t != 0.0:
        moved = transport(samples, sys, t, _build_integrator(cfg))
        io_.write_ensemble_csv(moved, out / "transported.csv")
        files.append("transported.csv")
        report["final_moments"] = dataclasses.asdict(moments(moved))
        report["t"] = t
    io_.write_json(report, out / "moments.json")
    files.append("moments.json")
    mom = report["initial_moments"]
    summary = (f"ensemble: n={len(samples)}, mean=({mom['mean_x']:.4g}, "
               f"{mom['mean_p']:.4g})" + (f", transported to t={t}" if
                                          "final_moments" in report else ""))
    return summary, files


def _run_identity_check(cfg, out):
    block = cfg["identity"]
    sys_block = cfg["system"]
    report = {}
    worst = 0.0
    for kind in block["potentials"]:
        V = potential_from_config(kind, sys_block["potential"]["coefficients"])
        res = analysis.identity_battery(
            V, mass=float(sys_block["mass"]), hbar=float(sys_block["hbar"]),
            n=int(block["n_points"]), seed=int(cfg["seed"]),
            box=float(block["box"]))
        report[kind] = res
        worst = max(worst, max(res.values()))
    io_.write_json(report, out / "identities.json")
    summary = (f"identity-check: max residual {worst:.3e} over "
               f"{int(block['n_points'])} points x {len(report)} potentials")
    return summary, ["identities.json"]


_COMMANDS = {
    "simulate": ("mfqm", "simulate",
                 {"initial": [1.0, 0.3, 0.0, 0.0], "t0": 0.0, "t1": 100.0,
                  "x_split": 0.0},
                 _run_simulate),
    "dwell": ("ccm", "dwell",
              {"mode": "ccm", "e_r": 0.5, "delta_e": 0.1, "branch": 1,
               "e": 0.6, "delta_e_prime": 0.6, "x0": "right", "t_max": 100.0,
               "x_split": 0.0, "x_well_max": 3.0},
              _run_dwell),
    "sweep-uncertainty": ("ccm", "uncertainty",
                          {"e_r": 0.5, "delta_e": [1.0, 0.5, 0.2, 0.1],
                           "x0": "right", "t_max": 600.0, "x_split": 0.0},
                          _run_sweep_uncertainty),
    "sweep-hbar": ("mfqm", "classical_limit",
                   {"hbar": [0.4, 0.2, 0.1, 0.05],
                    "xbar0": [0.8, 1.0, 0.4, 1.0],
                    "t0": 0.0, "t1": 8.0, "n_samples": 400},
                   _run_sweep_hbar),
    "ellipse-check": ("mfqm", "ellipse",
                      {"initial": [1.0, 0.5, 0.0, 0.0], "periods": 10.0},
                      _run_ellipse_check),
    "spectrum": ("mfqm", "spectrum",
                 {"grid": {"x_min": -4.0, "x_max": 4.0, "n": 2001},
                  "levels": 4, "require_confining": True, "wavefunctions": True},
                 _run_spectrum),
    "compare": ("ccm", "compare",
                {"delta_e": [0.2, 0.1, 0.05], "e_r": None, "level": 0,
                 "convention": "symmetric", "x0": "right", "t_max": 600.0,
                 "x_split": 0.0, "x_well_max": 3.0,
                 "grid": {"x_min": -4.0, "x_max": 4.0, "n": 4001}},
                _run_compare),
    "ensemble": ("classical", "ensemble",
                 {"center": [-3.0, 0.0], "sigma": [_SQRT_HALF, _SQRT_HALF],
                  "n": 4096, "t": 1.0, "transport": True},
                 _run_ensemble),
    "identity-check": ("mfqm", "identity",
                       {"n_points": 1000, "box": 2.0,
                        "potentials": ["harmonic", "inverted_harmonic",
                                       "double_well"]},
                       _run_identity_check),
}

_HELP = {
    "simulate": "integrate one trajectory; writes trajectory.csv + events.json",
    "dwell": "double-well run plus dwell-time summary",
    "sweep-uncertainty": "delta_E sweep of first-return times (CCM double well)",
    "sweep-hbar": "MFQM vs classical deviation as hbar shrinks",
    "ellipse-check": "harmonic run with sinusoid fit and constraint readback",
    "spectrum": "1D eigenvalue oracle; writes spectrum.json",
    "compare": "CCM dwell ratios next to quantum well probabilities",
    "ensemble": "Gaussian phase-space cloud, optional classical transport",
    "identity-check": "structural identity battery; prints max residuals",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xphase",
        description="Extended-phase-space dynamics experiments (MFQM / CCM).",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name in _COMMANDS:
        p = sub.add_parser(name, help=_HELP[name], description=_HELP[name])
        p.add_argument("--config", metavar="PATH",
                       help="JSON config file (defaults apply to omitted fields)")
        p.add_argument("--out", metavar="DIR", default="xphase_out",
                       help="output directory (default: xphase_out)")
        p.add_argument("--seed", type=int, metavar="N",
                       help="override the config seed")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config field by dotted path (repeatable)")
        if name == "spectrum":
            p.add_argument("--levels", type=int, metavar="N",
                           help="number of levels (overrides spectrum.levels)")
        p.add_argument("--quiet", action="store_true",
                       help="suppress the summary line")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.command, args.config, args.set, args.seed)
        if args.command == "spectrum" and getattr(args, "levels", None) is not None:
            cfg["spectrum"]["levels"] = args.levels
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        started = datetime.now(timezone.utc).isoformat()
        summary, files = _COMMANDS[args.command][3](cfg, out)
        io_.write_json({"command": args.command, "config": cfg},
                       out / "resolved_config.json")
        files = files + ["resolved_config.json"]
        with open(out / "run.log", "w") as log:
            log.write(f"{started} start {args.command}\n")
            for name in files:
                log.write(f"{started} wrote {name}\n")
            log.write(f"{datetime.now(timezone.utc).isoformat()} done {summary}\n")
    except XPhaseError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return exc.exit_code
    if not args.quiet:
        print(f"{summary} -> {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
