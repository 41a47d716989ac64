"""Scenario-driven command line front end.

Subcommands read a JSON scenario file, run the requested computation, and
emit one CSV table with a `#`-prefixed metadata header carrying every
resolved parameter (lengths in nm, detunings in MHz as delta / 2 pi).
Exit codes: 0 success, 2 configuration error, 3 computation error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np
from scipy.constants import pi

from . import __version__, acceptance, bandgap, emission, fiber, lattice
from . import scattering
from .atoms import cesium_d2_default
from .numerics import ToleranceConfig


class ConfigError(ValueError):
    """Invalid scenario configuration; the message names the fields."""


@dataclass
class ScenarioConfig:
    radius: float
    n1: float | None
    n2: float
    r_atom: float | None
    polarization: str
    detunings: np.ndarray      # rad/s
    n_atoms: int | None
    n_range: tuple | None
    period: float | None       # m, None when bragg_order given
    bragg_order: int | None
    run: dict = field(default_factory=dict)
    tolerances: ToleranceConfig = ToleranceConfig()
    raw: dict = field(default_factory=dict)


def _get(section: dict, key: str, default=None):
    return section.get(key, default)


def load_config(path: str) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as handle:
        try:
            raw = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"not valid JSON: {exc}") from exc
    return parse_config(raw)


def parse_config(raw: dict) -> ScenarioConfig:
    errors = []
    fib = raw.get("fiber", {})
    radius = _get(fib, "radius_nm", 250.0)
    if not radius > 0.0:
        errors.append("fiber.radius_nm must be positive")
    n1 = _get(fib, "n1")
    n2 = _get(fib, "n2", 1.0)

    atom = raw.get("atom", {})
    species = _get(atom, "species", "cesium_d2")
    if species != "cesium_d2":
        errors.append(f"atom.species {species!r} unsupported "
                      "(only cesium_d2)")
    r_atom = None
    has_rma = "r_minus_a_nm" in atom
    has_roa = "r_over_a" in atom
    if has_rma and has_roa:
        errors.append("atom.r_minus_a_nm and atom.r_over_a are exclusive")
    elif has_rma:
        r_atom = (radius + atom["r_minus_a_nm"]) * 1e-9
    elif has_roa:
        r_atom = atom["r_over_a"] * radius * 1e-9

    arr = raw.get("array", {})
    has_period = "period_nm" in arr
    has_order = "bragg_order" in arr
    if has_period and has_order:
        errors.append("array.period_nm and array.bragg_order are exclusive: "
                      "give exactly one")
    period = arr["period_nm"] * 1e-9 if has_period else None
    bragg_order = arr.get("bragg_order") if has_order else None
    n_atoms = arr.get("N")
    n_range = tuple(arr["N_range"]) if "N_range" in arr else None
    if n_atoms is not None and n_range is not None:
        errors.append("array.N and array.N_range are exclusive: "
                      "give exactly one")

    fld = raw.get("field", {})
    pol = _get(fld, "polarization", "x")
    if pol not in ("x", "y", "circ+", "circ-"):
        errors.append(f"field.polarization {pol!r} not one of "
                      "x, y, circ+, circ-")
    has_single = "detuning_mhz" in fld
    has_range = "detuning_range_mhz" in fld
    if has_single and has_range:
        errors.append("field.detuning_mhz and field.detuning_range_mhz are "
                      "exclusive")
    if has_range:
        lo, hi, num = fld["detuning_range_mhz"]
        detunings = np.linspace(lo, hi, int(num)) * 2e6 * pi
    else:
        detunings = np.array([_get(fld, "detuning_mhz", 0.0)]) * 2e6 * pi

    tol_overrides = raw.get("tolerances", {})
    try:
        tolerances = ToleranceConfig(**tol_overrides)
    except (TypeError, ValueError) as exc:
        errors.append(f"tolerances: {exc}")
        tolerances = ToleranceConfig()

    if errors:
        raise ConfigError("; ".join(errors))
    return ScenarioConfig(radius=radius * 1e-9, n1=n1, n2=n2, r_atom=r_atom,
                          polarization=pol, detunings=detunings,
                          n_atoms=n_atoms, n_range=n_range, period=period,
                          bragg_order=bragg_order, run=raw.get("run", {}),
                          tolerances=tolerances, raw=raw)


@dataclass
class Context:
    config: ScenarioConfig
    fiber_spec: fiber.FiberSpec
    transition: object
    mode: fiber.ModeSolution
    rates: emission.DecayRates | None
    period: float | None


def build_context(config: ScenarioConfig, need_rates: bool = True,
                  need_period: bool = False) -> Context:
    transition = cesium_d2_default()
    n1 = config.n1 if config.n1 is not None \
        else fiber.sellmeier_silica(transition.wavelength)
    fiber_spec = fiber.FiberSpec(radius=config.radius, n1=n1, n2=config.n2)
    mode = fiber.solve_mode(fiber_spec, transition.omega0, config.tolerances)
    rates = None
    if need_rates:
        if config.r_atom is None:
            raise ConfigError("atom.r_minus_a_nm or atom.r_over_a required")
        rates = emission.total_rates(fiber_spec, transition, mode,
                                     config.r_atom, config.tolerances)
    period = config.period
    if need_period and period is None:
        if config.bragg_order is None:
            raise ConfigError("array.period_nm or array.bragg_order required")
        period = lattice.bragg_period(mode.beta, config.bragg_order)
    return Context(config=config, fiber_spec=fiber_spec,
                   transition=transition, mode=mode, rates=rates,
                   period=period)


def _fmt(value) -> str:
    return f"{value:.11e}"


def write_table(stream, command: str, context: Context, columns, rows,
                extra_meta=()):
    cfg = context.config
    meta = [
        ("tool", f"fiberarray {__version__}"),
        ("command", command),
        ("generated", datetime.now(timezone.utc).isoformat()),
        ("fiber.radius_nm", cfg.radius * 1e9),
        ("fiber.n1", context.fiber_spec.n1),
        ("fiber.n2", context.fiber_spec.n2),
        ("mode.beta_per_m", context.mode.beta),
        ("mode.h_per_m", context.mode.h),
        ("mode.q_per_m", context.mode.q),
        ("mode.s_param", context.mode.s_param),
        ("mode.v_group_m_per_s", context.mode.v_group),
        ("mode.v_phase_m_per_s", context.mode.v_phase),
    ]
    if cfg.r_atom is not None:
        meta.append(("atom.r_nm", cfg.r_atom * 1e9))
    if context.rates is not None:
        rates = context.rates
        meta.extend([
            ("rates.gamma_gyd_rad_per_s", rates.gamma_gyd),
            ("rates.gamma_rad_rad_per_s", rates.gamma_rad),
            ("rates.gamma_total_rad_per_s", rates.gamma_total),
            ("rates.gamma_s_rad_per_s", rates.gamma_s),
            ("rates.gamma_1d_y_rad_per_s", rates.gamma_1d_y),
        ])
    if context.period is not None:
        meta.append(("array.period_nm", context.period * 1e9))
    meta.extend(extra_meta)
    for key, value in meta:
        stream.write(f"# {key} = {value}\n")
    stream.write(",".join(columns) + "\n")
    for row in rows:
        stream.write(",".join(_fmt(v) for v in row) + "\n")


def cmd_mode(context: Context, stream) -> int:
    cfg = context.config
    r_max = float(cfg.run.get("r_over_a_max", 5.0))
    points = int(cfg.run.get("points", 200))
    a = context.fiber_spec.radius
    grid = list(np.linspace(0.0, r_max, points) * a)
    grid.extend([a * (1.0 - 1e-9), a * (1.0 + 1e-9)])  # expose the e_r jump
    rows = []
    for r in sorted(grid):
        prof = fiber.profile_reference(context.mode, context.fiber_spec, r)
        ratio = abs(prof.e_r) / abs(prof.e_z) if prof.e_z != 0 else np.inf
        rows.append((r / a, prof.e_r.real, prof.e_r.imag, prof.e_phi.real,
                     prof.e_phi.imag, prof.e_z.real, prof.e_z.imag, ratio))
    write_table(stream, "mode", context,
                ("r_over_a", "e_r_re", "e_r_im", "e_phi_re", "e_phi_im",
                 "e_z_re", "e_z_im", "ratio_er_ez"), rows)
    return 0


def cmd_rates(context: Context, stream) -> int:
    cfg = context.config
    rates = context.rates
    rows = []
    for delta in sorted(cfg.detunings):
        rows.append((
            delta / (2e6 * pi),
            rates.gamma_gyd, rates.gamma_rad, rates.gamma_total,
            rates.gamma_s, rates.gamma_1d_y,
            rates.u0_er2, rates.u0_ephi2, rates.u0_ez2,
            scattering.optical_depth(rates, delta, "circ"),
            scattering.optical_depth(rates, delta, "x"),
            scattering.optical_depth(rates, delta, "y"),
        ))
    write_table(stream, "rates", context,
                ("delta_mhz", "gamma_gyd", "gamma_rad", "gamma_total",
                 "gamma_s", "gamma_1d_y", "u0_er2", "u0_ephi2", "u0_ez2",
                 "depth_circ", "depth_x", "depth_y"), rows)
    return 0


def cmd_single(context: Context, stream) -> int:
    cfg = context.config
    if cfg.polarization not in ("x", "y"):
        raise ConfigError("single-atom R/T is defined per quasilinear "
                          "channel: field.polarization must be x or y")
    rows = []
    for delta in sorted(cfg.detunings):
        ch = scattering.polarization_channel(context.rates, delta,
                                             cfg.polarization)
        rows.append((delta / (2e6 * pi), ch.refl.real, ch.refl.imag,
                     ch.trans.real, ch.trans.imag, abs(ch.refl) ** 2,
                     abs(ch.trans) ** 2))
    write_table(stream, "single", context,
                ("delta_mhz", "R_re", "R_im", "T_re", "T_im",
                 "refl", "trans"), rows)
    return 0


def _response(context: Context, delta: float, period: float, n_atoms: int):
    """Array response for the configured input polarization."""
    cfg = context.config
    beta_l = context.mode.beta + delta / context.mode.v_group
    if cfg.polarization in ("x", "y"):
        ch = scattering.polarization_channel(context.rates, delta,
                                             cfg.polarization)
        resp = lattice.array_response(ch.matrix, beta_l, period, n_atoms,
                                      cfg.polarization)
        return resp, {(+1, cfg.polarization): resp.transmittivity,
                      (-1, cfg.polarization): resp.reflectivity}
    ch_x = scattering.polarization_channel(context.rates, delta, "x")
    ch_y = scattering.polarization_channel(context.rates, delta, "y")
    l_in = +1 if cfg.polarization.endswith("+") else -1
    resp = lattice.circular_response(ch_x.matrix, ch_y.matrix, beta_l,
                                     period, n_atoms, l_in)
    return resp, resp.powers


_POWER_COLUMNS = {
    "x": ("p_fwd_x", "p_bwd_x"),
    "y": ("p_fwd_y", "p_bwd_y"),
    "circ+": ("p_fwd_plus", "p_fwd_minus", "p_bwd_plus", "p_bwd_minus"),
    "circ-": ("p_fwd_plus", "p_fwd_minus", "p_bwd_plus", "p_bwd_minus"),
}

_POWER_KEYS = {
    "x": ((+1, "x"), (-1, "x")),
    "y": ((+1, "y"), (-1, "y")),
    "circ+": ((+1, "+"), (+1, "-"), (-1, "+"), (-1, "-")),
    "circ-": ((+1, "+"), (+1, "-"), (-1, "+"), (-1, "-")),
}


def cmd_scan(context: Context, stream, axis: str) -> int:
    cfg = context.config
    pol = cfg.polarization
    power_cols = _POWER_COLUMNS[pol]
    power_keys = _POWER_KEYS[pol]

    def make_row(axis_value, resp, powers):
        return (axis_value, *(powers[k] for k in power_keys),
                resp.reflectivity, resp.transmittivity, resp.p_tot)

    rows = []
    if axis == "N":
        if cfg.n_range is None:
            raise ConfigError("axis N needs array.N_range = [start, stop, "
                              "step]")
        start, stop, step = (int(v) for v in cfg.n_range)
        delta = float(cfg.detunings[0])
        for n_atoms in range(start, stop + 1, step):
            resp, powers = _response(context, delta, context.period, n_atoms)
            rows.append(make_row(n_atoms, resp, powers))
        axis_col = "N"
    elif axis == "lambda":
        lam_cfg = cfg.run.get("lambda_range_nm")
        if lam_cfg is None:
            raise ConfigError("axis lambda needs run.lambda_range_nm = "
                              "[lo, hi, points]")
        if cfg.n_atoms is None:
            raise ConfigError("axis lambda needs array.N")
        lo, hi, num = lam_cfg
        delta = float(cfg.detunings[0])
        for lam in np.linspace(lo, hi, int(num)) * 1e-9:
            resp, powers = _response(context, delta, lam, cfg.n_atoms)
            rows.append(make_row(lam * 1e9, resp, powers))
        axis_col = "lambda_nm"
    elif axis == "delta":
        if cfg.n_atoms is None:
            raise ConfigError("axis delta needs array.N")
        if len(cfg.detunings) < 2:
            raise ConfigError("axis delta needs field.detuning_range_mhz")
        for delta in sorted(cfg.detunings):
            resp, powers = _response(context, float(delta), context.period,
                                     cfg.n_atoms)
            rows.append(make_row(delta / (2e6 * pi), resp, powers))
        axis_col = "delta_mhz"
    else:
        raise ConfigError(f"unknown scan axis {axis!r}")
    write_table(stream, f"scan --axis {axis}", context,
                (axis_col, *power_cols, "refl", "trans", "p_tot"), rows)
    return 0


def cmd_bandgap(context: Context, stream) -> int:
    cfg = context.config
    if cfg.polarization not in ("x", "y"):
        raise ConfigError("bandgap analysis is per quasilinear channel: "
                          "field.polarization must be x or y")
    xi = cfg.polarization
    n_atoms = cfg.n_atoms if cfg.n_atoms is not None else 150000
    rates, mode, period = context.rates, context.mode, context.period
    report = bandgap.gap_report(rates, mode, period, xi,
                                n_atoms_flat=n_atoms)
    mhz = 2e6 * pi
    meta = [
        ("gap.xi", xi),
        ("gap.N", n_atoms),
        ("gap.delta_max_mhz", report.delta_max / mhz),
        ("gap.delta_min_mhz",
         report.delta_min / mhz if report.delta_min is not None else "nan"),
        ("gap.delta_gap_mhz", report.delta_gap / mhz),
        ("gap.n_gap", report.n_gap),
        ("gap.delta_mid_mhz", report.delta_mid / mhz),
        ("gap.r_gap_re", report.r_gap.real),
        ("gap.r_gap_im", report.r_gap.imag),
        ("gap.delta_flat_mhz",
         report.delta_flat / mhz if report.delta_flat is not None else "nan"),
        ("gap.tau_delay_ns", report.tau_delay * 1e9),
        ("gap.intervals_mhz",
         "; ".join(f"[{a / mhz:.6f}, {b / mhz:.6f}]"
                   for a, b in report.intervals)),
    ]
    if len(cfg.detunings) >= 2:
        deltas = np.sort(cfg.detunings)
    else:
        span = 1.5 * report.delta_max
        deltas = np.linspace(-span, span, int(cfg.run.get("points", 801)))
    rows = []
    for delta in deltas:
        resp, _powers = _response(context, float(delta), period, n_atoms)
        r_inf = bandgap.infinite_array_reflection(rates, mode, period, xi,
                                                  float(delta))
        rows.append((delta / mhz, resp.reflectivity, resp.transmittivity,
                     abs(r_inf) ** 2, float(np.angle(r_inf))))
    write_table(stream, "bandgap", context,
                ("delta_mhz", "refl_N", "trans_N", "refl_inf", "phase_inf"),
                rows, extra_meta=meta)
    return 0


def cmd_selfcheck(args) -> int:
    only = set(args.only) if args.only else None
    ok = acceptance.run_all(only=only)
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fiberarray",
        description="Guided light through a periodic atom array along a "
                    "nanofiber")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("mode", "rates", "single", "scan", "bandgap"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None,
                       help="output CSV path (default: stdout)")
        if name == "scan":
            p.add_argument("--axis", required=True,
                           choices=("N", "lambda", "delta"))
    p_check = sub.add_parser("selfcheck")
    p_check.add_argument("--only", type=int, nargs="*", default=None,
                         help="criterion numbers to run (default: all)")
    args = parser.parse_args(argv)

    if args.command == "selfcheck":
        return cmd_selfcheck(args)

    try:
        config = load_config(args.config)
        needs_period = args.command in ("bandgap",) or \
            (args.command == "scan" and args.axis in ("N", "delta"))
        context = build_context(config,
                                need_rates=args.command != "mode",
                                need_period=needs_period)
        stream = open(args.out, "w", encoding="utf-8") if args.out \
            else sys.stdout
        try:
            if args.command == "mode":
                return cmd_mode(context, stream)
            if args.command == "rates":
                return cmd_rates(context, stream)
            if args.command == "single":
                return cmd_single(context, stream)
            if args.command == "scan":
                return cmd_scan(context, stream, args.axis)
            if args.command == "bandgap":
                return cmd_bandgap(context, stream)
        finally:
            if args.out:
                stream.close()
    except ConfigError as exc:
        print(f"ERROR: config: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - single CLI boundary
        print(f"ERROR: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
