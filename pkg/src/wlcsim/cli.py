"""Scenario runner: every workflow as a subcommand producing CSV datasets.

Subcommands: propagate, susceptibility, group-index, cavity, scaling.  Each
reads a plain-text config (see config.py), applies --set overrides, and
writes deterministic CSVs whose # headers echo the resolved configuration.
Exit codes: 0 success, 1 config/validation error, 2 numerical failure (the
error class name is printed).
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .atoms import FieldAmplitudes
from .cavity import (
    CavitySpec,
    buildup_profile,
    empty_bandwidth,
    enhancement_scaling,
    fwhm,
    flatness_coefficient,
    solve_wlc_geometry,
    wlc_bandwidth_analytic,
    write_profile_csv,
    write_scaling_csv,
)
from .config import (
    ScenarioConfig,
    build_cavity,
    build_controls,
    build_grid,
    build_medium,
    build_probe,
    echo_lines,
    parse_config,
    sweep_deltas,
)
from .errors import ConfigError, SimulationError
from .measurement import (
    SusceptibilityCurve,
    fit_dispersion,
    group_index,
    peak_advancement,
    read_curve_csv,
    sweep_susceptibility,
    write_curve_csv,
)
from .propagation import (
    FIELD_NAMES,
    Grid,
    MediumSpec,
    ProbeWaveform,
    prepare_medium,
    propagate,
    propagate_batch,
)


def _fmt(x: float) -> str:
    return f"{x:.16e}"


def _resolved_lines(cfg: ScenarioConfig, medium: MediumSpec, grid: Grid | None) -> list[str]:
    lines = [f"# wlcsim {__version__}"]
    lines += echo_lines(cfg)
    for name in ("31", "42", "41", "32"):
        lines.append(f"# resolved eta{name}_gamma_per_m = {_fmt(medium.eta(name))}")
    lines.append(f"# resolved wavenumber_per_m = {_fmt(medium.wavenumber)}")
    lines.append(f"# resolved omega0_rad_s = {_fmt(medium.omega0)}")
    if grid is not None:
        lines.append(f"# resolved dz_m = {_fmt(grid.dz)}")
        lines.append(f"# resolved dt_over_gamma = {_fmt(grid.dt)}")
        lines.append(f"# resolved courant = {_fmt(grid.courant)}")
    return lines


def _write_rows(path: Path, header: list[str], columns: str, rows, footer: list[str] | None = None):
    lines = list(header)
    lines.append(columns)
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    lines.extend(footer or [])
    path.write_text("\n".join(lines) + "\n")


def _pulse_grid(medium: MediumSpec, nz: int, probe: ProbeWaveform, margin: float = 4.0) -> Grid:
    duration = probe.pulse_center + 8.0 * probe.sigma + margin
    return Grid.for_medium(medium, nz=nz, duration=duration)


def _sweep_worker(args):
    medium, controls, grid, deltas, suppress, amplitude, prepared = args
    return sweep_susceptibility(
        medium, controls, grid, deltas, suppress_4wm=suppress,
        probe_amplitude=amplitude, prepared=prepared, on_error="collect",
    )


def _run_sweep(medium, controls, grid, deltas, suppress, amplitude, prepared, jobs):
    """Sweep, optionally splitting the detuning list over worker processes."""
    if jobs <= 1 or len(deltas) < 2 * jobs:
        return sweep_susceptibility(
            medium, controls, grid, deltas, suppress_4wm=suppress,
            probe_amplitude=amplitude, prepared=prepared, on_error="collect",
        )
    chunks = np.array_split(deltas, jobs)
    tasks = [(medium, controls, grid, chunk, suppress, amplitude, prepared)
             for chunk in chunks if len(chunk)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        results = list(pool.map(_sweep_worker, tasks))
    all_deltas, all_re, all_im = [], [], []
    failures = []
    for curve, fails in results:
        all_deltas.extend(curve.deltas)
        all_re.extend(curve.chi_re)
        all_im.extend(curve.chi_im)
        failures.extend(fails)
    order = np.argsort(all_deltas)
    base = results[0][0]
    curve = SusceptibilityCurve(
        deltas=np.asarray(all_deltas)[order],
        chi_re=np.asarray(all_re)[order],
        chi_im=np.asarray(all_im)[order],
        length=base.length, wavenumber=base.wavenumber,
        gamma_ref=base.gamma_ref, suppress_4wm=suppress, metadata=base.metadata,
    )
    return curve, failures


def _snapshot_times(probe: ProbeWaveform, grid: Grid, n: int) -> list[float]:
    if probe.kind == "gaussian":
        lo = max(0.0, probe.pulse_center - 2.0 * probe.sigma)
        hi = min(grid.duration, probe.pulse_center + 2.0 * probe.sigma)
    else:
        lo, hi = 0.0, grid.duration
    if n == 1:
        return [hi]
    return list(np.linspace(lo, hi, n))


def run_propagate(cfg: ScenarioConfig, args) -> int:
    medium = build_medium(cfg)
    grid = build_grid(cfg, medium)
    controls = build_controls(cfg)
    probe = build_probe(cfg)
    if probe.kind == "gaussian":
        grid = _pulse_grid(medium, grid.nz, probe)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    prepared = prepare_medium(medium, controls, grid)
    snap_times = _snapshot_times(probe, grid, args.snapshots) if args.snapshots else None
    record = propagate(prepared, probe, suppress_4wm=args.suppress_4wm,
                       snapshot_times=snap_times)

    header = _resolved_lines(cfg, medium, grid)
    header.append(f"# suppress_4wm = {args.suppress_4wm}")
    header.append(f"# transmission31 = {_fmt(prepared.transmission['omega31'])}")
    header.append(f"# transmission42 = {_fmt(prepared.transmission['omega42'])}")
    if probe.kind == "cw":
        ratio = record.exit_amplitude["omega41"] / record.entry_amplitude["omega41"]
        header.append(f"# probe_intensity_gain = {_fmt(abs(ratio) ** 2)}")
        header.append(f"# settle_time_over_gamma = {_fmt(record.settle_time)}")
    else:
        t_a = peak_advancement(record)
        header.append(f"# advancement_s = {_fmt(t_a)}")
        header.append(f"# group_index = {_fmt(group_index(t_a, medium.length))}")

    # exit/entry time series
    rows = []
    for i, t in enumerate(record.times):
        row = [t, record.entry["omega41"][i].real, record.entry["omega41"][i].imag]
        for name in FIELD_NAMES:
            row += [record.exit[name][i].real, record.exit[name][i].imag]
        rows.append(row)
    columns = "t_over_gamma,omega41_entry_re,omega41_entry_im," + ",".join(
        f"{name}_exit_re,{name}_exit_im" for name in FIELD_NAMES)
    _write_rows(out / "timeseries.csv", header, columns, rows)

    # snapshots: one file per frame plus an index
    index_rows = []
    for i, snap in enumerate(record.snapshots):
        fname = f"snapshot_{i:03d}.csv"
        z = np.arange(grid.nz + 1) * grid.dz
        rows = []
        for j in range(grid.nz + 1):
            row = [z[j]]
            for name in FIELD_NAMES:
                row += [snap.fields[name][j].real, snap.fields[name][j].imag]
            rows.append(row)
        columns = "z_m," + ",".join(f"{name}_re,{name}_im" for name in FIELD_NAMES)
        snap_header = header + [f"# snapshot_time_over_gamma = {_fmt(snap.time)}"]
        _write_rows(out / fname, snap_header, columns, rows)
        index_rows.append((i, snap.time))
    if index_rows:
        lines = list(header)
        lines.append("snapshot,time_over_gamma,file")
        for i, t in index_rows:
            lines.append(f"{i},{_fmt(t)},snapshot_{i:03d}.csv")
        (out / "snapshots_index.csv").write_text("\n".join(lines) + "\n")
    return 0


def run_susceptibility(cfg: ScenarioConfig, args) -> int:
    medium = build_medium(cfg)
    grid = build_grid(cfg, medium)
    controls = build_controls(cfg)
    deltas = sweep_deltas(cfg)
    amplitude = cfg.get_float("probe", "amplitude", 0.1)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    prepared = prepare_medium(medium, controls, grid)
    curve, failures = _run_sweep(medium, controls, grid, deltas,
                                 args.suppress_4wm, amplitude, prepared, args.jobs)
    suffix = "_no4wm" if args.suppress_4wm else ""
    path = out / f"susceptibility{suffix}.csv"
    header = {f"config_{s}.{k}": v for (s, k), v in cfg.items()}
    header["version"] = __version__
    for i, (d, name, msg) in enumerate(failures):
        header[f"error_{i}"] = f"delta={d} {name}: {msg}"
    write_curve_csv(curve, path, header=header)
    if failures:
        for d, name, msg in failures:
            print(f"sweep point delta={d} failed: {name}: {msg}", file=sys.stderr)
        return 2
    return 0


def run_group_index(cfg: ScenarioConfig, args) -> int:
    medium = build_medium(cfg)
    nz = cfg.get_int("grid", "nz", 512)
    controls = build_controls(cfg)
    amplitude = cfg.get_float("probe", "amplitude", 0.1)
    bandwidths = cfg.get_floats("groupindex", "bandwidths", [2.0, 0.5])
    lo = cfg.get_float("groupindex", "delta_min", -1.0)
    hi = cfg.get_float("groupindex", "delta_max", 1.0)
    n = cfg.get_int("groupindex", "points", 11)
    detunings = np.linspace(lo, hi, n)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for bw in bandwidths:
        probe0 = ProbeWaveform.gaussian(amplitude=amplitude, bandwidth=bw)
        grid = _pulse_grid(medium, nz, probe0)
        prepared = prepare_medium(medium, controls, grid)
        probes = [ProbeWaveform.gaussian(amplitude=amplitude, bandwidth=bw, detuning=d)
                  for d in detunings]
        records = propagate_batch(prepared, probes, suppress_4wm=args.suppress_4wm)
        rows = []
        for d, rec in zip(detunings, records):
            t_a = peak_advancement(rec)
            rows.append((d, group_index(t_a, medium.length)))
        header = _resolved_lines(cfg, medium, grid)
        header.append(f"# suppress_4wm = {args.suppress_4wm}")
        header.append(f"# bandwidth_gamma = {_fmt(bw)}")
        suffix = "_no4wm" if args.suppress_4wm else ""
        name = f"groupindex_bw{bw:g}{suffix}.csv"
        _write_rows(out / name, header, "delta_over_gamma,n_g", rows)
    return 0


def _solved_curve(cfg: ScenarioConfig, args, medium, controls, cavity):
    """Curve at the WLC-matched medium length (or loaded from --curve)."""
    if getattr(args, "curve", None):
        return read_curve_csv(args.curve), None
    nz = cfg.get_int("grid", "nz", 512)
    duration = cfg.get_float("grid", "duration", 400.0)
    amplitude = cfg.get_float("probe", "amplitude", 0.1)
    # the WLC condition cancels the local phase slope at resonance, so the
    # geometry fit stays inside the anomalous core
    window = cfg.get_float("fit", "geometry_window", 0.25)
    fit_points = cfg.get_int("fit", "points", 21)
    suppress = args.suppress_4wm

    def ng_of_length(length: float) -> float:
        med = MediumSpec(length=length, density=medium.density, scheme=medium.scheme,
                         wavelength=medium.wavelength, gamma_ref=medium.gamma_ref,
                         coupling_scale=medium.coupling_scale, etas=medium.etas)
        grid = Grid.for_medium(med, nz=nz, duration=duration)
        prepared = prepare_medium(med, controls, grid)
        fit_deltas = np.linspace(-window, window, fit_points)
        curve, failures = _run_sweep(med, controls, grid, fit_deltas, suppress,
                                     amplitude, prepared, args.jobs)
        if failures:
            d, name, msg = failures[0]
            raise SimulationError(f"sweep point delta={d} failed during WLC solve: {name}: {msg}")
        return fit_dispersion(curve, med.omega0, window=window).n_g

    solution = solve_wlc_geometry(ng_of_length, cavity, initial_length=medium.length)
    med = MediumSpec(length=solution.length, density=medium.density, scheme=medium.scheme,
                     wavelength=medium.wavelength, gamma_ref=medium.gamma_ref,
                     coupling_scale=medium.coupling_scale, etas=medium.etas)
    grid = Grid.for_medium(med, nz=nz, duration=duration)
    prepared = prepare_medium(med, controls, grid)
    curve, failures = _run_sweep(med, controls, grid, sweep_deltas(cfg), suppress,
                                 amplitude, prepared, args.jobs)
    if failures:
        d, name, msg = failures[0]
        raise SimulationError(f"sweep point delta={d} failed: {name}: {msg}")
    return curve, solution


def run_cavity(cfg: ScenarioConfig, args) -> int:
    medium = build_medium(cfg)
    controls = build_controls(cfg)
    cavity = build_cavity(cfg, medium)
    include_absorption = cfg.get_bool("cavity", "include_absorption", True)
    points = cfg.get_int("profile", "points", 2001)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    gamma0 = empty_bandwidth(cavity)

    if args.empty:
        deltas = np.linspace(-4 * gamma0, 4 * gamma0, points)
        profile = buildup_profile(cavity, None, deltas)
        header = {
            "scenario": "cavity-empty",
            "gamma0_rad_s": _fmt(gamma0),
            "fwhm_rad_s": _fmt(fwhm(profile)),
        }
        for (s, k), v in cfg.items():
            header[f"config_{s}.{k}"] = v
        write_profile_csv(profile, out / "profile_empty.csv", header=header)
        return 0

    curve, solution = _solved_curve(cfg, args, medium, controls, cavity)
    window = cfg.get_float("fit", "window", 0.5)
    fit = fit_dispersion(curve, cavity.omega0, window=window)
    if not getattr(args, "curve", None):
        write_curve_csv(curve, out / ("curve_no4wm.csv" if args.suppress_4wm else "curve.csv"),
                        header={"wlc_length_m": curve.length})

    profile_cavity = cavity.mismatched(args.mismatch) if args.mismatch else cavity
    gamma1_est = None
    if fit.n3 > 0:
        gamma1_est = wlc_bandwidth_analytic(cavity, curve.length, fit.n3)
    span = max(3 * gamma0, 2.5 * (gamma1_est or 0.0))
    span = min(span, 0.98 * curve.deltas[-1] * curve.gamma_ref)
    deltas = np.linspace(-span, span, points)
    profile = buildup_profile(profile_cavity, curve, deltas,
                              include_absorption=include_absorption)
    width = fwhm(profile)
    header = {
        "scenario": "cavity",
        "suppress_4wm": args.suppress_4wm,
        "mismatch": args.mismatch,
        "include_absorption": include_absorption,
        "gamma0_rad_s": _fmt(gamma0),
        "fwhm_rad_s": _fmt(width),
        "enhancement": _fmt(width / gamma0),
        "medium_length_m": _fmt(curve.length),
        "n_g": _fmt(fit.n_g),
        "n3_s3": _fmt(fit.n3),
        "flatness_coefficient": _fmt(flatness_coefficient(
            profile_cavity, curve, include_absorption=include_absorption)),
    }
    if solution is not None:
        header["wlc_iterations"] = solution.iterations
        header["wlc_residual"] = _fmt(solution.residual)
    for (s, k), v in cfg.items():
        header[f"config_{s}.{k}"] = v
    tags = []
    if args.suppress_4wm:
        tags.append("no4wm")
    if args.mismatch:
        tags.append(f"mismatch{args.mismatch:+g}")
    name = "profile" + ("_" + "_".join(tags) if tags else "_matched") + ".csv"
    write_profile_csv(profile, out / name, header=header)
    return 0


def run_scaling(cfg: ScenarioConfig, args) -> int:
    medium = build_medium(cfg)
    controls = build_controls(cfg)
    cavity = build_cavity(cfg, medium)
    include_absorption = cfg.get_bool("cavity", "include_absorption", True)
    finesses = cfg.get_floats("scaling", "finesses", [100.0, 316.0, 1000.0, 3162.0, 10000.0])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    curve, solution = _solved_curve(cfg, args, medium, controls, cavity)
    result = enhancement_scaling(curve, cavity, finesses,
                                 include_absorption=include_absorption)
    header = {
        "scenario": "scaling",
        "suppress_4wm": args.suppress_4wm,
        "include_absorption": include_absorption,
        "gamma_ref_rad_s": _fmt(curve.gamma_ref),
        "medium_length_m": _fmt(curve.length),
        "finesses": ",".join(f"{f:g}" for f in finesses),
    }
    for (s, k), v in cfg.items():
        header[f"config_{s}.{k}"] = v
    suffix = "_no4wm" if args.suppress_4wm else ""
    write_scaling_csv(result, out / f"scaling{suffix}.csv", header=header)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wlcsim",
        description="Four-wave-mixing white-light cavity simulator",
    )
    parser.add_argument("--version", action="version", version=f"wlcsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="scenario config file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--set", action="append", default=[], metavar="SEC.KEY=VALUE",
                       help="override a config value")
        p.add_argument("--suppress-4wm", action="store_true",
                       help="clamp the generated field to zero")
        p.add_argument("--jobs", type=int, default=1,
                       help="max concurrent sweep worker processes")

    p = sub.add_parser("propagate", help="single propagation run with optional snapshots")
    common(p)
    p.add_argument("--snapshots", type=int, default=0, help="number of snapshot frames")
    p.set_defaults(func=run_propagate)

    p = sub.add_parser("susceptibility", help="effective susceptibility sweep")
    common(p)
    p.set_defaults(func=run_susceptibility)

    p = sub.add_parser("group-index", help="pulse group index vs detuning")
    common(p)
    p.set_defaults(func=run_group_index)

    p = sub.add_parser("cavity", help="WLC resonance profile")
    common(p)
    p.add_argument("--mismatch", type=float, default=0.0,
                   help="fractional cavity-length mismatch")
    p.add_argument("--curve", help="reuse a susceptibility curve CSV")
    p.add_argument("--empty", action="store_true", help="empty-cavity profile only")
    p.set_defaults(func=run_cavity)

    p = sub.add_parser("scaling", help="bandwidth enhancement vs empty bandwidth")
    common(p)
    p.add_argument("--curve", help="reuse a susceptibility curve CSV")
    p.set_defaults(func=run_scaling)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = parse_config(args.config)
        for override in args.set:
            if "=" not in override:
                raise ConfigError(f"--set {override!r} must look like section.key=value")
            dotted, _, value = override.partition("=")
            cfg.set_override(dotted, value)
        return args.func(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except SimulationError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
