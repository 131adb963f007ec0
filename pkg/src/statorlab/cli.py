"""Command-line front end.

Subcommands mirror the pipeline stages:

* ``modes``    solve (and optionally calibrate) the eigenbasis, dump tables
* ``respond``  drive the stator, export probe histories and settling report
* ``fringes``  render time-averaged and stroboscopic images
* ``fit``      run the circle-sampling fit pipeline across strobe phases
* ``report``   compare computed frequencies against the embedded reference

Exit codes: 0 success, 2 configuration error, 3 numerical/domain error.
The output directory comes from the config, overridable by ``--out`` or
the ``STATORLAB_OUT`` environment variable.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__, analysis, holography, ioutil, reference
from .config import (apply_overrides, default_config, deep_merge, load_config,
                     validate_config)
from .dynamics import (DriveConfig, calibrate_force_per_volt, field_envelope,
                       probe, respond, settling_damping_ratio,
                       snapshot_at_strobe)
from .errors import ConfigError, StatorLabError
from .geometry import homogenize
from .grids import RasterGrid, RingGrid
from .holography import OpticalConfig
from .modal import calibrate, format_radial_profiles, solve_modes


def _merge_config(args) -> dict:
    cfg = default_config()
    if args.config:
        cfg = deep_merge(cfg, load_config(args.config))
    cfg = apply_overrides(cfg, args.set or [])
    if args.out:
        cfg.setdefault("output", {})["directory"] = args.out
    elif os.environ.get("STATORLAB_OUT"):
        cfg.setdefault("output", {})["directory"] = os.environ["STATORLAB_OUT"]
    return cfg


def _solve_basis(plan):
    plate = homogenize(plan["geometry"], plan["material"])
    modal = plan["modal"]
    if modal["calibrate"]:
        result = calibrate(
            plate, target=(modal["calibration_target_n"],
                           modal["calibration_target_hz"]),
            disc=modal["discretization"])
        plate = result.plate
    basis = solve_modes(plate, n_max=modal["n_max"], n_min=modal["n_min"],
                        modes_per_n=modal["modes_per_n"],
                        disc=modal["discretization"])
    return plate, basis


def _resolve_drive(plan, basis):
    """Fill the 'resonance'/'auto' placeholders from the solved basis."""
    spec = plan["drive"]
    n_d = spec["electrode_harmonic"]
    freq = spec["drive_frequency"]
    if freq == "resonance":
        freq = basis.frequency_for(n_d)
    damping = spec["damping"]
    if damping == "settling-target":
        zeta = settling_damping_ratio(
            plan["analysis"]["settling_time_target"], freq,
            band=plan["analysis"]["settling_band"])
        basis = basis.with_damping(zeta)
    elif isinstance(damping, float):
        basis = basis.with_damping(damping)
    drive = DriveConfig(
        drive_frequency=freq,
        peak_to_peak_voltage=spec["peak_to_peak_voltage"],
        force_per_volt=1.0,
        electrode_harmonic=n_d,
        phase_layout=spec["phase_layout"])
    fpv = spec["force_per_volt"]
    if fpv == "auto":
        fpv = calibrate_force_per_volt(
            basis, drive, target_amplitude=spec["target_edge_amplitude"],
            radius=plan["geometry"].outer_radius)
    import dataclasses
    drive = dataclasses.replace(drive, force_per_volt=fpv)
    dt = None if spec["dt"] == "auto" else spec["dt"]
    return basis, drive, dt


def _optics(plan) -> OpticalConfig:
    o = plan["optics"]
    return OpticalConfig(wavelength=o["wavelength"],
                         sensitivity_factor=o["sensitivity_factor"],
                         strobe_duty=o["strobe_duty"],
                         amplitude_clip=o["amplitude_clip"],
                         noise_sigma=o["noise_sigma"])


def _outpath(plan, name: str) -> str:
    return os.path.join(plan["output_dir"], name)


def cmd_modes(plan) -> int:
    _, basis = _solve_basis(plan)
    rows = [(m.n, m.orientation, m.family, m.frequency) for m in basis]
    ioutil.write_csv(_outpath(plan, "modes.csv"),
                     ("n", "orientation", "family", "frequency_hz"), rows)
    ioutil.atomic_write_text(_outpath(plan, "radial_profiles.txt"),
                             format_radial_profiles(basis))
    print(f"wrote {len(rows)} modes to {_outpath(plan, 'modes.csv')}")
    for m in basis:
        if m.orientation == "cos":
            print(f"  n={m.n} family={m.family}: {m.frequency:.2f} Hz")
    return 0


def cmd_respond(plan) -> int:
    _, basis0 = _solve_basis(plan)
    basis, drive, dt = _resolve_drive(plan, basis0)
    traj = respond(basis, drive, duration=plan["drive"]["duration"], dt=dt)
    ana = plan["analysis"]
    points = [(r, ana["probe_theta"]) for r in ana["probe_radii"]]
    series = probe(basis, traj, points, band=ana["settling_band"])

    rows = []
    for pid, s in enumerate(series):
        for t, u in zip(s.times, s.displacement):
            rows.append((float(t), pid, float(u)))
    ioutil.write_csv(_outpath(plan, "probes.csv"),
                     ("time_s", "point_id", "displacement_m"), rows)

    zeta = basis.damping_for(drive.electrode_harmonic)
    lines = [
        "probe settling report",
        f"drive: {drive.drive_frequency:.3f} Hz, {drive.peak_to_peak_voltage:g} "
        f"Vpp, harmonic n={drive.electrode_harmonic}, {drive.phase_layout}",
        f"damping ratio in effect: {zeta:.6f}",
        f"settling band: +-{100 * ana['settling_band']:g}% of steady amplitude",
        "",
    ]
    for pid, s in enumerate(series):
        settle = ("not settled within run"
                  if not np.isfinite(s.settling_time)
                  else f"{s.settling_time * 1e3:.3f} ms")
        lines.append(
            f"point {pid} (r={s.point[0] * 1e3:.2f} mm, theta={s.point[1]:.3f} "
            f"rad): steady {s.steady_amplitude * 1e9:.2f} nm, settling {settle}")
    ioutil.atomic_write_text(_outpath(plan, "settling.txt"),
                             "\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0


def cmd_fringes(plan) -> int:
    _, basis0 = _solve_basis(plan)
    basis, drive, dt = _resolve_drive(plan, basis0)
    optics = _optics(plan)
    grid = RasterGrid(inner_radius=plan["geometry"].inner_radius,
                      outer_radius=plan["geometry"].outer_radius,
                      pixels=plan["image"]["pixels"],
                      margin=plan["image"]["margin"])
    rng = np.random.default_rng(plan["seed"])

    # one time-averaged image per harmonic, each driven at its own resonance
    import dataclasses
    written = []
    for n in basis.harmonics():
        if n < 1:
            continue
        drive_n = dataclasses.replace(drive, drive_frequency=basis.frequency_for(n),
                                      electrode_harmonic=n)
        dt_n = 1.0 / (40.0 * max(m.frequency for m in basis))
        traj_n = respond(basis, drive_n, duration=10.0 * dt_n, dt=dt_n)
        env = field_envelope(basis, traj_n, grid, t=None)
        img = holography.time_averaged(env, optics)
        name = f"timeavg_md{n}.pgm"
        ioutil.write_pgm(_outpath(plan, name), img.intensity, img.mask)
        written.append(name)

    # stroboscopic pair at the configured offset for the driven harmonic
    traj = respond(basis, drive, duration=plan["drive"]["duration"], dt=dt)
    offset = plan["analysis"]["strobe_offset_deg"]
    snap_a = snapshot_at_strobe(basis, traj, grid, 0.0)
    snap_b = snapshot_at_strobe(basis, traj, grid, offset)
    pmap = holography.stroboscopic(snap_a, snap_b, optics,
                                   strobe_phases=(0.0, offset),
                                   rng=rng if optics.noise_sigma > 0 else None)
    stem = f"strobe_md{drive.electrode_harmonic}_{0:g}d_{offset:g}d"
    ioutil.write_pgm(_outpath(plan, stem + ".pgm"),
                     ioutil.phase_to_unit(pmap.phase), pmap.mask)
    ioutil.write_field_f32(_outpath(plan, stem + ".f32"), pmap.phase,
                           dict(grid.describe(), strobe_a_deg=0.0,
                                strobe_b_deg=float(offset)))
    written += [stem + ".pgm", stem + ".f32"]
    print(f"wrote {', '.join(written)} to {plan['output_dir']}")
    return 0


def cmd_fit(plan) -> int:
    _, basis0 = _solve_basis(plan)
    basis, drive, dt = _resolve_drive(plan, basis0)
    optics = _optics(plan)
    ana = plan["analysis"]
    ring = RingGrid(radius=ana["circle_radius"], count=ana["circle_count"])
    rng = np.random.default_rng(plan["seed"])
    traj = respond(basis, drive, duration=plan["drive"]["duration"], dt=dt)

    offset = ana["strobe_offset_deg"]
    rows = []
    fits = []
    for s_deg in ana["strobe_phases_deg"]:
        snap_a = snapshot_at_strobe(basis, traj, ring, s_deg)
        snap_b = snapshot_at_strobe(basis, traj, ring, s_deg + offset)
        pmap = holography.stroboscopic(
            snap_a, snap_b, optics, strobe_phases=(s_deg, s_deg + offset),
            rng=rng if optics.noise_sigma > 0 else None)
        diff = holography.unwrap_to_displacement(pmap, optics)
        sample = analysis.CircleSample.from_field(diff, source="hologram")
        n = analysis.detect_mode_number(sample)
        fit = analysis.fit_eq1(sample, n)
        fits.append((s_deg, fit))
        rows.append((float(s_deg), fit.n, fit.A, fit.phi, fit.delta,
                     fit.rms_residual))
    ioutil.write_csv(_outpath(plan, "fit.csv"),
                     ("strobe_phase_deg", "n", "A_m", "phi_rad", "delta_m",
                      "residual_m"), rows)

    track = analysis.track_strobe_phase(fits)
    asym = analysis.asymmetry_index(fits)
    lines = [
        "strobe-phase fit summary",
        f"circle radius: {ana['circle_radius'] * 1e3:.2f} mm "
        f"({ana['circle_count']} samples)",
        f"detected harmonic: n={track.n}",
        f"classification: {track.classification}",
        f"rotation rate: {track.rotation_rate:+.4f} spatial deg per strobe deg",
        f"standing-wave ratio: {track.standing_wave_ratio:.4f}",
        f"amplitude CV: {track.amplitude_cv:.4%}",
        f"asymmetry index: {asym:.3e}",
    ]
    ioutil.atomic_write_text(_outpath(plan, "fit_summary.txt"),
                             "\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0


def cmd_report(plan) -> int:
    _, basis = _solve_basis(plan)
    computed = []
    for n in range(1, 8):
        try:
            computed.append(basis.frequency_for(n))
        except StatorLabError:
            break
    text = reference.build_report(computed)
    ioutil.atomic_write_text(_outpath(plan, "report.txt"), text)
    print(text, end="")
    return 0


COMMANDS = {
    "modes": cmd_modes,
    "respond": cmd_respond,
    "fringes": cmd_fringes,
    "fit": cmd_fit,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="statorlab",
        description="Modal simulation and holographic-observable synthesis "
                    "for traveling-wave ultrasonic stators.")
    parser.add_argument("--version", action="version",
                        version=f"statorlab {__version__}")
    parser.add_argument("--config", help="JSON config file merged over defaults")
    parser.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config entry by dotted path, e.g. "
                             "--set drive.peak_to_peak_voltage=200")
    parser.add_argument("--out", help="output directory (overrides config and "
                                      "STATORLAB_OUT)")
    parser.add_argument("command", choices=sorted(COMMANDS),
                        help="pipeline stage to run")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _merge_config(args)
        plan = validate_config(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](plan)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except StatorLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
