"""``rydspec`` command-line interface.

Exit codes: 0 success, 2 usage or domain error, 3 solver/fit failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .angular import HalfInt
from .constants import EA0, TWO_PI
from .coupling import eigen_report, linear_hamiltonian, predict_neig
from .eit import Doppler, angle_scan, spectrum_scan
from .electrometry import TwoGaussianFit, splitting_to_field
from .exceptions import DomainError, NumericalError
from .plotting import line_chart
from .serialization import (
    config_from_dict,
    dumps,
    load_config,
    read_trace_csv,
    run_manifest,
    validate,
    write_csv,
    write_trace_csv,
)

EXIT_OK, EXIT_USAGE, EXIT_SOLVER = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _half(text):
    try:
        return HalfInt.of(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _emit(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load(args):
    if args.config and args.preset:
        raise DomainError("give either a config file or --preset, not both")
    if args.config:
        return load_config(args.config)
    if args.preset:
        data = {"preset": args.preset}
        return config_from_dict(data), json.dumps(data, sort_keys=True).encode()
    raise DomainError("a config file or --preset is required")


def _grid(args):
    if args.points < 1:
        raise DomainError("--points must be >= 1")
    if args.points > 1 and not args.stop_hz > args.start_hz:
        raise DomainError("--stop-hz must exceed --start-hz")
    return np.linspace(args.start_hz, args.stop_hz, args.points) * TWO_PI


def _doppler(args):
    if not args.doppler:
        return None
    return Doppler(args.doppler_points, args.doppler_span)


def _write_manifest(out, command, raw):
    record = run_manifest(command, raw)
    validate(record, "manifest")
    Path(f"{out}.manifest.json").write_text(dumps(record))


def cmd_neig(args):
    n = predict_neig(args.j, args.jp)
    record = {"J": str(args.j), "J_prime": str(args.jp), "n_eig": n}
    validate(record, "neig")
    sys.stdout.write(f"{n}\n")
    sys.stdout.write(json.dumps(record, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_eigs(args):
    rabi = TWO_PI * args.rabi_hz
    rep = eigen_report(linear_hamiltonian(args.j, args.jp, rabi, math.radians(args.theta_deg)))
    lines = ["eigenvalue_hz,multiplicity"]
    for val, mult in zip(rep.eigenvalues, rep.multiplicities):
        hz = val / TWO_PI
        # suppress round-off on zero eigenvalues
        if abs(val) <= rep.dedup_tolerance:
            hz = 0.0
        lines.append(f"{hz!r},{mult}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_spectrum(args):
    config, raw = _load(args)
    trace = spectrum_scan(config, _grid(args), _doppler(args))
    write_trace_csv(args.out, trace)
    _write_manifest(args.out, "spectrum", raw)
    if args.plot:
        svg = line_chart(
            [(trace.coupling_detunings / TWO_PI / 1e6, trace.transmission, f"theta = {math.degrees(config.mw_theta):g} deg")],
            xlabel="coupling detuning (MHz)",
            ylabel="probe transmission (norm.)",
        )
        Path(args.plot).write_text(svg)
    return EXIT_OK


def _theta_grid(args):
    if args.theta_step <= 0:
        raise DomainError("--theta-step must be positive")
    if args.theta_stop < args.theta_start:
        raise DomainError("--theta-stop must not be below --theta-start")
    n = int(math.floor((args.theta_stop - args.theta_start) / args.theta_step + 1e-9)) + 1
    return args.theta_start + args.theta_step * np.arange(n)


def cmd_angle_scan(args):
    config, raw = _load(args)
    thetas_deg = _theta_grid(args)
    grid = _grid(args)
    scan = angle_scan(config, np.radians(thetas_deg), grid, _doppler(args))
    out = Path(args.out)

    rows = []
    for th, trace in zip(thetas_deg, scan.traces):
        for det, t in zip(trace.coupling_detunings / TWO_PI, trace.transmission):
            rows.append((float(th), det, t))
    write_csv(out, ["theta_deg", "coupling_detuning_hz", "transmission"], rows)

    centers = []
    for trace in scan.traces:
        est = TwoGaussianFit().fit(trace.coupling_detunings, trace.transmission)
        centers.append(est.centers_ / TWO_PI)
    centers = np.array(centers)
    splitting = centers[:, 1] - centers[:, 0]
    centers_path = out.with_name(out.stem + "_centers.csv")
    write_csv(
        centers_path,
        ["theta_deg", "center_low_hz", "center_high_hz", "splitting_hz"],
        [(float(t), c[0], c[1], s) for t, c, s in zip(thetas_deg, centers, splitting)],
    )
    mean_centers = centers.mean(axis=0)
    summary = {
        "n_angles": int(len(thetas_deg)),
        "mean_splitting_hz": float(splitting.mean()),
        "std_splitting_hz": float(splitting.std()),
        "mean_centers_hz": [float(c) for c in mean_centers],
        "max_center_deviation_hz": float(np.max(np.abs(centers - mean_centers))),
    }
    validate(summary, "angle_scan_summary")
    out.with_name(out.stem + "_summary.json").write_text(dumps(summary))
    _write_manifest(out, "angle-scan", raw)
    if args.plot:
        svg = line_chart(
            [
                (thetas_deg, centers[:, 0] / 1e6, "lower peak"),
                (thetas_deg, centers[:, 1] / 1e6, "upper peak"),
            ],
            xlabel="microwave polarization angle (deg)",
            ylabel="fitted peak center (MHz)",
        )
        Path(args.plot).write_text(svg)
    return EXIT_OK


def cmd_fit(args):
    x, y = read_trace_csv(args.trace)
    fit = TwoGaussianFit().fit(x, y).to_peak_fit()
    record = fit.to_record()
    validate(record, "peak_fit")
    _emit(dumps(record), args.out)
    return EXIT_OK


def cmd_field(args):
    dipole = args.dipole_si if args.dipole_si is not None else args.dipole_atomic * EA0
    est = splitting_to_field(args.splitting_hz, dipole)
    record = est.to_record()
    validate(record, "field_estimate")
    _emit(dumps(record), args.out)
    return EXIT_OK


def _add_grid_args(p):
    p.add_argument("config", nargs="?", help="ladder config JSON file")
    p.add_argument("--preset", help="use a named preset instead of a config file")
    p.add_argument("--start-hz", type=float, default=-80e6)
    p.add_argument("--stop-hz", type=float, default=80e6)
    p.add_argument("--points", type=int, default=401)
    p.add_argument("--doppler", action="store_true", help="thermal velocity average")
    p.add_argument("--doppler-points", type=int, default=61)
    p.add_argument("--doppler-span", type=float, default=3.0, help="grid half-width in thermal widths")
    p.add_argument("--plot", help="write an SVG chart here")


def build_parser():
    parser = _Parser(prog="rydspec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("neig", help="number of distinct dressed eigenenergies")
    p.add_argument("--j", type=_half, required=True)
    p.add_argument("--jp", type=_half, required=True)
    p.set_defaults(func=cmd_neig)

    p = sub.add_parser("eigs", help="eigenvalues of the microwave coupling")
    p.add_argument("--j", type=_half, required=True)
    p.add_argument("--jp", type=_half, required=True)
    p.add_argument("--rabi-hz", type=float, required=True, help="rabi_0 / 2 pi")
    p.add_argument("--theta-deg", type=float, default=0.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eigs)

    p = sub.add_parser("spectrum", help="EIT transmission trace")
    _add_grid_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("angle-scan", help="spectra versus microwave polarization angle")
    _add_grid_args(p)
    p.add_argument("--theta-start", type=float, default=0.0)
    p.add_argument("--theta-stop", type=float, default=360.0)
    p.add_argument("--theta-step", type=float, default=2.5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_angle_scan)

    p = sub.add_parser("fit", help="two-Gaussian fit of a trace CSV")
    p.add_argument("trace")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("field", help="field amplitude from an AT splitting")
    p.add_argument("--splitting-hz", type=float, required=True)
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--dipole-si", type=float, help="transition dipole in C m")
    grp.add_argument("--dipole-atomic", type=float, help="transition dipole in e a0")
    p.add_argument("--out")
    p.set_defaults(func=cmd_field)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"rydspec {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"rydspec {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"rydspec {args.command}: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
