"""Command-line front end.

Subcommands: ``point`` (one configuration, human-readable plus JSON),
``sweep`` (parameter sweep to CSV), ``figure`` (panel datasets for one
figure id), ``validate`` (oracle-equivalence and property suites).

Exit codes: 0 success, 1 validation-suite failure, 2 usage or parameter
error, 3 singular point on ``point``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import metrology as met
from . import sweep as sweep_mod
from . import validation
from .core import Detector, ExperimentParams, Scheme
from .errors import NoFinitePointError, PamziError, ZeroSlopeError


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, default=1.0,
                   help="coherent amplitude |alpha|")
    p.add_argument("--theta-alpha", type=float, default=0.0,
                   help="coherent phase (radians)")
    p.add_argument("--r", type=float, default=0.0, help="squeezing parameter")
    p.add_argument("--phi", type=float, default=math.pi / 2,
                   help="interferometer phase (radians)")
    p.add_argument("--T", type=float, default=1.0,
                   help="internal transmittance of both arms")
    p.add_argument("--eta", type=float, default=1.0,
                   help="mode-a transmittance for the lossy Fisher information")
    p.add_argument("--m", type=int, default=0, help="photons added")
    p.add_argument("--scheme", choices=["original", "a", "b"],
                   default="original")
    p.add_argument("--config", type=str, default=None,
                   help="key=value file; explicit flags win")


def _params_from(args) -> ExperimentParams:
    return ExperimentParams(alpha_mag=args.alpha, theta_alpha=args.theta_alpha,
                            r=args.r, phi=args.phi, T=args.T, eta=args.eta,
                            m=args.m, scheme=Scheme(args.scheme))


def _load_config(path: str) -> dict[str, str]:
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line without '=': {line!r}")
            key, val = line.split("=", 1)
            values[key.strip()] = val.strip()
    return values


def _merge_config(args, explicit: set[str]) -> None:
    """Fill args from the config file; flags given on the command line win."""
    if not getattr(args, "config", None):
        return
    conf = _load_config(args.config)
    casts = {"alpha": float, "theta-alpha": float, "r": float, "phi": float,
             "T": float, "eta": float, "m": int, "scheme": str,
             "detector": str, "optimize-phi": lambda s: s.lower() in ("1", "true", "yes"),
             "out": str, "grid": str, "axis": str, "start": float,
             "stop": float, "steps": int, "values": str, "schemes": str,
             "ms": str, "detectors": str, "id": str}
    for key, raw in conf.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr) or attr in explicit:
            continue
        if key not in casts:
            raise ValueError(f"unknown config key {key!r}")
        setattr(args, attr, casts[key](raw))


def cmd_point(args) -> int:
    params = _params_from(args)
    scheme = params.scheme
    detector = Detector(args.detector)
    try:
        if args.optimize_phi:
            phi_opt, rep = met.optimize_phase(detector, scheme, params)
            params = params.with_(phi=phi_opt)
        else:
            rep = met.sensitivity(detector, scheme, params)
    except (ZeroSlopeError, NoFinitePointError) as exc:
        print(f"singular operating point: {exc}", file=sys.stderr)
        return 3
    qr = met.qfi_report(scheme, params)
    print(f"scheme={scheme.value} detector={detector.value} phi={rep.phi:.12g}")
    print(f"  delta_phi = {rep.delta_phi:.12g}   sigma = {rep.sigma:.12g}   "
          f"slope = {rep.slope:.12g}")
    print(f"  n_total = {rep.n_total:.12g}   sql = {rep.sql:.12g}   "
          f"hl = {rep.hl:.12g}")
    print(f"  qfi = {qr.f_ideal:.12g}   qfi_lossy(eta={params.eta:g}) = "
          f"{qr.f_lossy:.12g}")
    print(f"  qcrb = {qr.qcrb_ideal:.12g}   qcrb_lossy = {qr.qcrb_lossy:.12g}")
    record = {
        "scheme": scheme.value, "detector": detector.value, "m": params.m,
        "alpha": params.alpha_mag, "theta_alpha": params.theta_alpha,
        "r": params.r, "phi": rep.phi, "T": params.T, "eta": params.eta,
        "delta_phi": rep.delta_phi, "sigma": rep.sigma, "slope": rep.slope,
        "n_total": rep.n_total, "sql": rep.sql, "hl": rep.hl,
        "f_ideal": qr.f_ideal, "f_lossy": qr.f_lossy,
        "qcrb_ideal": qr.qcrb_ideal, "qcrb_lossy": qr.qcrb_lossy,
    }
    print(json.dumps(record))
    return 0


def _parse_list(text: str, cast):
    return tuple(cast(tok) for tok in text.split(",") if tok.strip())


def cmd_sweep(args) -> int:
    if args.values:
        values = _parse_list(args.values, float)
    else:
        if args.stop is None:
            raise ValueError("sweep needs --values or --start/--stop/--steps")
        values = sweep_mod.sweep_range(args.start, args.stop, args.steps)
    schemes = tuple(Scheme(s) for s in _parse_list(args.schemes, str))
    detectors = tuple(Detector(d) for d in _parse_list(args.detectors, str))
    ms = _parse_list(args.ms, int)
    spec = sweep_mod.SweepSpec(axis=args.axis, values=values,
                               fixed=_params_from(args), schemes=schemes,
                               ms=ms, detectors=detectors,
                               optimize_phi=args.optimize_phi)
    rows = sweep_mod.run_sweep(spec)
    sweep_mod.write_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def cmd_figure(args) -> int:
    paths = sweep_mod.run_figure(args.id, args.out, steps=args.steps)
    for path in paths:
        print(path)
    return 0


def cmd_validate(args) -> int:
    return validation.run_validation(args.grid)


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="pamzi",
        description="Phase sensitivity and Fisher information of a lossy "
                    "interferometer with photon addition")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("point", help="evaluate a single configuration")
    _add_param_flags(p)
    p.add_argument("--detector", choices=["idiff", "homodyne"],
                   default="idiff")
    p.add_argument("--optimize-phi", action="store_true")
    p.set_defaults(func=cmd_point)

    p = sub.add_parser("sweep", help="sweep one axis and write a CSV")
    _add_param_flags(p)
    p.add_argument("--axis", choices=list(sweep_mod.AXES), required=True)
    p.add_argument("--start", type=float, default=0.0)
    p.add_argument("--stop", type=float, default=None)
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--values", type=str, default=None,
                   help="explicit comma-separated axis values")
    p.add_argument("--schemes", type=str, default="a,b")
    p.add_argument("--ms", type=str, default="0,1,2,3")
    p.add_argument("--detectors", type=str, default="idiff,homodyne")
    p.add_argument("--optimize-phi", action="store_true")
    p.add_argument("--out", type=str, required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("figure", help="write the panel CSVs for one figure")
    p.add_argument("--id", required=True, choices=list(sweep_mod.FIGURE_IDS))
    p.add_argument("--out", type=str, required=True, help="output directory")
    p.add_argument("--steps", type=int, default=None,
                   help="override the per-figure axis resolution")
    p.add_argument("--config", type=str, default=None)
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("validate", help="run the validation suites")
    p.add_argument("--grid", choices=["quick", "full"], default="quick")
    p.add_argument("--config", type=str, default=None)
    p.set_defaults(func=cmd_validate)
    return top


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    args = parser.parse_args(argv)
    explicit = {tok.split("=", 1)[0].lstrip("-").replace("-", "_")
                for tok in argv if tok.startswith("--")}
    try:
        _merge_config(args, explicit)
        return args.func(args)
    except PamziError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
