"""Command-line front end.

Subcommands: couple | slope | map | threshold | fit | thin | oracle | limit1d.
Angles accept a "pi" suffix (e.g. 0.4pi); bare numbers are radians. Lengths
are in wavelengths, rates in units of the single-atom decay rate. Exit codes:
0 success, 1 numerical-consistency failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .coupling import build_coupling
from .criteria import (
    DriveSpec,
    curvature_directional_inverted,
    curvature_total_inverted,
    emission_wavevector,
    slope_directional_inverted,
    slope_directional_partial,
    slope_total_inverted,
    slope_total_partial,
)
from .errors import NumericalConsistencyError
from .export import (
    write_coupling_csv,
    write_json,
    write_region_csv,
    write_region_pgm,
)
from .geometry import (
    cubic_lattice,
    double_line_lattice,
    line_lattice,
    load_cloud,
    save_cloud,
    square_lattice,
    thin_cloud,
)
from .lattice import (
    fit_scaling,
    infinite_chain_limit,
    slope_directional_lattice,
    slope_total_lattice,
    standard_spec,
    superradiance_threshold,
)
from .oracle import slope_check
from .scan import FAST_FAMILIES, grid, map_n_d, map_phi_d


def parse_angle(text):
    """Radians, with '0.4pi' style multiples accepted."""
    text = str(text).strip()
    if text.endswith("pi"):
        head = text[:-2].strip()
        factor = 1.0 if head in ("", "+") else (-1.0 if head == "-" else float(head))
        return factor * np.pi
    return float(text)


def _default_threads():
    env = os.environ.get("SUPERRAD_THREADS")
    if env:
        return int(env)
    return os.cpu_count() or 1


def _add_geometry_args(sub):
    sub.add_argument("--family", choices=["line", "double_line", "square", "cubic", "file"],
                     default="line")
    sub.add_argument("--n", type=int, help="atom count (line/double_line)")
    sub.add_argument("--n1", type=int, help="atoms per axis (square/cubic)")
    sub.add_argument("--d", type=float, help="lattice spacing in wavelengths")
    sub.add_argument("--cloud-file", help="positions file for --family file")


def _build_cloud(args):
    fam = args.family
    if fam == "file":
        if not args.cloud_file:
            raise ValueError("--family file needs --cloud-file")
        return load_cloud(args.cloud_file)
    if args.d is None:
        raise ValueError("--d is required for lattice families")
    if fam == "line":
        if args.n is None:
            raise ValueError("--n is required for line")
        return line_lattice(args.n, args.d)
    if fam == "double_line":
        if args.n is None:
            raise ValueError("--n is required for double_line")
        return double_line_lattice(args.n, args.d)
    if fam == "square":
        if args.n1 is None:
            raise ValueError("--n1 is required for square")
        return square_lattice(args.n1, args.d)
    if args.n1 is None:
        raise ValueError("--n1 is required for cubic")
    return cubic_lattice(args.n1, args.d)


def _provenance(args, **extra):
    # output locations are not part of the run's physics parameters; leaving
    # them out keeps artifacts byte-identical wherever they are written
    skip = {"func", "out", "csv", "pgm", "infile"}
    params = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    prov = {
        "tool": f"superrad {__version__}",
        "subcommand": args.subcommand,
        "params": json.dumps(params, default=str, sort_keys=True),
    }
    if getattr(args, "seed", None) is not None:
        prov["seed"] = args.seed
    prov.update(extra)
    return prov


def _emit_json(record, args, prov):
    if args.out:
        write_json(record, args.out, provenance=prov)
    else:
        out = dict(record)
        out["provenance"] = prov
        json.dump(out, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")


def _cmd_couple(args):
    cloud = _build_cloud(args)
    coupling = build_coupling(cloud)
    write_coupling_csv(coupling, args.out, provenance=_provenance(args))
    return 0


def _cmd_slope(args):
    cloud = _build_cloud(args)
    alpha = parse_angle(args.alpha)
    phi = parse_angle(args.phi)
    theta = parse_angle(args.theta)
    k_f = emission_wavevector(phi, theta)
    fully = abs(alpha - np.pi) < 1e-12
    fast_ok = args.family in FAST_FAMILIES and fully and args.method != "naive"
    if fast_ok:
        n1 = args.n if args.family == "line" else args.n1
        spec = standard_spec(FAST_FAMILIES[args.family], args.d, n1)
        if args.kind == "total":
            result = slope_total_lattice(spec)
        else:
            result = slope_directional_lattice(spec, k_f)
        if args.second:
            coupling = build_coupling(cloud)
            if args.kind == "total":
                result = curvature_total_inverted(coupling)
            else:
                result = curvature_directional_inverted(coupling, cloud, k_f)
    else:
        coupling = build_coupling(cloud)
        if fully:
            if args.second:
                result = (curvature_total_inverted(coupling)
                          if args.kind == "total"
                          else curvature_directional_inverted(coupling, cloud, k_f))
            elif args.kind == "total":
                result = slope_total_inverted(coupling)
            else:
                result = slope_directional_inverted(coupling, cloud, k_f)
        else:
            if args.second:
                raise ValueError("--second requires full inversion")
            ki_phi = parse_angle(args.ki_phi)
            ki_theta = parse_angle(args.ki_theta)
            drive = DriveSpec(alpha=alpha, k_i=emission_wavevector(ki_phi, ki_theta))
            if args.kind == "total":
                result = slope_total_partial(coupling, cloud, drive,
                                             n_cap=args.n_cap)
            else:
                result = slope_directional_partial(coupling, cloud, drive, k_f,
                                                   n_cap=args.n_cap)
    record = result.to_record(family=args.family, d=args.d,
                              scaled_slope=result.scaled_slope)
    _emit_json(record, args, _provenance(args))
    return 0


def _cmd_map(args):
    d_values = grid(args.d_min, args.d_max, args.d_step)
    if args.mode == "nd":
        n_values = list(range(args.n_min, args.n_max + 1, args.n_step))
        if args.family == "double_line":
            n_values = [n for n in n_values if n % 2 == 0]
        rmap = map_n_d(args.family, n_values, d_values, kind=args.kind,
                       phi=parse_angle(args.phi), threads=args.threads)
    else:
        phi_values = np.linspace(0.0, np.pi, args.phi_steps, endpoint=False)
        rmap = map_phi_d(args.family, args.n, phi_values, d_values,
                         threads=args.threads)
    if not args.csv and not args.pgm:
        raise ValueError("map needs at least one of --csv/--pgm")
    prov = _provenance(args)
    if args.csv:
        write_region_csv(rmap, args.csv, provenance=prov)
    if args.pgm:
        write_region_pgm(rmap, args.pgm, provenance=prov)
    return 0


def _cmd_threshold(args):
    k_f = None
    if args.kind == "directional":
        k_f = emission_wavevector(parse_angle(args.phi))
    res = superradiance_threshold(args.dim, args.d, kind=args.kind, k_f=k_f,
                                  n1_max=args.n1_max)
    record = {
        "dim": args.dim, "d": args.d, "kind": args.kind,
        "C": None, "D": None, "rms": None,
        "n1_threshold": res.n1,
        "largest_slope": res.largest_slope,
        "largest_slope_n1": res.largest_slope_n1,
        "found": res.found,
    }
    _emit_json(record, args, _provenance(args))
    return 0


def _cmd_fit(args):
    n1_values = None
    if args.n1_min is not None and args.n1_max is not None:
        n1_values = np.unique(
            np.round(np.geomspace(args.n1_min, args.n1_max, args.points)).astype(int)
        )
    fit = fit_scaling(args.dim, args.d, n1_values=n1_values)
    record = {
        "dim": args.dim, "d": args.d, "kind": "total",
        "C": fit.intercept, "D": fit.slope, "rms": fit.rms,
        "n1_threshold": None,
        "n1_values": [int(v) for v in fit.n1_values],
    }
    _emit_json(record, args, _provenance(args))
    return 0


def _cmd_thin(args):
    cloud = load_cloud(args.infile)
    thinned = thin_cloud(cloud, args.p, args.seed)
    prov = _provenance(args)
    comments = [f"{k}: {v}" for k, v in sorted(prov.items())]
    save_cloud(thinned, args.out, comments=comments)
    return 0


def _cmd_oracle(args):
    rng = np.random.default_rng(args.seed)
    n = args.n
    pos = rng.uniform(0.0, args.box, (n, 3))
    while _min_separation(pos) < 0.05:
        pos = rng.uniform(0.0, args.box, (n, 3))
    from .geometry import AtomCloud

    cloud = AtomCloud(pos, label=f"oracle seed={args.seed}")
    alpha = parse_angle(args.alpha)
    drive = DriveSpec(alpha=alpha)
    k_f = None
    if args.directional:
        k_f = emission_wavevector(parse_angle(args.phi))
    check = slope_check(cloud, drive, k_f=k_f)
    record = dict(check)
    record.update({"N": n, "alpha": alpha, "tol": args.tol})
    _emit_json(record, args, _provenance(args))
    if check["rel_diff"] > args.tol:
        raise NumericalConsistencyError(
            f"oracle disagreement {check['rel_diff']:.3e} > {args.tol}"
        )
    return 0


def _min_separation(pos):
    n = len(pos)
    if n < 2:
        return np.inf
    iu, ju = np.triu_indices(n, k=1)
    return float(np.min(np.linalg.norm(pos[iu] - pos[ju], axis=1)))


def _cmd_limit1d(args):
    k_f = None
    if args.kind == "directional":
        k_f = emission_wavevector(parse_angle(args.phi))
    res = infinite_chain_limit(args.d, kind=args.kind, k_f=k_f,
                               nu_max=args.nu_max)
    record = {
        "d": args.d, "kind": args.kind, "value": res.value,
        "nu_max": res.nu_max, "tail_bound": res.tail_bound,
        "conditionally_convergent": res.conditionally_convergent,
    }
    _emit_json(record, args, _provenance(args))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="superrad",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version",
                        version=f"superrad {__version__}")
    subs = parser.add_subparsers(dest="subcommand", required=True)

    sp = subs.add_parser("couple", help="dump Gamma/Omega matrices as CSV")
    _add_geometry_args(sp)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_couple)

    sp = subs.add_parser("slope", help="early-time rate slope for a geometry")
    _add_geometry_args(sp)
    sp.add_argument("--kind", choices=["total", "directional"], default="total")
    sp.add_argument("--phi", default="0", help="emission azimuth (radians or e.g. 0.4pi)")
    sp.add_argument("--theta", default="0.5pi", help="emission polar angle")
    sp.add_argument("--alpha", default="pi", help="inversion angle")
    sp.add_argument("--ki-phi", default="0", dest="ki_phi")
    sp.add_argument("--ki-theta", default="0", dest="ki_theta",
                    help="drive polar angle (default along z)")
    sp.add_argument("--second", action="store_true",
                    help="also evaluate the second derivative (full inversion)")
    sp.add_argument("--method", choices=["auto", "fast", "naive"], default="auto")
    sp.add_argument("--n-cap", type=int, default=400, dest="n_cap")
    sp.add_argument("--out", help="JSON path (default: stdout)")
    sp.set_defaults(func=_cmd_slope)

    sp = subs.add_parser("map", help="region map over (N, d) or (phi, d)")
    sp.add_argument("--mode", choices=["nd", "phid"], default="nd")
    sp.add_argument("--family", choices=["line", "double_line", "square", "cubic"],
                    default="line")
    sp.add_argument("--kind", choices=["total", "directional"], default="directional")
    sp.add_argument("--phi", default="0", help="emission azimuth for nd maps")
    sp.add_argument("--n", type=int, default=100, help="fixed size for phid maps")
    sp.add_argument("--n-min", type=int, default=2)
    sp.add_argument("--n-max", type=int, default=100)
    sp.add_argument("--n-step", type=int, default=1)
    sp.add_argument("--phi-steps", type=int, default=200)
    sp.add_argument("--d-min", type=float, default=0.05)
    sp.add_argument("--d-max", type=float, default=1.1)
    sp.add_argument("--d-step", type=float, default=0.005)
    sp.add_argument("--threads", type=int, default=None)
    sp.add_argument("--csv")
    sp.add_argument("--pgm")
    sp.set_defaults(func=_cmd_map)

    sp = subs.add_parser("threshold", help="smallest N1 with positive slope")
    sp.add_argument("--dim", type=int, required=True, choices=[1, 2, 3])
    sp.add_argument("--d", type=float, required=True)
    sp.add_argument("--kind", choices=["total", "directional"], default="total")
    sp.add_argument("--phi", default="0")
    sp.add_argument("--n1-max", type=int, default=4000, dest="n1_max")
    sp.add_argument("--out")
    sp.set_defaults(func=_cmd_threshold)

    sp = subs.add_parser("fit", help="large-N1 scaling fit of the scaled slope")
    sp.add_argument("--dim", type=int, required=True, choices=[2, 3])
    sp.add_argument("--d", type=float, required=True)
    sp.add_argument("--n1-min", type=int, dest="n1_min")
    sp.add_argument("--n1-max", type=int, dest="n1_max")
    sp.add_argument("--points", type=int, default=14)
    sp.add_argument("--out")
    sp.set_defaults(func=_cmd_fit)

    sp = subs.add_parser("thin", help="randomly remove atoms from a cloud file")
    sp.add_argument("--in", dest="infile", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.set_defaults(func=_cmd_thin)

    sp = subs.add_parser("oracle", help="compare a slope formula with direct "
                                        "master-equation integration")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--alpha", default="pi")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--box", type=float, default=0.75,
                    help="side of the random-position box in wavelengths")
    sp.add_argument("--directional", action="store_true")
    sp.add_argument("--phi", default="0")
    sp.add_argument("--tol", type=float, default=1e-4)
    sp.add_argument("--out")
    sp.set_defaults(func=_cmd_oracle)

    sp = subs.add_parser("limit1d", help="infinite-chain scaled slope")
    sp.add_argument("--d", type=float, required=True)
    sp.add_argument("--kind", choices=["total", "directional"], default="total")
    sp.add_argument("--phi", default="0")
    sp.add_argument("--nu-max", type=int, default=10000, dest="nu_max")
    sp.add_argument("--out")
    sp.set_defaults(func=_cmd_limit1d)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 2
    if not hasattr(args, "threads") or args.threads is None:
        if hasattr(args, "threads"):
            args.threads = _default_threads()
    try:
        return args.func(args)
    except NumericalConsistencyError as exc:
        print(f"numerical consistency failure: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, ValueError) else 1


if __name__ == "__main__":
    sys.exit(main())
