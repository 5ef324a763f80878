"""Command-line front door.

Subcommands: parse, fields, extrema, classical, verify, force, report.
Exit codes: 0 success, 1 input error, 2 numerical non-convergence,
3 refuted hard invariant.  Errors go to stderr as one JSON object.

A config file of `key = value` lines (long option names without the
leading dashes) can seed any flag; explicit flags take precedence.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import dynamics as dyn
from . import expr as ex
from . import geometry as geo
from . import optim
from .oplab import run_identity_suite
from .reports import atomic_write, canonical_json
from .surfaces import (
    InvalidParametersError,
    UnknownSurfaceError,
    builtin_surface,
    from_expression,
)


class CliInputError(ValueError):
    pass


_INPUT_ERRORS = (
    CliInputError,
    ex.ParseError,
    ex.UnknownIdentifierError,
    UnknownSurfaceError,
    InvalidParametersError,
    ValueError,
    KeyError,
    FileNotFoundError,
)

_NUMERIC_ERRORS = (
    geo.NoConvergenceError,
    geo.PrecisionLossError,
    dyn.ProjectionFailureError,
    dyn.StepTooLargeError,
    optim.NoCriticalPointFoundError,
)

_LENGTH_SUFFIXES = {"nm": 1e-9, "um": 1e-6, "mm": 1e-3, "m": 1.0}


def parse_length(text):
    """Length literal with optional suffix (m, mm, um, nm); meters out."""
    text = str(text).strip()
    for suffix in ("nm", "um", "mm", "m"):
        if text.endswith(suffix):
            return float(text[: -len(suffix)]) * _LENGTH_SUFFIXES[suffix]
    return float(text)


def parse_mass(text):
    """Mass literal with optional kg suffix; kilograms out."""
    text = str(text).strip()
    if text.endswith("kg"):
        return float(text[:-2])
    return float(text)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliInputError(message)


def _surface_from_args(args):
    if getattr(args, "expr", None):
        if args.surface:
            raise CliInputError("give either --surface or --expr, not both")
        params = {}
        for item in args.param or []:
            key, _, value = item.partition("=")
            if not _:
                raise CliInputError(f"bad --param '{item}', expected name=value")
            params[key.strip()] = float(value)
        return from_expression(args.expr, args.dim, params,
                               is_signed_distance=args.signed_distance)
    if not args.surface:
        raise CliInputError("a surface is required (--surface or --expr)")
    wanted = {"circle": ("a",), "sphere": ("a",), "cylinder": ("a",),
              "spheroid": ("a", "b"), "torus": ("R", "r"), "plane": ()}
    if args.surface not in wanted:
        raise UnknownSurfaceError(f"unknown surface '{args.surface}'")
    params = {}
    for name in wanted[args.surface]:
        value = getattr(args, name if name != "R" else "big_r", None)
        if value is None:
            raise CliInputError(f"surface '{args.surface}' needs --{name}")
        params[name] = value
    return builtin_surface(args.surface, params)


def _add_surface_flags(parser, lengths=False):
    cast = parse_length if lengths else float
    parser.add_argument("--surface", help="catalog surface name")
    parser.add_argument("--a", type=cast, help="radius / equatorial semi-axis")
    parser.add_argument("--b", type=cast, help="polar semi-axis (spheroid)")
    parser.add_argument("--R", dest="big_r", type=cast, help="torus ring radius")
    parser.add_argument("--r", type=cast, help="torus tube radius")
    parser.add_argument("--expr", help="implicit surface expression f(x) = 0")
    parser.add_argument("--dim", type=int, default=3,
                        help="ambient dimension for --expr")
    parser.add_argument("--param", action="append",
                        help="name=value binding for --expr (repeatable)")
    parser.add_argument("--signed-distance", action="store_true",
                        help="declare that --expr is a signed distance")


def _emit(args, payload, default_name=None):
    text = canonical_json(payload) + "\n"
    out = getattr(args, "out", None)
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _cmd_parse(args):
    tree = ex.parse_expression(args.expr_text)
    payload = {
        "expression": args.expr_text,
        "unparsed": ex.unparse(tree),
        "identifiers": sorted(ex.identifiers(tree)),
        "nodes": _count_nodes(tree),
    }
    _emit(args, payload)
    return 0


def _count_nodes(node):
    if isinstance(node, (ex.Num, ex.Name)):
        return 1
    if isinstance(node, (ex.Neg, ex.Call)):
        return 1 + _count_nodes(node.arg)
    if isinstance(node, ex.Pow):
        return 1 + _count_nodes(node.base)
    return 1 + _count_nodes(node.left) + _count_nodes(node.right)


def _cmd_fields(args):
    spec = _surface_from_args(args)
    policy = geo.ExtensionPolicy.parse(args.policy)
    resolution = None
    if args.resolution:
        parts = [int(p) for p in args.resolution.lower().split("x")]
        resolution = parts[0] if len(parts) == 1 else tuple(parts)
    samples = geo.sample_field(spec, policy, sampling=args.sampling,
                               resolution=resolution, count=args.count,
                               seed=args.seed)
    if args.format == "csv":
        text = geo.samples_to_csv(samples)
        if args.out:
            atomic_write(args.out, text)
        else:
            sys.stdout.write(text)
        return 0
    payload = {
        "surface": spec.name,
        "params": {k: float(v) for k, v in spec.params.items()},
        "policy": policy.value,
        "sampling": args.sampling,
        "seed": args.seed,
        "samples": [s.to_dict() for s in samples],
    }
    _emit(args, payload)
    return 0


def _cmd_extrema(args):
    spec = _surface_from_args(args)
    policy = geo.ExtensionPolicy.parse(args.policy)
    config = optim.SearchConfig(starts=args.starts, seed=args.seed, tol=args.tol)
    points = optim.find_critical_points(spec, args.field, policy, config)
    payload = {
        "surface": spec.name,
        "params": {k: float(v) for k, v in spec.params.items()},
        "field": args.field,
        "policy": policy.value,
        "seed": args.seed,
    }
    payload.update(optim.to_report(points))
    _emit(args, payload)
    return 0


def _cmd_classical(args):
    spec = _surface_from_args(args)
    x0 = np.array([float(v) for v in args.x0.split(",")])
    p0 = np.array([float(v) for v in args.p0.split(",")])
    config = dyn.IntegratorConfig(dt=args.dt, steps=args.steps, mass=args.mass)
    traj = dyn.integrate(spec, dyn.TrajectoryState(x0, p0, 0.0), config)
    eq1 = dyn.force_residual(spec, traj)
    eq2 = dyn.geodesic_form_residual(spec, traj)
    payload = {
        "surface": spec.name,
        "dt": args.dt,
        "steps": args.steps,
        "mass": args.mass,
        "energy_drift": float(np.abs(traj.energy - traj.energy[0]).max()),
        "constraint_max": float(traj.f_residual.max()),
        "tangency_max": float(traj.tangency_residual.max()),
        "force_law": {"max": eq1.max, "rms": eq1.rms},
        "geodesic_form": {"max": eq2.max, "rms": eq2.rms},
    }
    if args.trajectory:
        atomic_write(args.trajectory, traj.to_csv())
        payload["trajectory_csv"] = args.trajectory
    _emit(args, payload)
    return 0


def _cmd_verify(args):
    if args.surface == "circle":
        params = {"a": args.a if args.a is not None else 1.0}
    elif args.surface == "torus":
        params = {"R": args.big_r if args.big_r is not None else 2.0,
                  "r": args.r if args.r is not None else 1.0}
    else:
        raise CliInputError("verify runs on --surface circle or torus")
    sizes = [int(s) for s in args.grids.split(",")]
    identities = args.identities.split(",") if args.identities else None
    report = run_identity_suite(args.surface, params, sizes, hbar=args.hbar,
                                mu=args.mass, tol=args.tol,
                                identities=identities, seed=args.seed)
    _emit(args, report)
    return 3 if report["hard_failures"] else 0


def _cmd_force(args):
    mass = parse_mass(args.mass)
    if args.surface == "generic":
        if args.curvature_scale is None:
            raise CliInputError("--surface generic needs --curvature-scale")
        length = parse_length(args.curvature_scale)
        payload = {
            "surface": "generic",
            "mass_kg": mass,
            "curvature_scale_m": length,
            "force_scale_pN": geo.curvature_force_scale(mass, length),
        }
        _emit(args, payload)
        return 0
    spec = _surface_from_args(args)
    length_unit = min(v for v in spec.params.values()) if spec.params else 1.0
    # model surface uses parameters scaled by the length unit
    model_params = {k: v / length_unit for k, v in spec.params.items()}
    model_spec = builtin_surface(spec.name, model_params) if spec.name in (
        "circle", "sphere", "cylinder", "spheroid", "torus", "plane") else spec
    if args.at:
        point = np.array([float(v) for v in args.at.split(",")])
    else:
        point = _default_point(model_spec)
    policy = geo.ExtensionPolicy.parse(args.policy)
    sample = geo.curvature_sample(model_spec, point, policy)
    scale = geo.PhysicalScale(mass_kg=mass, length_unit_m=length_unit)
    force = geo.si_force_magnitude(sample, scale)
    payload = {
        "surface": spec.name,
        "mass_kg": mass,
        "length_unit_m": length_unit,
        "point_model": [float(v) for v in point],
        "lapM_model": sample.lapM,
        "chi_vector_N": [float(v) for v in force.vector_newton],
        "magnitude_pN": force.magnitude_piconewton,
    }
    _emit(args, payload)
    return 0


def _default_point(spec):
    if spec.name == "circle":
        return np.array([spec.params["a"], 0.0])
    if spec.name in ("sphere", "cylinder"):
        return np.array([spec.params["a"], 0.0, 0.0])
    if spec.name == "spheroid":
        return np.array([0.0, 0.0, spec.params["b"]])
    if spec.name == "torus":
        return np.array([spec.params["R"] + spec.params["r"], 0.0, 0.0])
    return np.array([0.0, 0.0, 0.0])


def _cmd_report(args):
    import json

    merged = {"reports": []}
    for path in args.inputs.split(","):
        with open(path) as handle:
            merged["reports"].append({"path": path, "content": json.load(handle)})
    _emit(args, merged)
    return 0


def build_parser():
    parser = _Parser(prog="geomforce",
                     description="Curvature-induced quantum force toolkit")
    parser.add_argument("--config", help="key = value file seeding any flag")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="validate an expression and print its AST summary")
    p.add_argument("expr_text", help="expression text")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_parse)

    p = sub.add_parser("fields", help="sample curvature fields over a surface")
    _add_surface_flags(p)
    p.add_argument("--policy", default="sd", help="sd or gn extension")
    p.add_argument("--sampling", default="grid", choices=["grid", "random"])
    p.add_argument("--resolution", help="grid resolution, e.g. 64 or 64x1")
    p.add_argument("--count", type=int, help="random sample count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", default="json", choices=["json", "csv"])
    p.add_argument("--out")
    p.set_defaults(func=_cmd_fields)

    p = sub.add_parser("extrema", help="locate critical points of a curvature field")
    _add_surface_flags(p)
    p.add_argument("--field", default="lapM", choices=list(geo.FIELD_NAMES))
    p.add_argument("--policy", default="gn")
    p.add_argument("--starts", type=int, default=24)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_extrema)

    p = sub.add_parser("classical", help="integrate constrained motion and check the force law")
    _add_surface_flags(p)
    p.add_argument("--x0", required=True, help="initial position, comma separated")
    p.add_argument("--p0", required=True, help="initial momentum, comma separated")
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--mass", type=float, default=1.0)
    p.add_argument("--trajectory", help="write the trajectory CSV here")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_classical)

    p = sub.add_parser("verify", help="run the operator identity verdict suite")
    p.add_argument("--surface", required=True, choices=["circle", "torus"])
    p.add_argument("--a", type=float)
    p.add_argument("--R", dest="big_r", type=float)
    p.add_argument("--r", type=float)
    p.add_argument("--grids", default="32,64,128")
    p.add_argument("--hbar", type=float, default=1.0)
    p.add_argument("--mass", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--identities", help="comma-separated identity ids (default all)")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("force", help="curvature-induced force in SI units")
    _add_surface_flags(p, lengths=True)
    p.add_argument("--mass", required=True, help="particle mass, kg (suffix optional)")
    p.add_argument("--curvature-scale", help="length scale for --surface generic")
    p.add_argument("--at", help="model-unit surface point, comma separated")
    p.add_argument("--policy", default="sd")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_force)

    p = sub.add_parser("report", help="merge prior JSON outputs into one summary")
    p.add_argument("--inputs", required=True, help="comma-separated JSON paths")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_report)

    return parser


def _load_config(path):
    pairs = []
    with open(path) as handle:
        for line in handle:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise CliInputError(f"bad config line: {line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            pairs.extend([f"--{key}", value])
    return pairs


def _diagnostic(code, error):
    payload = {
        "error": type(error).__name__,
        "message": str(error),
        "exit_code": code,
    }
    sys.stderr.write(canonical_json(payload) + "\n")


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        # config file seeds flags; explicit flags win because they come later
        if "--config" in argv:
            idx = argv.index("--config")
            if idx + 1 >= len(argv):
                raise CliInputError("--config needs a path")
            config_pairs = _load_config(argv[idx + 1])
            rest = argv[:idx] + argv[idx + 2:]
            for i, token in enumerate(rest):
                if not token.startswith("-"):
                    argv = rest[: i + 1] + config_pairs + rest[i + 1:]
                    break
            else:
                argv = rest + config_pairs
        parser = build_parser()
        args = parser.parse_args(argv)
        return args.func(args)
    except _NUMERIC_ERRORS as error:
        _diagnostic(2, error)
        return 2
    except _INPUT_ERRORS as error:
        _diagnostic(1, error)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
