"""Command-line interface.

Every subcommand writes its data to files and prints one ``key=value``
summary line on stdout; diagnostics go to stderr.  Exit codes: 0 success,
2 invalid input, 3 numerical failure.  Relative output paths are resolved
against ``$GIVENSTOUR_OUTPUT_DIR`` when it is set.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import data as dio
from .errors import NumericalFailureError, TourError
from .geodesic import geodesic_full_path, geodesic_info
from .givens import DEFAULT_DELTA, givens_full_path, givens_info
from .indexes import INDEXES, get_index, project
from .linalg import DEFAULT_TOLERANCES, frame_distance, is_orthonormal, orthonormalize, plane_distance
from .tour import TourConfig, grand_tour, guided_tour, random_frame

log = logging.getLogger("givenstour")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3
OUTPUT_ENV = "GIVENSTOUR_OUTPUT_DIR"
REPAIR_TOL = 1e-6
SYNTHETIC = {
    "sine": dio.generate_sine,
    "sine_in_noise": dio.generate_sine_in_noise,
    "two_factor": dio.generate_two_factor,
}


class InputError(TourError):
    pass


def _output(path):
    path = Path(path)
    base = os.environ.get(OUTPUT_ENV)
    if base and not path.is_absolute():
        path = Path(base) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _summary(**fields):
    parts = []
    for key, value in fields.items():
        if isinstance(value, float):
            value = dio.fmt(value)
        parts.append(f"{key}={value}")
    print(" ".join(parts))


def load_frame(path):
    """Read a frame file, repairing orthonormality errors up to 1e-6."""
    F = dio.read_frame(path)
    if F.shape[0] < F.shape[1]:
        raise InputError(f"{path}: frame has more columns than rows")
    if is_orthonormal(F, DEFAULT_TOLERANCES.orth_tol):
        return F
    if is_orthonormal(F, REPAIR_TOL):
        log.info("%s: re-orthonormalized a nearly orthonormal frame", path)
        return orthonormalize(F)
    err = np.max(np.abs(F.T @ F - np.eye(F.shape[1])))
    raise InputError(f"{path}: frame is not orthonormal (max |F'F - I| = {err:.3g})")


def _load_data(args):
    if args.input:
        ds = dio.load_csv(args.input, negate=args.negate or ())
    else:
        ds = SYNTHETIC[args.synthetic](n=args.n, seed=args.data_seed)
    if getattr(args, "standardize", False):
        ds = dio.standardize(ds)
    return ds


def _cols(text, p):
    try:
        cols = [int(c) - 1 for c in text.split(",")]
    except ValueError:
        raise InputError(f"column list must be comma-separated integers, got {text!r}") from None
    if any(not 0 <= c < p for c in cols) or len(set(cols)) != len(cols):
        raise InputError(f"columns {text!r} out of range for {p} variables")
    return cols


def _axis_frame(p, cols):
    F = np.zeros((p, len(cols)))
    for k, c in enumerate(cols):
        F[c, k] = 1.0
    return F


def _nsteps(args, total):
    if args.nsteps is not None:
        return args.nsteps
    return max(1, math.ceil(total / args.delta))


def cmd_interpolate(args):
    Fa = load_frame(args.start)
    Fz = load_frame(args.target)
    if Fa.shape != Fz.shape:
        raise InputError(f"start frame is {Fa.shape} but target is {Fz.shape}")
    if args.method == "givens":
        total = givens_info(Fa, Fz).total_angle
        path = givens_full_path(Fa, Fz, _nsteps(args, total))
    else:
        total = geodesic_info(Fa, Fz).total_angle
        path = geodesic_full_path(Fa, Fz, _nsteps(args, total))
    out = dio.export_path(path, _output(args.output), args.format)
    end = path.frames[-1]
    _summary(method=args.method, nsteps=path.nsteps, total_angle=float(path.total_angle),
             frame_error=frame_distance(end, Fz), plane_error=plane_distance(end, Fz), output=out)


def _tour_config(args, search):
    return TourConfig(
        interpolator=args.method,
        search=search,
        delta=args.delta,
        max_targets=args.max_targets,
        seed=args.seed,
        cooling=getattr(args, "cooling", 0.9),
        n_candidates=getattr(args, "n_candidates", 100),
        initial_radius=getattr(args, "radius", 1.0),
        n_dirs=getattr(args, "n_dirs", 10),
        workers=getattr(args, "workers", 1),
    )


def _write_trace_outputs(args, trace):
    out = dio.export_trace(trace, _output(args.output))
    if args.frames_output:
        dio.export_path(trace.frames(), _output(args.frames_output), "csv")
    return out


def cmd_grand(args):
    config = _tour_config(args, "grand")
    data = index = None
    if args.input or args.index:
        if not args.index:
            raise InputError("--index is required when --input is given")
        data = _load_data(args).values
        index = get_index(args.index)
        if data.shape[1] != args.p:
            raise InputError(f"data has {data.shape[1]} columns but --p is {args.p}")
    trace = grand_tour(config, args.p, args.d, data, index)
    out = _write_trace_outputs(args, trace)
    _summary(targets=trace.n_targets, steps=len(trace.path_records) - 1, output=out)


def cmd_guided(args):
    ds = _load_data(args)
    X = ds.values
    if args.pca:
        X = dio.pca(ds).scores[:, : args.pca]
        X = dio.standardize(dio.Dataset(X, [f"PC{k + 1}" for k in range(X.shape[1])])).values
    p = X.shape[1]
    if p < 2:
        raise InputError("guided tour needs at least 2 variables")
    start = None
    if args.start_cols:
        cols = _cols(args.start_cols, p)
        if len(cols) != 2:
            raise InputError("--start-cols needs exactly two columns")
        start = _axis_frame(p, cols)
    elif args.start:
        start = load_frame(args.start)
    config = _tour_config(args, args.search)
    trace = guided_tour(config, X, get_index(args.index), start=start)
    out = _write_trace_outputs(args, trace)
    if args.final_frame_output:
        dio.write_frame(_output(args.final_frame_output), trace.final_frame)
    accepted = trace.accepted_values()
    _summary(search=args.search, method=args.method, targets=trace.n_targets,
             final_index=float(trace.final_index),
             best_accepted=float(accepted.max()) if accepted.size else float(trace.final_index),
             output=out)


def cmd_pca(args):
    ds = _load_data(args)
    res = dio.pca(ds)
    out = _output(args.output)
    dio.write_csv(dio.Dataset(res.scores, res.column_names), out)
    if args.rotation_output:
        dio.write_csv(dio.Dataset(res.rotation, res.column_names), _output(args.rotation_output))
    cum = ",".join(format(v, ".6f") for v in res.cumulative_proportion)
    _summary(n=ds.n, p=ds.p, cumulative_proportion=cum, output=out)


def cmd_geometry(args):
    rng = np.random.default_rng(args.seed)
    Fa = load_frame(args.start) if args.start else random_frame(3, args.d, rng)
    if args.flip:
        Fz = Fa.copy()
        Fz[:, -1] *= -1
    elif args.target:
        Fz = load_frame(args.target)
    else:
        Fz = random_frame(3, args.d, rng)
    if Fa.shape != (3, args.d) or Fz.shape != (3, args.d):
        raise InputError(f"geometry view needs 3 x {args.d} frames")
    total = givens_info(Fa, Fz).total_angle
    giv = givens_full_path(Fa, Fz, _nsteps(args, total))
    geo = geodesic_full_path(Fa, Fz, _nsteps(args, geodesic_info(Fa, Fz).total_angle))
    out = dio.export_projection_geometry({"givens": giv, "geodesic": geo}, _output(args.output),
                                         args.n_background, args.seed)
    _summary(d=args.d, givens_total_angle=float(giv.total_angle),
             geodesic_total_angle=float(geo.total_angle),
             givens_frame_error=frame_distance(giv.frames[-1], Fz),
             geodesic_frame_error=frame_distance(geo.frames[-1], Fz), output=out)


def cmd_index_eval(args):
    ds = _load_data(args)
    X = ds.values
    if args.frame:
        F = load_frame(args.frame)
        if F.shape[0] != ds.p:
            raise InputError(f"frame has {F.shape[0]} rows but data has {ds.p} columns")
    else:
        F = _axis_frame(ds.p, _cols(args.cols, ds.p))
    if F.shape[1] != 2 and args.angles != "0":
        raise InputError("in-plane rotation angles need a 2-D frame")
    index = get_index(args.index)
    try:
        angles = [float(a) for a in args.angles.split(",")]
    except ValueError:
        raise InputError(f"--angles must be comma-separated numbers, got {args.angles!r}") from None
    out = _output(args.output)
    values = []
    with out.open("w", newline="", encoding="utf-8") as fh:
        fh.write("angle_deg,index_value\n")
        for a in angles:
            G = F
            if F.shape[1] == 2:
                t = math.radians(a)
                G = F @ np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])
            v = float(index(project(X, G)))
            values.append(v)
            fh.write(f"{dio.fmt(a)},{dio.fmt(v)}\n")
    _summary(index=args.index, values=",".join(format(v, ".4f") for v in values), output=out)


def _add_data_args(parser, default_synthetic):
    parser.add_argument("--input", help="data CSV with a header row")
    parser.add_argument("--synthetic", choices=sorted(SYNTHETIC), default=default_synthetic,
                        help="bundled generator used when --input is absent")
    parser.add_argument("--n", type=int, default=300, help="rows for the synthetic generator")
    parser.add_argument("--data-seed", type=int, default=0)
    parser.add_argument("--negate", action="append", metavar="COLUMN",
                        help="flip the sign of a column on ingestion (repeatable)")


def _add_tour_args(parser):
    parser.add_argument("--method", choices=("givens", "geodesic"), default="givens")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    parser.add_argument("--max-targets", type=int, default=30)
    parser.add_argument("--frames-output", help="also write every displayed frame (path CSV)")


def build_parser():
    parser = argparse.ArgumentParser(prog="givenstour", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("interpolate", help="path between two frames")
    p.add_argument("--start", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--method", choices=("givens", "geodesic"), default="givens")
    steps = p.add_mutually_exclusive_group()
    steps.add_argument("--nsteps", type=int)
    steps.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    p.add_argument("--output", default="path.csv")
    p.add_argument("--format", choices=("csv", "json"))
    p.set_defaults(func=cmd_interpolate)

    p = sub.add_parser("grand", help="grand tour through random targets")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--d", type=int, choices=(1, 2), default=2)
    p.add_argument("--index", choices=sorted(INDEXES))
    p.add_argument("--output", default="grand_trace.csv")
    _add_tour_args(p)
    _add_data_args(p, None)
    p.set_defaults(func=cmd_grand)

    p = sub.add_parser("guided", help="guided tour optimizing an index")
    p.add_argument("--index", choices=sorted(INDEXES), default="splines2d")
    p.add_argument("--search", choices=("better", "geodesic_search", "grand"), default="better")
    p.add_argument("--cooling", type=float, default=0.9)
    p.add_argument("--n-candidates", type=int, default=100)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--n-dirs", type=int, default=10)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--pca", type=int, metavar="K", help="tour the first K standardized PCs")
    start = p.add_mutually_exclusive_group()
    start.add_argument("--start-cols", help="start on two variables, e.g. 3,4 (1-based)")
    start.add_argument("--start", help="start frame file")
    p.add_argument("--output", default="guided_trace.csv")
    p.add_argument("--final-frame-output")
    _add_tour_args(p)
    _add_data_args(p, "sine_in_noise")
    p.set_defaults(func=cmd_guided)

    p = sub.add_parser("pca", help="principal components of a dataset")
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--output", default="pca_scores.csv")
    p.add_argument("--rotation-output")
    _add_data_args(p, "two_factor")
    p.set_defaults(func=cmd_pca)

    p = sub.add_parser("geometry", help="sphere/torus view of Givens and geodesic paths in 3-D")
    p.add_argument("--d", type=int, choices=(1, 2), default=1)
    p.add_argument("--start")
    p.add_argument("--target")
    p.add_argument("--flip", action="store_true", help="target is the start with its last column negated")
    p.add_argument("--seed", type=int, default=0)
    steps = p.add_mutually_exclusive_group()
    steps.add_argument("--nsteps", type=int)
    steps.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    p.add_argument("--n-background", type=int, default=500)
    p.add_argument("--output", default="geometry.csv")
    p.set_defaults(func=cmd_geometry)

    p = sub.add_parser("index-eval", help="index values under in-plane rotations")
    p.add_argument("--index", choices=sorted(INDEXES), default="splines2d")
    p.add_argument("--cols", default="1,2", help="variables spanning the frame (1-based)")
    p.add_argument("--frame", help="frame file instead of --cols")
    p.add_argument("--angles", default="0", help="comma-separated rotation angles in degrees")
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--output", default="index_eval.csv")
    _add_data_args(p, "sine")
    p.set_defaults(func=cmd_index_eval)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    if getattr(args, "nsteps", None) is not None and args.nsteps < 1:
        parser.error("--nsteps must be positive")
    if getattr(args, "delta", 1.0) is not None and not getattr(args, "delta", 1.0) > 0:
        parser.error("--delta must be positive")
    try:
        args.func(args)
    except NumericalFailureError as exc:
        print(f"givenstour: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (TourError, OSError) as exc:
        print(f"givenstour: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
