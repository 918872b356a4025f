"""Command-line front end: validate | fibers | foliation | strata | invert | lift.

Every subcommand takes --model (JSON file with the allocation matrix), --out
(output directory), and --seed (recorded in every output header).  CSV output
uses a header row and 17 significant digits so doubles round-trip losslessly.

Exit codes: 0 success, 1 validation error, 2 solver error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .allocator import (
    SectionInverseConfig,
    extremal_inverse,
    lift_trajectory,
    naive_minimum_norm_inverse,
    section_inverse,
)
from .errors import (
    BoundaryStateError,
    CrossingStateError,
    DegenerateRedundancyError,
    FiberAllocError,
    NoBracketError,
    NonGenericSegmentError,
    OriginExcludedError,
    RankDeficientError,
    WrongShapeError,
)
from .fibers import crossing_parameters, fiber_point
from .model import actuation, load_model
from .potential import potential, section_intersection
from .strata import (
    enumerate_layer,
    graph_to_dot,
    graph_to_json,
    layer_adjacency_graph,
    reciprocal_hinges,
)

SELF_CHECK_TOL = 1e-8

_VALIDATION_ERRORS = (WrongShapeError, RankDeficientError,
                      DegenerateRedundancyError, ValueError)
_SOLVER_ERRORS = (NoBracketError, NonGenericSegmentError, OriginExcludedError,
                  CrossingStateError, BoundaryStateError)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write_csv(path: Path, header: list[str], rows, seed) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"# fiberalloc {__version__} seed={seed}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) if isinstance(x, float) else x for x in row])


def _parse_vector(text: str) -> np.ndarray:
    return np.array([float(tok) for tok in text.replace(";", ",").split(",") if tok])


def cmd_validate(args) -> int:
    model = load_model(args.model)
    residual = np.linalg.norm(model.A @ model.b) / np.linalg.norm(model.A)
    print(f"matrix: {model.m} x {model.n} (rank {model.m})")
    print("b =", np.array2string(model.b, precision=5))
    print("c =", np.array2string(model.c, precision=5))
    print(f"||A b|| / ||A|| = {residual:.3e}")
    print(f"min |b_i| = {np.min(np.abs(model.b)):.5f}")
    print("assumptions: full row rank, n = m+1, strict redundancy: OK")
    return 0


def cmd_fibers(args) -> int:
    model = load_model(args.model)
    out = Path(args.out)
    tasks = [_parse_vector(tok) for tok in args.w]
    lam_grid = np.linspace(args.lam_min, args.lam_max, args.samples)

    def rows_for(w):
        trace = crossing_parameters(model, w)
        lams = sorted(set(lam_grid.tolist()))
        marks = {lam for lam, _ in trace.crossings
                 if args.lam_min <= lam <= args.lam_max}
        all_lams = sorted(set(lams) | marks)
        for lam in all_lams:
            p = fiber_point(model, w, lam)
            werr = np.max(np.abs(actuation(model, p.v) - w))
            if werr > SELF_CHECK_TOL * (1.0 + np.max(np.abs(w))):
                raise AssertionError(f"self-check failed: |f(v) - w| = {werr:g}")
            yield [float(lam), *map(float, p.v), int(lam in marks)]

    header = ["lambda"] + [f"v_{i+1}" for i in range(model.n)] + ["is_crossing"]
    for k, w in enumerate(tasks):
        _write_csv(out / f"fiber_{k}.csv", header, rows_for(w), args.seed)
    _write_csv(out / "central_fiber.csv", header, rows_for(np.zeros(model.m)),
               args.seed)
    print(f"wrote {len(tasks)} fiber polylines + central fiber to {out}")
    return 0


def cmd_foliation(args) -> int:
    model = load_model(args.model)
    out = Path(args.out)
    rng = np.random.default_rng(args.seed)
    mags = _parse_vector(args.magnitudes)
    if args.orthant:
        sigma = np.array([1 if s == "+" else -1
                          for s in args.orthant.strip("()").split(",")])
        layer = sum(1 for i in range(model.n) if sigma[i] * model.b[i] > 0)
    else:
        sigma = None
        layer = args.layer

    dirs = rng.normal(size=(args.grid, model.m))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)

    header = [f"v_{i+1}" for i in range(model.n)] + ["C", "orthant"] + \
        [f"w_{j+1}" for j in range(model.m)]
    for C in args.C:
        rows = []
        for d in dirs:
            for mag in mags:
                w = mag * d
                try:
                    sp = section_inverse(
                        model, w, SectionInverseConfig(layer=layer, C=C))[0]
                except _SOLVER_ERRORS:
                    continue
                if sigma is not None and tuple(sp.orthant.sigma) != tuple(sigma):
                    continue
                err = abs(potential(model, sp.v).value - C)
                if err > SELF_CHECK_TOL:
                    raise AssertionError(
                        f"self-check failed: |Phi(v) - C| = {err:g}")
                rows.append([*map(float, sp.v), float(C), str(sp.orthant),
                             *map(float, w)])
        _write_csv(out / f"foliation_C{C:g}.csv", header, rows, args.seed)
    print(f"wrote {len(args.C)} level-set point clouds to {out}")
    return 0


def cmd_strata(args) -> int:
    model = load_model(args.model)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    graph = layer_adjacency_graph(model, args.layer)
    (out / f"layer_{args.layer}.json").write_text(graph_to_json(graph))
    (out / f"layer_{args.layer}.dot").write_text(graph_to_dot(graph))
    sigs = enumerate_layer(model, args.layer)
    hinges = reciprocal_hinges(model, args.layer)
    print(f"layer {args.layer}: {len(sigs)} orthants, {len(hinges)} reciprocal "
          f"hinges, connected={graph['connected']}")
    return 0


def cmd_invert(args) -> int:
    model = load_model(args.model)
    w = _parse_vector(args.w)
    if args.layer is None or args.layer in (0, model.n):
        branch = "negative" if args.layer == 0 else args.branch
        v = extremal_inverse(model, w, args.C, branch=branch)
        report = None
    else:
        sp, report = section_inverse(
            model, w, SectionInverseConfig(layer=args.layer, C=args.C))
        v = sp.v
    doc = {
        "w": [float(x) for x in w],
        "C": args.C,
        "v": [float(x) for x in v],
        "actuation_check": [float(x) for x in actuation(model, v)],
        "hinge_proximity": (
            None if report is None else
            {"index_pair": list(report.index_pair),
             "min_abs_v": report.min_abs_v}),
    }
    print(json.dumps(doc, indent=2))
    return 0


def cmd_lift(args) -> int:
    model = load_model(args.model)
    out = Path(args.out)
    with open(args.trajectory, newline="") as fh:
        reader = csv.reader(r for r in fh if not r.startswith("#"))
        header = next(reader)
        data = np.array([[float(x) for x in row] for row in reader])
    t, w_samples = data[:, 0], data[:, 1:]

    config = SectionInverseConfig(layer=args.layer if args.layer is not None
                                  else model.n, C=args.C)
    lifted = lift_trajectory(model, t, w_samples, args.allocator,
                             config=config, branch=args.branch)

    rows = ([float(t[k]), *map(float, lifted.v[k]), float(lifted.speed[k]),
             float(lifted.min_abs_v[k]), lifted.signatures[k]]
            for k in range(len(t)))
    header = ["t"] + [f"v_{i+1}" for i in range(model.n)] + \
        ["speed", "min_abs_v", "signature"]
    _write_csv(out / f"lift_{args.allocator}.csv", header, rows, args.seed)
    summary = {
        "allocator": args.allocator,
        "samples": len(t),
        "seed": args.seed,
        "max_speed": lifted.max_speed,
        "signature_changes": lifted.signature_changes,
        "min_abs_v": float(np.min(lifted.min_abs_v)),
    }
    (out / f"lift_{args.allocator}.json").write_text(json.dumps(summary, indent=2))
    print(json.dumps(summary, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fiberalloc",
        description="Fiber geometry and singularity-free allocation for "
                    "signed-quadratic actuation maps.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--model", required=True, help="JSON model file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("validate", help="check model assumptions")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("fibers", help="sample fiber polylines to CSV")
    common(p)
    p.add_argument("--w", action="append", required=True,
                   help="task vector, comma-separated (repeatable)")
    p.add_argument("--lam-min", type=float, default=-10.0)
    p.add_argument("--lam-max", type=float, default=10.0)
    p.add_argument("--samples", type=int, default=400)
    p.set_defaults(func=cmd_fibers)

    p = sub.add_parser("foliation", help="sample potential level sets to CSV")
    common(p)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--layer", type=int)
    group.add_argument("--orthant", help='signature like "+,-,+"')
    p.add_argument("--C", type=float, action="append", required=True)
    p.add_argument("--grid", type=int, default=64,
                   help="number of task directions")
    p.add_argument("--magnitudes", default="0.25,0.5,1,2,4")
    p.set_defaults(func=cmd_foliation)

    p = sub.add_parser("strata", help="export layer graph (JSON + DOT)")
    common(p)
    p.add_argument("--layer", type=int, required=True)
    p.set_defaults(func=cmd_strata)

    p = sub.add_parser("invert", help="invert a single task")
    common(p)
    p.add_argument("--w", required=True)
    p.add_argument("--C", type=float, default=0.0)
    p.add_argument("--layer", type=int, default=None)
    p.add_argument("--branch", choices=["positive", "negative"],
                   default="positive")
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("lift", help="lift a task trajectory CSV")
    common(p)
    p.add_argument("--trajectory", required=True,
                   help="CSV with header t, w_1..w_m")
    p.add_argument("--allocator", choices=["extremal", "section", "naive"],
                   default="extremal")
    p.add_argument("--C", type=float, default=0.0)
    p.add_argument("--layer", type=int, default=None)
    p.add_argument("--branch", choices=["positive", "negative"],
                   default="positive")
    p.set_defaults(func=cmd_lift)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _SOLVER_ERRORS as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 2
    except _VALIDATION_ERRORS as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
