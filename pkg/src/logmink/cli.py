"""``logmink`` command line.

Exit codes: 0 ok, 2 condition failure, 3 non-convergence, 64 bad input,
65 unsupported dimension.
"""
import argparse
import json
import logging
import sys

import numpy as np

from . import geometry as geo
from . import inequalities as ineq
from .errors import (ConditionError, ConvergenceError, DomainError,
                     GeometryError, HemisphereError, InvalidMeasureError,
                     ResourceGuardError)
from .logcenter import log_center
from .measure import MAX_DIM, DiscreteMeasure, Verdict, classify_concentration
from .solver import SolveOptions, SolveTrace, residual, solve_strict
from .splitter import solve

EXIT_OK = 0
EXIT_CONDITION = 2
EXIT_NO_CONVERGENCE = 3
EXIT_BAD_INPUT = 64
EXIT_DIMENSION = 65

DEFAULTS = {"tol": 1e-8, "seed": 0, "max_iter": 5000, "jobs": 1}


class UsageError(Exception):
    def __init__(self, message, code=EXIT_BAD_INPUT):
        super().__init__(message)
        self.code = code


def _emit(data, path=None):
    text = json.dumps(data, indent=2)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _options(args):
    return SolveOptions(residual_tol=args.tol, max_iter=args.max_iter, seed=args.seed)


def _require_dim(n, allowed, what):
    if n not in allowed:
        raise UsageError(f"{what} does not support dimension {n}", EXIT_DIMENSION)


def cmd_validate(args):
    m = DiscreteMeasure.load(args.measure)
    try:
        verdict = classify_concentration(m)
    except HemisphereError as exc:
        _emit({"hemisphere_ok": False, "status": Verdict.FAIL.value,
               "witness": np.asarray(exc.witness).tolist()})
        return EXIT_CONDITION
    _emit(verdict.to_json())
    return EXIT_CONDITION if verdict.status is Verdict.FAIL else EXIT_OK


def cmd_solve(args):
    m = DiscreteMeasure.load(args.measure)
    _require_dim(m.dim, range(1, MAX_DIM + 1), "solve")
    opts = _options(args)
    traces = []
    try:
        if args.strict_only:
            if m.dim == 1:
                raise UsageError("--strict-only needs n >= 2", EXIT_DIMENSION)
            P, trace = solve_strict(m, opts, check_condition=False)
            traces.append(trace)
        else:
            P = solve(m, opts, traces=traces)
    finally:
        if args.trace:
            merged = SolveTrace(
                iterations=[row for t in traces for row in t.iterations],
                converged=all(t.converged for t in traces))
            merged.to_csv(args.trace)
    out = P.to_json()
    out["residual"] = residual(P, m)
    _emit(out, args.out)
    return EXIT_OK


def cmd_conemeasure(args):
    P = geo.Polytope.load(args.polytope)
    _emit(geo.cone_volume_measure(P).to_json(), args.out)
    return EXIT_OK


def _measure_for(P, path):
    if path:
        m = DiscreteMeasure.load(path)
        if m.dim != P.dim:
            raise UsageError("measure and polytope dimensions differ")
        return m
    return geo.cone_volume_measure(P)


def cmd_logcenter(args):
    P = geo.Polytope.load(args.polytope)
    _require_dim(P.dim, range(1, MAX_DIM + 1), "logcenter")
    res = log_center(P, _measure_for(P, args.measure), max_iter=args.max_iter)
    _emit({"xi": res.xi.tolist(), "phi": res.phi_value,
           "gradient_norm": res.gradient_norm, "iterations": res.iterations},
          args.out)
    return EXIT_OK


def cmd_check_ineq(args):
    _require_dim(args.dim, range(2, MAX_DIM + 1), "check-ineq")
    if args.random < 1:
        raise UsageError("--random must be positive")
    rows = ineq.sweep(args.random, args.dim, seed=args.seed, jobs=args.jobs)
    if args.report:
        ineq.write_report(rows, args.report)
    bad = ineq.violations(rows)
    _emit({"instances": args.random, "dim": args.dim, "directions": len(rows),
           "violations": len(bad), "tight": sum(r.tight for r in rows),
           "min_slack": min(r.slack for r in rows),
           "max_product_ratio": max(r.product / r.bound for r in rows)})
    return EXIT_CONDITION if bad else EXIT_OK


def _svg_point(p, lo, span, size, pad):
    x = pad + (p[0] - lo[0]) / span * (size - 2 * pad)
    y = size - pad - (p[1] - lo[1]) / span * (size - 2 * pad)
    return x, y


def render_svg(P, xi, size=480, pad=40):
    """SVG of a polygon with its outer normals, the origin and ``xi``."""
    if P.dim != 2:
        raise UsageError("plot needs a planar polytope", EXIT_DIMENSION)
    V = P.vertices
    centre = V.mean(axis=0)
    ring = V[np.argsort(np.arctan2(V[:, 1] - centre[1], V[:, 0] - centre[0]))]
    arrow = 0.2 * geo.diameter(P)
    tips = [(P.facets[k].centroid, P.facets[k].centroid + arrow * P.normals[k])
            for k in P.facet_indices]
    cloud = np.vstack([V, [[0.0, 0.0]], [xi]] + [t for _, t in tips])
    lo = cloud.min(axis=0)
    span = float((cloud.max(axis=0) - lo).max()) or 1.0

    def pt(p):
        return _svg_point(p, lo, span, size, pad)

    poly = " ".join(f"{x:.3f},{y:.3f}" for x, y in map(pt, ring))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        '<defs><marker id="head" markerWidth="8" markerHeight="8" refX="6" '
        'refY="3" orient="auto"><path d="M0,0 L6,3 L0,6 z" fill="#555"/></marker></defs>',
        f'<polygon class="polytope" points="{poly}" fill="#dde8f5" '
        'stroke="#1f4e79" stroke-width="2"/>',
    ]
    for base, tip in tips:
        (x1, y1), (x2, y2) = pt(base), pt(tip)
        parts.append(f'<line class="normal" x1="{x1:.3f}" y1="{y1:.3f}" x2="{x2:.3f}" '
                     f'y2="{y2:.3f}" stroke="#555" marker-end="url(#head)"/>')
    ox, oy = pt((0.0, 0.0))
    parts.append(f'<circle class="origin" cx="{ox:.3f}" cy="{oy:.3f}" r="4" fill="black"/>')
    cx, cy = pt(xi)
    parts.append(f'<circle class="logcenter" cx="{cx:.3f}" cy="{cy:.3f}" r="4" '
                 'fill="none" stroke="#c0392b" stroke-width="2"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_plot(args):
    P = geo.Polytope.load(args.polytope)
    if P.dim != 2:
        raise UsageError(f"plot supports n = 2 only, got n = {P.dim}", EXIT_DIMENSION)
    xi = log_center(P, _measure_for(P, args.measure), max_iter=args.max_iter).xi
    svg = render_svg(P, xi)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(svg)
    else:
        sys.stdout.write(svg)
    return EXIT_OK


def _common():
    # SUPPRESS lets the flags appear before or after the command name
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--tol", type=float, default=argparse.SUPPRESS,
                   help="residual tolerance (default 1e-8)")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                   help="random seed (default 0)")
    p.add_argument("--max-iter", type=int, default=argparse.SUPPRESS,
                   help="iteration cap (default 5000)")
    p.add_argument("--jobs", type=int, default=argparse.SUPPRESS,
                   help="worker processes for sweeps (default 1)")
    p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    return p


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(
        prog="logmink", parents=[common],
        description="Discrete logarithmic Minkowski problem toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common],
                       help="check the subspace concentration condition")
    p.add_argument("measure", help="measure JSON")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", parents=[common],
                       help="find a polytope with the given cone-volume measure")
    p.add_argument("--measure", required=True, help="measure JSON")
    p.add_argument("--out", help="polytope JSON (default stdout)")
    p.add_argument("--trace", help="iteration trace CSV")
    p.add_argument("--strict-only", action="store_true",
                   help="run the descent directly, skipping the equality split")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("conemeasure", parents=[common],
                       help="cone-volume measure of a polytope")
    p.add_argument("polytope", help="polytope JSON")
    p.add_argument("--out")
    p.set_defaults(func=cmd_conemeasure)

    p = sub.add_parser("logcenter", parents=[common],
                       help="maximizer of the log-functional")
    p.add_argument("polytope", help="polytope JSON")
    p.add_argument("--measure",
                   help="measure JSON (default: the polytope's cone-volume measure)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_logcenter)

    p = sub.add_parser("check-ineq", parents=[common],
                       help="opposite-facet inequality sweep on random polytopes")
    p.add_argument("--random", type=int, default=1000, help="number of polytopes")
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--report", help="CSV report path")
    p.set_defaults(func=cmd_check_ineq)

    p = sub.add_parser("plot", parents=[common], help="SVG figure of a polygon")
    p.add_argument("polytope", help="polytope JSON (n = 2)")
    p.add_argument("--measure", help="measure JSON for the log-center")
    p.add_argument("--out", help="SVG path (default stdout)")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    for key, value in DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, value)
    logging.basicConfig(level=logging.DEBUG if getattr(args, "verbose", False)
                        else logging.WARNING, format="%(name)s: %(message)s")
    try:
        if args.tol <= 0 or args.max_iter < 1 or args.jobs < 1:
            raise UsageError("--tol, --max-iter and --jobs must be positive")
        return args.func(args)
    except UsageError as exc:
        print(f"logmink: {exc}", file=sys.stderr)
        return exc.code
    except HemisphereError as exc:
        print(f"logmink: {exc}; witness {np.round(exc.witness, 12).tolist()}",
              file=sys.stderr)
        return EXIT_CONDITION
    except ConditionError as exc:
        print(f"logmink: {exc}", file=sys.stderr)
        return EXIT_CONDITION
    except ConvergenceError as exc:
        print(f"logmink: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except ResourceGuardError as exc:
        print(f"logmink: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except (InvalidMeasureError, GeometryError, DomainError, OSError) as exc:
        print(f"logmink: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
