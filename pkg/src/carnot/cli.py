"""Command-line front end.

Subcommands: validate an algebra definition file, check minimality of a
builtin or graph surface, compare the numeric and analytic first
variation, and emit surface or unit-ball meshes as CSV.  Exit codes:
0 pass, 1 a check failed, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import heisenberg as hg
from . import surfaces as sf
from .algebra import heisenberg_algebra, load_algebra, validate
from .expressions import ExpressionGraph
from .frames import FramedImmersion
from .variation import QuadratureGrid, VariationFamily, first_variation_analytic, first_variation_numeric, minimality_residual

PASS, FAIL, USAGE = 0, 1, 2


def _builtin_surface(name: str, args):
    """Resolve a builtin surface to (immersion, algebra, default bounds)."""
    r = args.r
    if name == "tubular":
        im, info = sf.surface_from_curve(sf.circle_curve(r), (0.0, np.pi / 2))
        return im, heisenberg_algebra(2), ((0.0, np.pi / 2), (0.1, 1.0)), info
    if name == "ruled":
        im, info = sf.surface_from_curve(sf.vertical_line_curve(), (0.0, 1.0))
        return im, heisenberg_algebra(2), ((0.0, 1.0), (-1.0, 1.0)), info
    if name == "circle-tube":
        return sf.explicit_circle_tube(r), heisenberg_algebra(2), ((0.0, np.pi / 2), (0.1, 1.0)), {"kind": "explicit"}
    if name == "vertical-plane":
        im = sf.vertical_cylinder(lambda u: np.array([u[0], 0.0]), 1, 1, base_jacobian=lambda u: np.array([[1.0], [0.0]]))
        return im, heisenberg_algebra(1), ((-1.0, 1.0), (-1.0, 1.0)), {"kind": "plane"}
    if name == "cylinder":
        im = sf.vertical_cylinder(
            lambda u: r * np.array([np.cos(u[0]), np.sin(u[0])]),
            1,
            1,
            base_jacobian=lambda u: r * np.array([[-np.sin(u[0])], [np.cos(u[0])]]),
        )
        return im, heisenberg_algebra(1), ((0.0, np.pi), (-1.0, 1.0)), {"kind": "cylinder", "radius": r}
    if name == "holomorphic-cylinder":
        def base(u):
            a, b = u
            return np.array([a, b, a * a - b * b, 2.0 * a * b])

        def base_jac(u):
            a, b = u
            return np.array([[1.0, 0.0], [0.0, 1.0], [2.0 * a, -2.0 * b], [2.0 * b, 2.0 * a]])

        im = sf.vertical_cylinder(base, 2, 2, base_jacobian=base_jac)
        return im, heisenberg_algebra(2), ((-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)), {"kind": "holomorphic-cylinder"}
    raise ValueError(f"unknown builtin surface {name!r}")


def _resolve_surface(args):
    if args.builtin and args.graph:
        raise ValueError("choose either --builtin or --graph")
    if args.builtin:
        return _builtin_surface(args.builtin, args) + (None,)
    if args.graph:
        g = ExpressionGraph(args.graph)
        im = sf.graph_immersion(g, name=f"graph[{args.graph}]")
        lo, hi = args.domain
        bounds = tuple((lo, hi) for _ in range(2 * g.n))
        return im, heisenberg_algebra(g.n), bounds, {"kind": "graph", "expression": args.graph}, g
    raise ValueError("a surface is required: --builtin NAME or --graph EXPR")


def _grid_shape(text, dims):
    parts = [int(v) for v in text.split(",")]
    if len(parts) == 1:
        parts = parts * dims
    if len(parts) != dims:
        raise ValueError(f"--grid expects {dims} comma-separated counts")
    return parts


def _write_json(path, payload):
    text = json.dumps(payload, indent=1, sort_keys=True)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_validate(args) -> int:
    try:
        alg = load_algebra(args.algebra)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    report = validate(alg)
    payload = {
        "file": args.algebra,
        "layer_dims": list(alg.layer_dims),
        "valid": report.ok,
        "violations": [{"invariant": name, "residual": res} for name, res in report.violations],
    }
    _write_json(args.json, payload)
    return PASS if report.ok else FAIL


def cmd_check_minimality(args) -> int:
    im, alg, bounds, info, graph = _resolve_surface(args)
    shape = _grid_shape(args.grid, len(bounds))
    report = {"surface": info, "params": vars(args) | {"resolved_bounds": [list(b) for b in bounds]}}
    if graph is not None:
        rng = np.random.default_rng(args.seed)
        lo, hi = args.domain
        worst, worst_x, values = 0.0, None, []
        count = int(np.prod(shape))
        for _ in range(count):
            x = rng.uniform(lo, hi, 2 * graph.n)
            try:
                val = abs(sf.graph_residual(graph, x))
            except sf.CharacteristicPointError:
                continue
            values.append(val)
            if val > worst:
                worst, worst_x = val, x
        report["method"] = "graph-pde"
        report["residual_norms"] = {
            "sup": worst,
            "l2": float(np.sqrt(np.mean(np.square(values)))) if values else 0.0,
        }
        report["worst"] = {"residual": worst, "x": None if worst_x is None else worst_x.tolist()}
        sup = worst
    else:
        grid = QuadratureGrid.gauss_legendre(bounds, order=max(shape))
        res = minimality_residual(im, grid, alg)
        report["method"] = "adapted-frame"
        report["residual_norms"] = {k: res[k] for k in ("sup", "l2", "mean_square", "h_minus_sigma_sup")}
        report["worst"] = res["worst"]
        sup = res["sup"]
    report["tolerance"] = args.tol
    report["pass"] = bool(sup < args.tol)
    _write_json(args.json, report)
    return PASS if report["pass"] else FAIL


def cmd_first_variation(args) -> int:
    im, alg, bounds, info, _ = _resolve_surface(args)
    grid = QuadratureGrid.gauss_legendre(bounds, order=args.quad)
    fam = VariationFamily.from_normal_bump(im, alg, bounds, normal_index=args.normal_index)
    numeric = first_variation_numeric(fam, grid, alg, eps=args.eps)
    analytic = first_variation_analytic(fam, grid, alg)
    denom = max(abs(numeric["value"]), 1e-30)
    rel = abs(numeric["value"] - analytic["total"]) / denom
    report = {
        "surface": info,
        "numeric": numeric["value"],
        "richardson": {"coarse": numeric["coarse"], "fine": numeric["fine"]},
        "interior": analytic["interior"],
        "boundary": analytic["boundary"],
        "analytic_total": analytic["total"],
        "relative_mismatch": rel,
        "tolerance": args.tol,
        "params": vars(args) | {"resolved_bounds": [list(b) for b in bounds]},
        "pass": bool(rel < args.tol or abs(numeric["value"] - analytic["total"]) < 1e-12),
    }
    _write_json(args.json, report)
    return PASS if report["pass"] else FAIL


def _write_csv(path, header, rows):
    target = open(path, "w", newline="") if path else sys.stdout
    try:
        writer = csv.writer(target)
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{v:.17g}" for v in row])
    finally:
        if path:
            target.close()


def cmd_mesh(args) -> int:
    if args.ball is not None:
        n = args.ball
        i, j = (int(v) for v in args.plane.split(","))
        if not (1 <= i <= 2 * n and 1 <= j <= 2 * n and i != j):
            raise ValueError("--plane expects two distinct horizontal indices")
        n_mu0, n_theta = _grid_shape(args.grid, 2)
        rows = []
        for mu0 in np.linspace(-2 * np.pi, 2 * np.pi, n_mu0 + 1):
            for theta in np.linspace(0.0, 2 * np.pi, n_theta + 1):
                mubar = np.zeros(2 * n)
                mubar[i - 1] = args.radius * np.cos(theta)
                mubar[j - 1] = args.radius * np.sin(theta)
                point = hg.ball_parametrization(mu0, mubar)
                rows.append([mu0, *mubar, *point])
        header = ["mu0"] + [f"mubar{k}" for k in range(1, 2 * n + 1)] + [f"x{k}" for k in range(1, 2 * n + 2)]
        _write_csv(args.out, header, rows)
        return PASS
    im, alg, bounds, _, _ = _resolve_surface(args)
    shape = _grid_shape(args.grid, len(bounds))
    axes = [np.linspace(a, b, c + 1) for (a, b), c in zip(bounds, shape)]
    mesh = np.meshgrid(*axes, indexing="ij")
    params = np.column_stack([m.ravel() for m in mesh])
    rows = [list(u) + list(im.point(u)) for u in params]
    names = ["t", "s", "v", "w"][: len(bounds)]
    header = names + [f"x{k}" for k in range(1, alg.dim + 1)]
    _write_csv(args.out, header, rows)
    return PASS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="carnot", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_surface_options(p):
        p.add_argument("--builtin", help="builtin surface name")
        p.add_argument("--graph", help="graph expression in x1..x_{2n}")
        p.add_argument("--r", type=float, default=1.0, help="radius parameter for builtins")
        p.add_argument("--domain", type=float, nargs=2, default=(0.5, 1.5), metavar=("LO", "HI"))
        p.add_argument("--grid", default="20,20", help="node counts, comma separated")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--json", help="write the JSON report here (default stdout)")

    p = sub.add_parser("validate", help="validate an algebra definition file")
    p.add_argument("--algebra", required=True)
    p.add_argument("--json")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("check-minimality", help="residual of H + sigma on a surface")
    add_surface_options(p)
    p.add_argument("--tol", type=float, default=1e-5)
    p.set_defaults(fn=cmd_check_minimality)

    p = sub.add_parser("first-variation", help="numeric vs analytic measure derivative")
    add_surface_options(p)
    p.add_argument("--quad", type=int, default=16, help="Gauss-Legendre order per axis")
    p.add_argument("--eps", type=float, default=1e-4)
    p.add_argument("--normal-index", type=int, default=0)
    p.add_argument("--tol", type=float, default=0.01)
    p.set_defaults(fn=cmd_first_variation)

    p = sub.add_parser("mesh", help="emit a surface or ball-slice mesh as CSV")
    add_surface_options(p)
    p.add_argument("--ball", type=int, help="emit a unit-ball slice mesh for H^n")
    p.add_argument("--plane", default="1,2", help="horizontal plane indices for the ball slice")
    p.add_argument("--radius", type=float, default=1.0, help="|mubar| for the ball slice")
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.set_defaults(fn=cmd_mesh)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
