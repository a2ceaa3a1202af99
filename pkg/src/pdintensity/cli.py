"""Command line interface: ``pdintensity <command> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import harness, io
from .core import OmegaBox
from .errors import PDError
from .generators import CircleSpec, OrbitSpec, gen_circle, gen_orbit
from .kde import GridSpec, KernelSpec, density_with_skipped, estimate_intensity
from .representations import (
    BettiQuery,
    SurfaceSpec,
    betti_curve,
    betti_empirical,
    betti_from_field,
    persistence_surface,
)
from .transport import ot_distance, sandwich_check
from .vr import FiltrationSpec, rips_persistence


def _emit(obj):
    print(json.dumps(obj, indent=2))


def _load_sample(args):
    sample = io.read_sample(args.sample, args.L, cap_essential=args.cap_essential)
    return sample.select_dim(args.dim) if args.dim is not None else sample


def _kernel(args):
    return KernelSpec(args.kernel, args.h)


def cmd_vr(args):
    cloud = io.read_points_csv(args.input)
    box = OmegaBox(args.L)
    spec = FiltrationSpec(max_dim=args.max_dim, max_edge=args.max_edge, cap_essential=args.cap_essential)
    dg = rips_persistence(cloud, spec, box)
    io.write_diagram_csv(dg, args.output)
    print(f"wrote {len(dg)} pairs to {args.output}")


def _write_clouds(clouds, out, prefix):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    width = max(4, len(str(len(clouds))))
    for i, c in enumerate(clouds):
        io.write_points_csv(c, out / f"{prefix}_{i:0{width}d}.csv")
    print(f"wrote {len(clouds)} clouds to {out}")


def _seeds(seed, n):
    return [harness._derived_seed(seed, i) for i in range(n)]


def cmd_gen_orbit(args):
    clouds = [gen_orbit(OrbitSpec(args.r, args.n_points, s)) for s in _seeds(args.seed, args.n_clouds)]
    _write_clouds(clouds, args.out, "orbit")


def cmd_gen_circle(args):
    dist = {"power": "power_spherical"}.get(args.dist, args.dist)
    clouds = [
        gen_circle(CircleSpec(dist, args.mu, args.kappa, args.noise_sd, args.n_points, s))
        for s in _seeds(args.seed, args.n_clouds)
    ]
    _write_clouds(clouds, args.out, "circle")


def cmd_estimate(args):
    sample = _load_sample(args)
    grid = GridSpec.over_box(args.L, args.grid)
    if args.mode == "intensity":
        field = estimate_intensity(sample, _kernel(args), grid)
    else:
        field, skipped = density_with_skipped(sample, _kernel(args), grid, skip_empty=args.skip_empty)
        if skipped:
            print(f"skipped {skipped} empty diagrams", file=sys.stderr)
    io.write_field_csv(field, args.out)
    print(f"wrote {field.ny}x{field.nx} field to {args.out}")


def cmd_betti(args):
    query = BettiQuery(args.x, args.x2, args.mode)
    if args.source == "field":
        if args.field is None:
            raise PDError("--source field needs --field")
        value = betti_from_field(io.read_field_csv(args.field), query)
    else:
        if args.sample is None:
            raise PDError("--source empirical needs --sample")
        value = betti_empirical(_load_sample(args), query, skip_empty=args.skip_empty)
    _emit({"x": args.x, "x2": query.bounds[1], "mode": args.mode, "source": args.source, "betti": value})


def cmd_betti_curve(args):
    quantiles = tuple(float(v) for v in args.quantiles.split(","))
    if args.field is not None:
        curve = betti_curve(io.read_field_csv(args.field), args.mode, args.resolution, L=args.L)
    else:
        curve = betti_curve(_load_sample(args), args.mode, args.resolution, quantiles=quantiles,
                            skip_empty=args.skip_empty)
    io.write_curve_csv(curve, args.out)
    print(f"wrote {len(curve.x)} curve points to {args.out}")


def cmd_surface(args):
    sample = _load_sample(args)
    spec = SurfaceSpec(args.q, _kernel(args), GridSpec.over_box(args.L, args.grid))
    field = persistence_surface(sample, spec)
    io.write_field_csv(field, args.out)
    print(f"wrote {field.ny}x{field.nx} surface to {args.out}")


def _read_diagram_any(path, L, cap_essential):
    if L is None:
        # box just large enough for the data; finite deaths only
        raw = np.genfromtxt(path, delimiter=",", names=True)
        vals = np.atleast_1d(raw["death"])
        vals = vals[np.isfinite(vals)]
        L = max(1.0, float(vals.max())) if vals.size else 1.0
    return io.read_diagram_csv(path, OmegaBox(L), cap_essential=cap_essential)


def cmd_ot(args):
    a = _read_diagram_any(args.a, args.L, args.cap_essential)
    b = _read_diagram_any(args.b, args.L, args.cap_essential)
    if args.dim is not None:
        a, b = a.select_dim(args.dim), b.select_dim(args.dim)
    dist, plan = ot_distance(a, b, args.q)
    _emit({"ot": dist, "cost_q": plan.cost, "plan_moves": plan.n_moves})


def cmd_ot_bound(args):
    fa, fb = io.read_field_csv(args.a), io.read_field_csv(args.b)
    _emit(sandwich_check(fa, fb, args.q, args.L))


def cmd_converge(args):
    report = harness.run_convergence(harness.ConvergenceConfig.from_json(args.config))
    report.to_json(args.out)
    _emit({"slope": report.slope, "intercept": report.intercept, "r2": report.r2, "out": args.out})


def cmd_repro(args):
    manifest = harness.reproduce_figure(
        args.setup, args.n, args.out, seed=args.seed, n_points=args.n_points, h=args.h,
        dim=args.dim if args.dim is not None else 1, grid=args.grid, resolution=args.resolution,
    )
    _emit({"out": args.out, "n_diagrams": manifest["n_diagrams"], "timings_seconds": manifest["timings_seconds"]})


def _sample_args(p, sample_required=True):
    p.add_argument("--sample", required=sample_required, help="diagram directory or JSON sample")
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--dim", type=int, default=1, help="homology dimension (default 1)")
    p.add_argument("--cap-essential", action="store_true")
    p.add_argument("--skip-empty", action="store_true")


def _kernel_args(p, h_required=True):
    p.add_argument("--h", type=float, required=h_required)
    p.add_argument("--kernel", default="epanechnikov")
    p.add_argument("--grid", type=int, default=128)


def build_parser():
    parser = argparse.ArgumentParser(prog="pdintensity", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("vr", help="Vietoris-Rips diagram of a point cloud")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--max-dim", type=int, default=1)
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--max-edge", type=float)
    p.add_argument("--cap-essential", action="store_true")
    p.set_defaults(func=cmd_vr)

    p = sub.add_parser("gen-orbit", help="linked twist map orbits")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--n-points", type=int, default=1000)
    p.add_argument("--n-clouds", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_orbit)

    p = sub.add_parser("gen-circle", help="noisy circle samples")
    p.add_argument("--dist", choices=["uniform", "power", "power_spherical"], default="uniform")
    p.add_argument("--mu", type=float, default=math.pi / 2)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--noise-sd", type=float, default=0.05)
    p.add_argument("--n-points", type=int, default=1000)
    p.add_argument("--n-clouds", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_circle)

    p = sub.add_parser("estimate", help="kernel intensity or density estimate")
    p.add_argument("--mode", choices=["intensity", "density"], default="intensity")
    _sample_args(p)
    _kernel_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("betti", help="(persistent) Betti number")
    p.add_argument("--mode", choices=["raw", "normalized"], default="raw")
    p.add_argument("--source", choices=["empirical", "field"], default="empirical")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--x2", type=float)
    p.add_argument("--field")
    p.add_argument("--sample")
    p.add_argument("--L", type=float)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--cap-essential", action="store_true")
    p.add_argument("--skip-empty", action="store_true")
    p.set_defaults(func=cmd_betti)

    p = sub.add_parser("betti-curve", help="Betti curve with quantile bands")
    p.add_argument("--mode", choices=["raw", "normalized"], default="raw")
    p.add_argument("--resolution", type=int, default=256)
    p.add_argument("--quantiles", default="0.05,0.95")
    p.add_argument("--field", help="read the curve from a field instead of a sample")
    _sample_args(p, sample_required=False)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_betti_curve)

    p = sub.add_parser("surface", help="persistence surface")
    p.add_argument("--q", type=float, default=1.0)
    _sample_args(p)
    _kernel_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_surface)

    p = sub.add_parser("ot", help="OT distance between two diagrams")
    p.add_argument("--q", type=float, default=1.0)
    p.add_argument("--L", type=float)
    p.add_argument("--dim", type=int)
    p.add_argument("--cap-essential", action="store_true")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=cmd_ot)

    p = sub.add_parser("ot-bound", help="OT versus sup-norm bound on two fields")
    p.add_argument("--q", type=float, default=1.0)
    p.add_argument("--L", type=float, required=True)
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=cmd_ot_bound)

    p = sub.add_parser("converge", help="convergence-rate study")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("repro", help="figure data for a named setup")
    p.add_argument("--setup", choices=sorted(harness.SETUPS), required=True)
    p.add_argument("--n", type=int, default=100, help="number of point clouds")
    p.add_argument("--n-points", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--h", type=float)
    p.add_argument("--dim", type=int)
    p.add_argument("--grid", type=int, default=128)
    p.add_argument("--resolution", type=int, default=256)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_repro)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except (PDError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
