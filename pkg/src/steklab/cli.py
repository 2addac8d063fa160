"""Command-line entry point: ``steklab {generate,spectrum,invariants,verify,report}``."""

import argparse
import json
import math
import os
import sys

from .eigen import laplace_spectrum, steklov_spectrum
from .errors import ConfigError, SteklabError
from .harness import OUT_ENV, RunConfig, load_config, run_verify, write_outputs
from .mesh import load_mesh, save_mesh
from .metric import compute_invariants
from .shapes import SHAPE_KINDS, ShapeSpec, generate_shape, steklov_domain


def parse_shape(text, seed=0):
    """``kind`` or ``kind:key=value,key=value`` to a ShapeSpec."""
    kind, _, rest = text.partition(":")
    if kind not in SHAPE_KINDS:
        raise ConfigError(f"unknown shape kind {kind!r}")
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq:
            raise ConfigError(f"expected key=value, got {item!r}")
        try:
            params[key] = int(val)
        except ValueError:
            try:
                params[key] = float(val)
            except ValueError:
                params[key] = val
    return ShapeSpec(kind, params, seed)


def _mesh_from_args(args, domain):
    if args.mesh:
        return load_mesh(args.mesh)
    spec = parse_shape(args.shape, args.seed)
    return steklov_domain(spec) if domain else generate_shape(spec)


def _source(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--shape", help="shape kind, optionally kind:key=value,...")
    g.add_argument("--mesh", help="OFF mesh file")
    p.add_argument("--seed", type=int, default=0)


def _dump(obj, path):
    text = json.dumps(obj, indent=1, sort_keys=True)
    if path:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return text


def cmd_generate(args):
    spec = parse_shape(args.shape, args.seed)
    mesh = steklov_domain(spec) if args.domain else generate_shape(spec)
    out = args.out or os.path.join(os.environ.get(OUT_ENV, "."), f"{spec.kind}.off")
    save_mesh(mesh, out)
    print(f"{out}: {mesh.n_vertices} vertices, {len(mesh.cells)} cells, "
          f"{mesh.n_components if mesh.has_boundary else 0} boundary components")
    return 0


def cmd_spectrum(args):
    if args.kind == "laplace":
        mesh = _mesh_from_args(args, domain=False)
        res = laplace_spectrum(mesh, args.k)
    else:
        mesh = _mesh_from_args(args, domain=True)
        res = steklov_spectrum(mesh, args.k)
    print(f"{'j':>3}  {'eigenvalue':>20}  {'residual':>10}")
    for j, (lam, r) in enumerate(zip(res.eigenvalues, res.residuals)):
        print(f"{j:>3}  {lam:>20.12g}  {r:>10.2e}")
    text = _dump(res.to_dict(), args.out)
    if args.json:
        print(text)
    return 0


def cmd_invariants(args):
    mesh = _mesh_from_args(args, domain=True)
    inv = compute_invariants(mesh, samples=args.samples, seed=args.seed)
    d = inv.to_dict()
    print(f"n = {d['n']}  b = {d['b']}  |M| = {d['volume']:.6g}")
    print(f"Lambda = {d['distortion']:.6g}  N_M = {d['N_M']}  "
          f"N_Sigma = {d['N_sigma']}  Gamma = {d['growth']:.6g}")
    for j in range(d["b"]):
        inj = d["inj"][j]
        print(f"  component {j}: |Sigma_j| = {d['boundary_volumes'][j]:.6g}  "
              f"Lambda_j = {d['distortions'][j]:.6g}  "
              f"Diam_M = {d['diam_extrinsic'][j]}  Diam = {d['diam_intrinsic'][j]:.6g}  "
              f"inj = {'unavailable' if inj is None else format(inj, '.6g')} "
              f"({d['inj_method'][j]})")
    text = _dump(d, args.out)
    if args.json:
        print(text)
    return 0


def _print_summary(report):
    s = report["summary"]
    print(f"{s['total']} checks: {s['pass']} pass, {s['inconclusive']} inconclusive, "
          f"{s['fail']} fail, {s['vacuous']} vacuous; {s['errors']} errors, "
          f"{s['skipped']} skipped")
    worst = {}
    for r in report["bounds"]:
        key = (r["shape"], r["inequality_id"])
        sl = r["slack"] if r["slack"] is not None else math.inf
        worst[key] = min(worst.get(key, math.inf), sl)
    for (shape, ineq), sl in worst.items():
        print(f"  {shape:<20} {ineq:<20} min slack {sl:.4g}")
    for d in report["diagnostics"]:
        print(f"  [{d['level']}] {d['shape']} {d['stage']}: {d['error']}: {d['message']}")


def cmd_verify(args):
    over = {"k_max": args.k, "samples": args.samples, "seed": args.seed_override,
            "slack": args.slack, "workers": args.workers, "output_dir": args.out,
            "sharp_concentration": True if args.sharp_concentration else None}
    if args.config:
        cfg = load_config(args.config, **over)
    else:
        if not args.shape:
            raise ConfigError("verify needs --config or at least one --shape")
        seed = args.seed_override or 0
        shapes = [parse_shape(s, seed) for s in args.shape]
        kinds = [s.kind for s in shapes]
        names = [k if kinds.count(k) == 1 else f"{k}{i}" for i, k in enumerate(kinds)]
        cfg = RunConfig(shapes=shapes, names=names,
                        **{k: v for k, v in over.items() if v is not None})
    report = run_verify(cfg)
    jpath, cpath = write_outputs(report, cfg.output_dir)
    _print_summary(report)
    print(f"wrote {jpath} and {cpath}")
    return report["summary"]["exit_code"]


def cmd_report(args):
    path = args.input
    if os.path.isdir(path):
        path = os.path.join(path, "report.json")
    with open(path) as fh:
        report = json.load(fh)
    _print_summary(report)
    return report["summary"]["exit_code"]


def build_parser():
    p = argparse.ArgumentParser(prog="steklab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a generated shape as OFF")
    g.add_argument("--shape", required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.add_argument("--domain", action="store_true",
                   help="write the Steklov domain (closed shapes extruded)")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("spectrum", help="Steklov or Laplace eigenvalues")
    _source(s)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--kind", choices=("steklov", "laplace"), default="steklov")
    s.add_argument("--out", help="write JSON here")
    s.add_argument("--json", action="store_true", help="also print JSON")
    s.set_defaults(func=cmd_spectrum)

    i = sub.add_parser("invariants", help="metric invariants of a mesh")
    _source(i)
    i.add_argument("--samples", type=int, default=256)
    i.add_argument("--out", help="write JSON here")
    i.add_argument("--json", action="store_true", help="also print JSON")
    i.set_defaults(func=cmd_invariants)

    v = sub.add_parser("verify", help="run the inequality suite")
    v.add_argument("--config", help="INI run description")
    v.add_argument("--shape", action="append", help="shape (repeatable) when no config")
    v.add_argument("--k", type=int)
    v.add_argument("--samples", type=int)
    v.add_argument("--seed", dest="seed_override", type=int)
    v.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./steklab_out)")
    v.add_argument("--slack", type=float)
    v.add_argument("--sharp-concentration", action="store_true")
    v.add_argument("--workers", type=int)
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("report", help="summarize a written report")
    r.add_argument("input", help="report.json or the directory holding it")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SteklabError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
