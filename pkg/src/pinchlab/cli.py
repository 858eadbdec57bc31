"""Command-line front end: mesh generation, spectra, pinching reports,
and refinement studies.

Exit codes: 0 success (hypothesis-violation reports included), 2 usage,
3 input or validation failure, 4 solver non-convergence. A config file of
``key = value`` lines (one per long flag) may be passed with --config;
explicit flags override it.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys

from . import __version__
from .curvature import delta_position_residual, hsiung_minkowski_residual, vertex_geometry
from .mesh import (
    Ellipsoid,
    MeshError,
    PerturbedSphere,
    Sphere,
    Torus,
    generate,
    load_mesh,
    normalize,
    save_mesh,
)
from .pinching import ReportOptions, full_report, reilly_deficit
from .spectral import SolverError, assemble_mass, assemble_stiffness, lowest_spectrum

FAMILY_CSV_HEADER = "shape,t,subdiv,deficit,eps_annulus,eps_density,hausdorff,theta_star,lambda1"


def _add_shape_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--shape", choices=["sphere", "ellipsoid", "perturbed", "torus"])
    p.add_argument("--radius", type=float, default=None)
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--b", type=float, default=None)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--l", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--major", type=float, default=None)
    p.add_argument("--minor", type=float, default=None)
    p.add_argument("--subdiv", type=int, default=4)


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="key = value file mirroring the flags")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pinchlab")
    parser.add_argument("--version", action="version", version=f"pinchlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a mesh file")
    _add_shape_flags(p_gen)
    _add_common_flags(p_gen)

    p_spec = sub.add_parser("spectrum", help="lowest Laplace eigenvalues")
    _add_shape_flags(p_spec)
    _add_common_flags(p_spec)
    p_spec.add_argument("-i", "--input", default=None, help="mesh file instead of shape flags")
    p_spec.add_argument("--count", type=int, default=1)
    p_spec.add_argument("--tol", type=float, default=1e-8)

    p_pinch = sub.add_parser("pinch", help="pinching report for one shape or a family")
    _add_shape_flags(p_pinch)
    _add_common_flags(p_pinch)
    p_pinch.add_argument("-i", "--input", default=None)
    p_pinch.add_argument("--k", type=int, default=1)
    p_pinch.add_argument("--p", type=float, default=2.0)
    p_pinch.add_argument("--tol", type=float, default=0.05, help="discretization slack tol_disc")
    p_pinch.add_argument("--samples", type=int, default=2000)
    p_pinch.add_argument("--family", choices=["ellipsoid", "perturbed"], default=None)
    p_pinch.add_argument("--t", default=None, help="comma list of family parameters")
    p_pinch.add_argument("--format", choices=["json", "csv"], default=None)
    p_pinch.add_argument("--plot", default=None, help="write a gnuplot script next to the CSV")

    p_conv = sub.add_parser("convergence", help="refinement study across subdivision levels")
    _add_shape_flags(p_conv)
    _add_common_flags(p_conv)
    p_conv.add_argument("--k", type=int, default=1)
    p_conv.add_argument("--p", type=float, default=2.0)
    p_conv.add_argument("--subdivs", default="2,3,4", help="comma list of subdivision levels")
    p_conv.add_argument("--plot", default=None)
    return parser


def _apply_config_file(argv: list[str]) -> list[str]:
    """Splice config-file entries in front of explicit flags (which win)."""
    if not argv or argv[0].startswith("-"):
        return argv
    out = [argv[0]]
    rest = argv[1:]
    path = None
    cleaned = []
    i = 0
    while i < len(rest):
        if rest[i] == "--config":
            if i + 1 >= len(rest):
                raise SystemExit(2)
            path = rest[i + 1]
            i += 2
        elif rest[i].startswith("--config="):
            path = rest[i].split("=", 1)[1]
            i += 1
        else:
            cleaned.append(rest[i])
            i += 1
    if path is None:
        return argv
    cfg_flags = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise MeshError(f"config line without '=': {line!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            cfg_flags.extend([f"--{key}", value])
    return out + cfg_flags + cleaned


def _shape_from_args(args) -> object:
    if args.shape is None:
        raise MeshError("no shape given: pass --shape or an input file")
    if args.shape == "sphere":
        return Sphere(radius=args.radius if args.radius is not None else 1.0)
    if args.shape == "ellipsoid":
        return Ellipsoid(
            a=args.a if args.a is not None else 1.0,
            b=args.b if args.b is not None else 1.0,
            c=args.c if args.c is not None else 1.0,
        )
    if args.shape == "perturbed":
        return PerturbedSphere(
            l=args.l if args.l is not None else 2,
            m=args.m if args.m is not None else 0,
            delta=args.delta if args.delta is not None else 0.05,
        )
    return Torus(
        major=args.major if args.major is not None else 2.0,
        minor=args.minor if args.minor is not None else 0.5,
    )


def _mesh_from_args(args):
    if getattr(args, "input", None):
        return load_mesh(args.input)
    return generate(_shape_from_args(args), args.subdiv)


def _config_hash(args) -> str:
    skip = {"command", "output", "config", "plot"}
    items = sorted(
        (key, repr(value)) for key, value in vars(args).items() if key not in skip
    )
    blob = "\n".join(f"{k}={v}" for k, v in items)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def _meta(args) -> dict:
    return {
        "version": __version__,
        "seed": getattr(args, "seed", 0),
        "config_hash": _config_hash(args),
    }


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def cmd_gen(args) -> int:
    mesh = generate(_shape_from_args(args), args.subdiv)
    if not args.output:
        raise MeshError("gen needs -o/--output")
    save_mesh(mesh, args.output)
    print(f"{mesh.name}: {mesh.n_vertices} vertices, {mesh.n_faces} faces, "
          f"euler {mesh.euler_characteristic()} -> {args.output}")
    return 0


def cmd_spectrum(args) -> int:
    mesh = _mesh_from_args(args)
    K = assemble_stiffness(mesh)
    M = assemble_mass(mesh)
    pairs = lowest_spectrum(K, M, args.count, tol=args.tol, seed=args.seed)
    doc = {
        "lambda": [p.lam for p in pairs],
        "residuals": [p.residual for p in pairs],
        "solver": {"tol": args.tol, "iters": None},
        "meta": _meta(args),
    }
    _emit(json.dumps(doc, indent=2), args.output)
    return 0


def _family_members(args):
    ts = [float(s) for s in str(args.t).split(",") if s.strip()]
    if not ts:
        raise MeshError("--family needs --t with at least one value")
    for t in ts:
        if args.family == "ellipsoid":
            yield t, Ellipsoid(1.0, 1.0, 1.0 + t)
        else:
            yield t, PerturbedSphere(
                l=args.l if args.l is not None else 2,
                m=args.m if args.m is not None else 0,
                delta=t,
            )


def cmd_pinch(args) -> int:
    options = ReportOptions(
        k=args.k, p=args.p, tol_disc=args.tol, samples=args.samples, seed=args.seed,
    )
    if args.family:
        if args.t is None:
            raise MeshError("--family needs --t")
        rows = [FAMILY_CSV_HEADER]
        for t, shape in _family_members(args):
            mesh = generate(shape, args.subdiv)
            rep = full_report(mesh, k=args.k, p=args.p, options=options)
            rows.append(
                f"{args.family},{t!r},{args.subdiv},{rep.deficit!r},"
                f"{rep.annulus_eps_star!r},{rep.density_eps_star!r},"
                f"{rep.hausdorff!r},{rep.distortion_theta_star!r},{rep.lambda1!r}"
            )
        text = "\n".join(rows) + "\n"
        _emit(text, args.output)
        if args.plot:
            _write_family_plot(args.plot, args.output or "family.csv")
        return 0

    mesh = _mesh_from_args(args)
    rep = full_report(mesh, k=args.k, p=args.p, options=options)
    if args.format == "csv":
        text = (FAMILY_CSV_HEADER + "\n"
                f"{mesh.name},,{args.subdiv},{rep.deficit!r},{rep.annulus_eps_star!r},"
                f"{rep.density_eps_star!r},{rep.hausdorff!r},"
                f"{rep.distortion_theta_star!r},{rep.lambda1!r}\n")
        _emit(text, args.output)
    else:
        doc = rep.to_dict()
        doc["meta"] = _meta(args)
        _emit(json.dumps(doc, indent=2), args.output)
    return 0


def cmd_convergence(args) -> int:
    shape = _shape_from_args(args)
    subdivs = [int(s) for s in str(args.subdivs).split(",") if s.strip()]
    lam_exact = None
    if isinstance(shape, Sphere):
        lam_exact = 2.0 / shape.radius ** 2
    header = "subdiv,lambda1,lambda1_err,hm_residual,deltax_residual,deficit"
    rows = [header]
    for s in subdivs:
        mesh = generate(shape, s)
        geom = vertex_geometry(mesh)
        K = assemble_stiffness(mesh)
        M = assemble_mass(mesh)
        lam = lowest_spectrum(K, M, 1, seed=args.seed)[0].lam
        lam_err = abs(lam - lam_exact) / lam_exact if lam_exact else None
        hm = abs(hsiung_minkowski_residual(mesh, geom, args.k))
        dres = delta_position_residual(mesh, geom, K, M)
        normalized, _, _ = normalize(mesh)
        geom_n = vertex_geometry(normalized)
        deficit = reilly_deficit(normalized, geom_n, args.k, args.p)
        lam_err_s = "" if lam_err is None else repr(lam_err)
        rows.append(f"{s},{lam!r},{lam_err_s},{hm!r},{dres!r},{deficit!r}")
    text = "\n".join(rows) + "\n"
    _emit(text, args.output)
    if args.plot:
        _write_convergence_plot(args.plot, args.output or "convergence.csv")
    return 0


def _write_family_plot(path: str, csv_path: str) -> None:
    script = "\n".join([
        "set datafile separator ','",
        "set key autotitle columnhead outside",
        "set logscale y",
        "set xlabel 't'",
        f"plot '{csv_path}' using 't':'deficit' with linespoints, \\",
        f"     '{csv_path}' using 't':'hausdorff' with linespoints, \\",
        f"     '{csv_path}' using 't':'theta_star' with linespoints",
        "",
    ])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(script)


def _write_convergence_plot(path: str, csv_path: str) -> None:
    script = "\n".join([
        "set datafile separator ','",
        "set key autotitle columnhead outside",
        "set logscale y",
        "set xlabel 'subdiv'",
        f"plot '{csv_path}' using 'subdiv':'hm_residual' with linespoints, \\",
        f"     '{csv_path}' using 'subdiv':'deltax_residual' with linespoints",
        "",
    ])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(script)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _apply_config_file(argv)
    except OSError as exc:
        print(f"pinchlab: cannot read config: {exc}", file=sys.stderr)
        return 3
    except MeshError as exc:
        print(f"pinchlab: {exc}", file=sys.stderr)
        return 3
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "gen": cmd_gen,
        "spectrum": cmd_spectrum,
        "pinch": cmd_pinch,
        "convergence": cmd_convergence,
    }
    try:
        return handlers[args.command](args)
    except (MeshError, ValueError, OSError) as exc:
        print(f"pinchlab: {exc}", file=sys.stderr)
        return 3
    except SolverError as exc:
        print(f"pinchlab: solver failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
