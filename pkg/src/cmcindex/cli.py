"""Command-line front end.

Commands: ``zoo``, ``analyze``, ``harmonic``, ``index``, ``verify``,
``report``. A JSON config file (``--config``) may carry the same keys as
the long flags; flags override the file; unknown config keys are
rejected. ``--threads N`` caps BLAS threading (``--threads 1`` gives
bitwise-reproducible output).

Exit codes: 0 success (for ``index``: bound satisfied or not applicable);
2 parse errors; 3 mesh validity errors; 4 bad parameters; 5 insufficient
fit data; 6 kernel/test-field mismatches; 7 solver failures; 8 a violated
genus bound; 9 verify-suite failures.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

_CONFIG_KEYS = {
    "mesh", "ambient", "alpha_sign", "eps_neg", "full_spectrum", "out",
    "format", "threads", "radius", "level", "orientation", "rho", "r",
    "nu", "nv", "length", "amplitude", "resolution", "lattice", "offset",
    "generator", "seed", "hops",
}


def _set_threads(n: int) -> None:
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS"):
        os.environ[var] = str(n)


def _load_config(path):
    from .errors import BadParameter, ParseError

    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ParseError(f"config {path}: no such file") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"config {path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ParseError(f"config {path}: top level must be an object")
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise BadParameter(f"config {path}: unknown keys {sorted(unknown)}")
    return data


def _merge_config(args, parser_defaults: dict):
    """Config-file values fill in flags the user left at their default."""
    if not getattr(args, "config", None):
        return args
    cfg = _load_config(args.config)
    for key, value in cfg.items():
        if hasattr(args, key) and getattr(args, key) == parser_defaults.get(key):
            setattr(args, key, value)
    return args


def _build_parser():
    p = argparse.ArgumentParser(prog="cmcindex", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--threads", type=int, default=0, help="BLAS thread cap (1 = reproducible)")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, mesh=True):
        sp.add_argument("--config", default=None, help="JSON config file (flags override)")
        sp.add_argument("--threads", type=int, default=0,
                        help="BLAS thread cap (1 = reproducible)")
        if mesh:
            sp.add_argument("--mesh", default=None, help="surface/mesh JSON, OFF, or OBJ path")
            sp.add_argument("--ambient", default=None, choices=["R3", "T3", "S3"],
                            help="ambient tag override for OFF/OBJ input")
        sp.add_argument("--alpha-sign", dest="alpha_sign", type=int, default=0,
                        choices=[-1, 0, 1], help="S3 rotation sign (0 = keep surface value)")
        sp.add_argument("--out", default=None, help="output path")
        sp.add_argument("--format", default="json", choices=["json", "csv"])

    z = sub.add_parser("zoo", help="generate an analytic surface")
    z.add_argument("generator", help="sphere_r3 | geodesic_sphere_s3 | flat_torus_s3 | "
                                     "flat_torus_t3 | cylinder_r3 | perturbed_sphere_r3 | genus2_r3")
    z.add_argument("--radius", type=float, default=1.0)
    z.add_argument("--level", type=int, default=3)
    z.add_argument("--orientation", default="inward", choices=["inward", "outward"])
    z.add_argument("--rho", type=float, default=0.7853981633974483)
    z.add_argument("--r", type=float, default=0.7071067811865476)
    z.add_argument("--nu", type=int, default=32)
    z.add_argument("--nv", type=int, default=32)
    z.add_argument("--length", type=float, default=8.0)
    z.add_argument("--amplitude", type=float, default=0.08)
    z.add_argument("--resolution", type=int, default=60)
    z.add_argument("--lattice", default=None, help="3x3 lattice as JSON (T3)")
    z.add_argument("--offset", default=None, help="3-vector as JSON (T3)")
    common(z, mesh=False)

    a = sub.add_parser("analyze", help="summarize a surface and its residuals")
    common(a)

    h = sub.add_parser("harmonic", help="compute the harmonic 1-form basis")
    common(h)

    i = sub.add_parser("index", help="harmonic-span (and optional full-space) index report")
    common(i)
    i.add_argument("--eps-neg", dest="eps_neg", type=float, default=None,
                   help="negative-count tolerance override")
    i.add_argument("--full-spectrum", dest="full_spectrum", type=int, default=0,
                   help="also run the full 1-form space, reporting N lowest eigenvalues")

    v = sub.add_parser("verify", help="run the identity/bound suite")
    common(v)
    v.add_argument("--eps-neg", dest="eps_neg", type=float, default=None)
    v.add_argument("--resolution", type=int, default=32,
                   help="grid resolution for the built-in zoo set")

    r = sub.add_parser("report", help="re-emit a saved index report")
    r.add_argument("--in", dest="infile", required=True, help="index report JSON")
    r.add_argument("--out", default=None)
    r.add_argument("--format", default="csv", choices=["json", "csv"])
    r.add_argument("--config", default=None)
    r.add_argument("--threads", type=int, default=0)
    return p


# -- surface loading -------------------------------------------------------------


def _load_surface(args):
    import numpy as np

    from . import ambient as amb
    from . import meshio, surfaces
    from .errors import BadParameter

    from .errors import ParseError

    if not args.mesh:
        raise BadParameter("--mesh is required for this command")
    path = Path(args.mesh)
    if path.suffix.lower() == ".json":
        try:
            data = json.loads(path.read_text())
        except FileNotFoundError as exc:
            raise ParseError(f"{path}: no such file") from exc
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON ({exc})") from exc
        if "normal" in data:
            surface = meshio.load_surface(path)
        else:
            mesh = meshio.load_mesh(path)
            surface = surfaces.surface_from_mesh(mesh)
        generator = data.get("generator")
    else:
        space = amb.AmbientSpace(args.ambient) if args.ambient else None
        mesh = meshio.load_mesh(path, space=space)
        surface = surfaces.surface_from_mesh(mesh)
        generator = None
    if args.alpha_sign and surface.space.tag == amb.SPHERE3:
        surface = surface.with_alpha_sign(args.alpha_sign)
    return surface, generator


def _zoo_params(args) -> dict:
    name = args.generator
    if name == "sphere_r3":
        return {"radius": args.radius, "level": args.level, "orientation": args.orientation}
    if name == "geodesic_sphere_s3":
        return {"rho": args.rho, "level": args.level}
    if name == "flat_torus_s3":
        return {"r": args.r, "n_u": args.nu, "n_v": args.nv}
    if name == "flat_torus_t3":
        lattice = json.loads(args.lattice) if args.lattice else None
        offset = json.loads(args.offset) if args.offset else None
        return {"lattice": lattice, "n_u": args.nu, "n_v": args.nv, "offset": offset}
    if name == "cylinder_r3":
        return {"radius": args.radius, "length": args.length, "n_u": args.nu, "n_v": args.nv}
    if name == "perturbed_sphere_r3":
        return {"level": args.level, "amplitude": args.amplitude}
    if name == "genus2_r3":
        return {"resolution": args.resolution}
    from .errors import UnknownGenerator

    raise UnknownGenerator(f"unknown generator {name!r}")


# -- commands ---------------------------------------------------------------------


def cmd_zoo(args) -> int:
    import numpy as np

    from . import meshio, surfaces
    from .errors import BadParameter, DomainError

    params = _zoo_params(args)
    try:
        surface = surfaces.GENERATORS[args.generator](**params)
    except DomainError as exc:
        raise BadParameter(str(exc)) from exc
    out = args.out or f"{args.generator}.json"
    doc = meshio.surface_to_dict(surface)
    doc["generator"] = {"name": args.generator, "params": {
        k: (v if not hasattr(v, "tolist") else v.tolist()) for k, v in params.items()}}
    from .report import write_report

    write_report(doc, out)
    mesh = surface.mesh
    md = mesh.metric()
    gtxt = "-" if mesh.has_boundary else str(mesh.genus())
    print(f"{args.generator}: V={mesh.n_vertices} E={mesh.n_edges} F={mesh.n_faces} "
          f"genus={gtxt} area={md.total_area:.6g} "
          f"H_mean={float(np.mean(surface.H)):.6g} -> {out}")
    return 0


def cmd_analyze(args) -> int:
    import numpy as np

    from . import indexform as ix
    from .report import code_version, write_report

    surface, _ = _load_surface(args)
    mesh = surface.mesh
    md = mesh.metric()
    doc = {
        "ambient": surface.space.tag,
        "provenance": surface.provenance,
        "V": mesh.n_vertices,
        "E": mesh.n_edges,
        "F": mesh.n_faces,
        "boundary": bool(mesh.has_boundary),
        "genus": None if mesh.has_boundary else mesh.genus(),
        "area": md.total_area,
        "gauss_bonnet_residual": None if mesh.has_boundary else md.gauss_bonnet_residual(mesh),
        "H_mean": float(np.mean(surface.H)),
        "H_std": float(np.std(surface.H)),
        "energy": ix.energy(surface),
        "antisym_residual": ix.antisymmetry_residual(surface),
        "gauss_eq_residual": ix.gauss_equation_residual(surface),
        "harmonicity_residual": ix.harmonicity_residual(surface),
        "code_version": code_version(),
    }
    text = json.dumps(doc, sort_keys=True, indent=2)
    print(text)
    if args.out:
        write_report(doc, args.out)
    return 0


def cmd_harmonic(args) -> int:
    from . import hodge
    from .report import write_report

    surface, _ = _load_surface(args)
    basis = hodge.harmonic_basis(surface)
    print(f"harmonic dimension: {basis.dimension} (genus {surface.mesh.genus()}); "
          f"max d-residual {basis.residual_d.max() if basis.dimension else 0.0:.3e}, "
          f"max delta-residual {basis.residual_delta.max() if basis.dimension else 0.0:.3e}")
    if args.out:
        write_report(basis.to_dict(), args.out)
    return 0


def _embed_meta(report_dict, args) -> dict:
    from .report import code_version

    cfg = {k: getattr(args, k) for k in ("mesh", "ambient", "alpha_sign", "eps_neg",
                                         "full_spectrum", "format")
           if hasattr(args, k)}
    report_dict["meta"] = dict(report_dict.get("meta", {}))
    report_dict["meta"]["config"] = cfg
    report_dict["meta"]["code_version"] = code_version()
    return report_dict


def cmd_index(args) -> int:
    from . import hodge
    from . import indexform as ix
    from .report import write_eigenvalue_csv, write_report

    surface, generator = _load_surface(args)
    label = generator["name"] if generator else Path(args.mesh).stem
    basis = hodge.harmonic_basis(surface)
    span = ix.index_on_harmonic_span(surface, basis, eps_neg=args.eps_neg, label=label)
    doc = _embed_meta(span.to_dict(), args)
    reports = {"harmonic_span": doc}
    ok = span.bound_satisfied
    if args.full_spectrum:
        full = ix.index_full_space(surface, n_eigs=args.full_spectrum,
                                   eps_neg=args.eps_neg, label=label)
        reports["full_1form_space"] = _embed_meta(full.to_dict(), args)
        ok = ok and full.bound_satisfied
    out_doc = reports["harmonic_span"] if not args.full_spectrum else reports
    print(json.dumps(out_doc, sort_keys=True, indent=2))
    if args.out:
        if args.format == "csv":
            write_eigenvalue_csv(doc, args.out)
        else:
            write_report(out_doc, args.out)
    if not ok:
        from .errors import BoundViolation

        raise BoundViolation(
            f"negative count {span.index_estimate} below genus {span.genus}"
        )
    return 0


def cmd_verify(args) -> int:
    from .verify import run_suite

    surface = generator = None
    if args.mesh:
        surface, generator = _load_surface(args)
    rows = run_suite(surface=surface, generator=generator,
                     alpha_sign=args.alpha_sign or None,
                     resolution=args.resolution, eps_neg=args.eps_neg)
    width = max(len(r.name) for r in rows)
    all_ok = True
    for r in rows:
        status = "PASS" if r.ok else ("SKIP" if r.ok is None else "FAIL")
        if r.ok is False:
            all_ok = False
        print(f"{r.name:<{width}}  {status}  {r.detail}")
    print(f"verify: {'all checks passed' if all_ok else 'FAILURES PRESENT'}")
    if args.out:
        from .report import write_report

        write_report({"rows": [r.to_dict() for r in rows], "ok": all_ok}, args.out)
    return 0 if all_ok else 9


def cmd_report(args) -> int:
    from .errors import ParseError
    from .report import dumps_canonical, eigenvalue_csv

    try:
        data = json.loads(Path(args.infile).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{args.infile}: {exc}") from exc
    if "harmonic_span" in data:
        data_for_csv = data["harmonic_span"]
    else:
        data_for_csv = data
    text = eigenvalue_csv(data_for_csv) if args.format == "csv" else dumps_canonical(data)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.threads and args.threads > 0:
        _set_threads(args.threads)

    from .errors import CmcIndexError

    sub_action = next(a for a in parser._actions
                      if isinstance(a, argparse._SubParsersAction))
    defaults = {a.dest: a.default for a in parser._actions
                if not isinstance(a, argparse._SubParsersAction)}
    defaults.update({a.dest: a.default
                     for a in sub_action.choices[args.command]._actions})
    try:
        if getattr(args, "config", None):
            args = _merge_config(args, defaults)
        handler = {
            "zoo": cmd_zoo,
            "analyze": cmd_analyze,
            "harmonic": cmd_harmonic,
            "index": cmd_index,
            "verify": cmd_verify,
            "report": cmd_report,
        }[args.command]
        return handler(args)
    except CmcIndexError as exc:
        print(f"error[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
