"""Command-line entry point.

One binary, six subcommands: verify (acceptance batteries), bend, graft,
develop, traintrack, k-metric.  Configuration comes from flags plus an
optional JSON config file; flags win over the file, and the GRAFTLAB_OUT
environment variable overrides --out.  All JSON artifacts carry
"schema": "graftlab/1" and are byte-identical across runs with equal
seed and configuration.
"""

import argparse
import json
import os
import sys

from .errors import ConfigError, GraftLabError
from .mobius import Geodesic, INFTY
from .hyperbolic import PointH2
from .surface import build_octagon, thurston_K, word
from .lamination import FiniteMeasuredLamination, Multiloop
from .bending import BendingMap, bend_geodesic
from .grafting import ProjectiveStructureDesc, graft, holonomy_trace_report
from .traintrack import build_multiannular_track, geometry_audit
from . import figures
from .verify import (
    K_LOOPS,
    PROBE_WORDS,
    RunConfig,
    SCHEMA,
    SUITES,
    canonical_json,
    run_verify,
)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_ERROR = 2


def _endpoint(text: str):
    return INFTY if text in ("inf", "infinity") else float(text)


def _extract_tol_flags(argv):
    """Pull --tol.<name> <value> pairs out of argv; argparse cannot
    declare dynamically named flags."""
    rest, tol = [], {}
    i = 0
    while i < len(argv):
        arg = argv[i]
        if arg.startswith("--tol."):
            name, eq, inline = arg[6:].partition("=")
            if not name:
                raise ConfigError("--tol. needs a check name")
            if eq:
                value = inline
            else:
                i += 1
                if i >= len(argv):
                    raise ConfigError(f"--tol.{name} needs a value")
                value = argv[i]
            try:
                tol[name] = float(value)
            except ValueError:
                raise ConfigError(f"tolerance {name} must be a number")
        else:
            rest.append(arg)
        i += 1
    return rest, tol


def _load_config_file(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path}: {exc}")
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return data


def _merge_config(args, tol_flags, default_depth=4):
    """File values fill in whatever flags left unset; flags win."""
    file_cfg = _load_config_file(args.config) if args.config else {}
    tol = dict(file_cfg.get("tol", {}))
    tol.update(tol_flags)
    seed = args.seed if args.seed is not None else file_cfg.get("seed", 7)
    depth = (args.depth if args.depth is not None
             else file_cfg.get("depth", default_depth))
    out = args.out if args.out is not None else file_cfg.get("out", ".")
    out = os.environ.get("GRAFTLAB_OUT", out)
    suites = tuple(getattr(args, "suite", None) or file_cfg.get("suites", ()))
    samples = dict(file_cfg.get("sampleCounts", {}))
    return RunConfig(
        command=args.command,
        suites=suites,
        inputs=tuple(file_cfg.get("inputs", ())),
        out_dir=out,
        tol=tol,
        seed=seed,
        depth=depth,
        sample_counts=samples,
    )


def _write(out_dir, name, payload):
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w") as fh:
        fh.write(canonical_json(payload))
    return path


def _tagged(payload: dict) -> dict:
    return {"schema": SCHEMA, **payload}


# --- subcommands ---------------------------------------------------------------------

def _cmd_verify(args, tol_flags):
    cfg = _merge_config(args, tol_flags)
    battery = run_verify(cfg)
    report_path = _write(cfg.out_dir, "report.json", battery.to_json())
    # wall times live in a sidecar so the report stays reproducible
    _write(cfg.out_dir, "timings.json",
           _tagged({"timings": battery.timings()}))
    for rep in battery.reports:
        print(f"{rep.suite}: {'pass' if rep.passed else 'FAIL'} "
              f"({len(rep.checks)} checks, {rep.wall_time:.2f}s)")
        for c in rep.checks:
            if not c.passed:
                print(f"  FAIL {c.name}: {c.measured:.6e} "
                      f"!{c.op} {c.bound:.6e}")
    print(f"report: {report_path}")
    return EXIT_PASS if battery.passed else EXIT_FAIL


def _cmd_bend(args, tol_flags):
    cfg = _merge_config(args, tol_flags)
    if args.lamination:
        with open(args.lamination) as fh:
            lam = FiniteMeasuredLamination.from_json(json.load(fh))
    else:
        lam = FiniteMeasuredLamination([(Geodesic(0.0, INFTY), 3.0)])
    basepoint = PointH2(*args.basepoint)
    b = BendingMap(lam, basepoint)
    source = Geodesic(_endpoint(args.line[0]), _endpoint(args.line[1]))
    poly = bend_geodesic(b, source, span=args.span, steps=args.steps)
    paths = [_write(cfg.out_dir, "polyline.json", _tagged(poly.to_json()))]
    csv_path = os.path.join(cfg.out_dir, "polyline.csv")
    with open(csv_path, "w") as fh:
        fh.write(poly.to_csv())
    paths.append(csv_path)
    svg_path = os.path.join(cfg.out_dir, "side-view.svg")
    with open(svg_path, "w") as fh:
        fh.write(figures.polyline_side_view(poly, source).to_svg())
    paths.append(svg_path)
    for p in paths:
        print(p)
    return EXIT_PASS


def _cmd_graft(args, tol_flags):
    cfg = _merge_config(args, tol_flags, default_depth=3)
    if args.structure:
        with open(args.structure) as fh:
            structure = ProjectiveStructureDesc.from_json(json.load(fh))
    else:
        structure = ProjectiveStructureDesc(build_octagon())
    with open(args.multiloop) as fh:
        m = Multiloop.from_json(json.load(fh))
    grafted = graft(structure, m, depth=cfg.depth)
    rows = holonomy_trace_report(
        structure, grafted, [word(w) for w in PROBE_WORDS], depth=cfg.depth,
    )
    paths = [
        _write(cfg.out_dir, "structure.json", _tagged(grafted.to_json())),
        _write(cfg.out_dir, "trace-report.json", _tagged({
            "rows": [r.to_json() for r in rows],
            "maxDefect": max(r.defect for r in rows),
        })),
    ]
    for p in paths:
        print(p)
    return EXIT_PASS


def _cmd_develop(args, tol_flags):
    cfg = _merge_config(args, tol_flags)
    fig_cfg = RunConfig(command=args.recipe, out_dir=cfg.out_dir,
                        tol=cfg.tol, seed=cfg.seed, depth=cfg.depth)
    for p in figures.run_figure(fig_cfg):
        print(p)
    return EXIT_PASS


def _cmd_traintrack(args, tol_flags):
    cfg = _merge_config(args, tol_flags)
    surface = build_octagon()
    words = [word(w) for w in args.loops]
    track = build_multiannular_track(surface, words)
    audit = geometry_audit(track, args.epsilon)
    paths = [
        _write(cfg.out_dir, "track.json", _tagged(track.to_json())),
        _write(cfg.out_dir, "audit.json", _tagged(audit.to_json())),
    ]
    axes = [surface.evaluate(w).axis() for w in words]
    svg_text = figures.track_figure(track, axes=axes).to_svg()
    svg_path = os.path.join(cfg.out_dir, "traintrack-embedding.svg")
    with open(svg_path, "w") as fh:
        fh.write(svg_text)
    png_path = os.path.join(cfg.out_dir, "traintrack-embedding.png")
    figures.rasterize_svg(svg_text).save(png_path)
    paths += [svg_path, png_path]
    for p in paths:
        print(p)
    print(f"audit at {args.epsilon}: {'pass' if audit.passed else 'FAIL'}")
    return EXIT_PASS if audit.passed else EXIT_FAIL


def _cmd_k_metric(args, tol_flags):
    cfg = _merge_config(args, tol_flags)
    tau = build_octagon(tuple(getattr(args, "from")))
    tau_prime = build_octagon(tuple(args.to))
    loops = [word(w) for w in K_LOOPS]
    fwd = thurston_K(tau, tau_prime, loops)
    bwd = thurston_K(tau_prime, tau, loops)
    payload = _tagged({
        "from": list(getattr(args, "from")),
        "to": list(args.to),
        "K": fwd,
        "KReversed": bwd,
        "loops": list(K_LOOPS),
    })
    path = _write(cfg.out_dir, "k-metric.json", payload)
    print(f"K(from, to) = {fwd:.12g}")
    print(f"K(to, from) = {bwd:.12g}")
    print(path)
    return EXIT_PASS


# --- parser --------------------------------------------------------------------------

def _add_common(p):
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--config", default=None,
                   help="JSON config file; flags win over its values")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graftlab",
        description="Desk-scale toolkit for complex projective structures "
                    "on a genus-2 surface.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run verification suites")
    p.add_argument("--suite", action="append", choices=sorted(SUITES),
                   help="suite to run (repeatable; default: all)")
    _add_common(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("bend", help="bend a geodesic and export the polyline")
    p.add_argument("--lamination", default=None,
                   help="lamination JSON (default: one vertical leaf, weight 3)")
    p.add_argument("--line", nargs=2, default=("-1", "1"),
                   metavar=("P", "Q"), help="source geodesic endpoints")
    p.add_argument("--basepoint", nargs=2, type=float, default=(-1.0, 1.0))
    p.add_argument("--span", type=float, default=2.5)
    p.add_argument("--steps", type=int, default=192)
    _add_common(p)
    p.set_defaults(func=_cmd_bend)

    p = sub.add_parser("graft", help="graft a structure along a multiloop")
    p.add_argument("--structure", default=None,
                   help="structure JSON (default: base octagon surface)")
    p.add_argument("--multiloop", required=True, help="multiloop JSON")
    _add_common(p)
    p.set_defaults(func=_cmd_graft)

    p = sub.add_parser("develop", help="developing-map figures")
    p.add_argument("--recipe", default="hopf-development",
                   choices=figures.RECIPES)
    _add_common(p)
    p.set_defaults(func=_cmd_develop)

    p = sub.add_parser("traintrack", help="build and audit an annular track")
    p.add_argument("--loops", nargs="+", default=["a1"])
    p.add_argument("--epsilon", type=float, default=0.1)
    _add_common(p)
    p.set_defaults(func=_cmd_traintrack)

    p = sub.add_parser("k-metric", help="Thurston asymmetric distance "
                                        "between two octagon surfaces")
    p.add_argument("--from", nargs=2, type=float, default=(0.0, 0.0),
                   metavar=("U", "PSI"))
    p.add_argument("--to", nargs=2, type=float, default=(0.15, 0.0),
                   metavar=("U", "PSI"))
    _add_common(p)
    p.set_defaults(func=_cmd_k_metric)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv, tol_flags = _extract_tol_flags(argv)
        args = build_parser().parse_args(argv)
        return args.func(args, tol_flags)
    except GraftLabError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"IOError: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
