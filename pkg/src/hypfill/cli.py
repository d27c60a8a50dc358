"""Command-line front end: generate corpus spaces, build fillings, run the
extension pipeline, and emit JSON reports.

Exit codes: 0 success, 1 domain or validation failure, 2 I/O or parse
failure.  Every subcommand is a pure function of its flags and input files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import analysis, extension, filling, gromov, qsmap, spaces
from .errors import DomainError, FileFormatError


def _default_jobs() -> int:
    env = os.environ.get("HYPFILL_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _write_json(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _filling_params(args) -> filling.FillingParams:
    return filling.FillingParams(
        alpha=args.alpha,
        tau=args.tau,
        n_min=getattr(args, "n_min", None),
        n_max=getattr(args, "n_max", None),
        depth_margin=args.margin,
    )


def cmd_gen(args) -> int:
    space = spaces.generate_space(args.kind, args.n, args.seed)
    spaces.save_space(space, args.out)
    return 0


def cmd_snowflake(args) -> int:
    space = spaces.load_space(args.input)
    spaces.save_space(spaces.snowflake(space, args.eps), args.out)
    return 0


def cmd_fill(args) -> int:
    space = spaces.load_space(args.input)
    graph = filling.build_filling(space, _filling_params(args))
    filling.save_filling(graph, args.out)
    if args.dot:
        Path(args.dot).write_text(filling.filling_to_dot(graph), encoding="utf-8")
    return 0


def cmd_delta(args) -> int:
    loaded = filling.load_filling(args.filling)
    report = gromov.hyperbolicity_delta(
        loaded,
        mode=args.mode,
        sample_count=args.samples,
        seed=args.seed,
        jobs=args.jobs,
    )
    payload = {
        "delta": report.delta,
        "mode": report.mode,
        "witness": list(report.witness),
        "nu_fit": None,
        "compare_C_fit": None,
    }
    if args.space:
        space = spaces.load_space(args.space)
        built = filling.build_filling(
            space,
            filling.FillingParams(
                loaded.alpha, loaded.tau, loaded.n_min, loaded.n_max
            ),
        )
        surrogate = gromov.busemann_values(built, 0)
        payload["nu_fit"] = gromov.busemann_deviation(surrogate)
        payload["compare_C_fit"] = gromov.visual_comparability(built, surrogate)
    _write_json(payload, args.out)
    return 0


def _load_pipeline_map(args) -> qsmap.PointMap:
    if args.map:
        return qsmap.load_map(args.map)
    space = spaces.load_space(args.space)
    return qsmap.identity_map(space, spaces.snowflake(space, args.eps))


def _pipeline(pmap, args):
    source = filling.build_filling(
        pmap.source,
        filling.FillingParams(args.alpha_z, args.tau_z, depth_margin=args.margin),
    )
    target = filling.build_filling(
        pmap.target,
        filling.FillingParams(args.alpha_w, args.tau_w, depth_margin=args.margin),
    )
    result = extension.snap_to_vertices(
        target, extension.extend_map(pmap, source, target)
    )
    return source, target, result


def _default_theta(args) -> float:
    if args.theta:
        return args.theta
    return 1.0 / args.eps if args.space else 1.0


def cmd_extend(args) -> int:
    pmap = _load_pipeline_map(args)
    source, target, result = _pipeline(pmap, args)
    theta = _default_theta(args)
    L1, L2 = analysis.predicted_slopes(theta, args.alpha_z, args.alpha_w)
    env = analysis.qi_envelope(result.vertex_map, source, target, L1, L2)
    completed = extension.ExtensionResult(
        source=result.source,
        target=result.target,
        geodesic_map=result.geodesic_map,
        raw_heights=result.raw_heights,
        cone_anchors=result.cone_anchors,
        vertex_map=result.vertex_map,
        snap_deviation=result.snap_deviation,
        constants={
            "L1": env.L1,
            "L2": env.L2,
            "k": env.k,
            "cobound": env.cobound,
            "snap_deviation": result.snap_deviation,
            "theta": theta,
        },
    )
    extension.save_extension(completed, args.out)
    return 0


def cmd_analyze(args) -> int:
    pmap = _load_pipeline_map(args)
    source, target, result = _pipeline(pmap, args)
    theta = _default_theta(args)
    L1, L2 = analysis.predicted_slopes(theta, args.alpha_z, args.alpha_w)
    env = analysis.qi_envelope(result.vertex_map, source, target, L1, L2)
    d_fit = analysis.strong_qi_check(
        result.vertex_map, source, target, L1, L2,
        sample_count=args.samples, seed=args.seed,
    )
    payload = {
        "slopes": [L1, L2],
        "k": env.k,
        "cobound": env.cobound,
        "strong_qi_d_fit": d_fit,
        "snap_deviation": result.snap_deviation,
        "environment": {
            "alpha_z": args.alpha_z,
            "alpha_w": args.alpha_w,
            "tau_z": args.tau_z,
            "tau_w": args.tau_w,
            "margin": args.margin,
            "seed": args.seed,
            "source_band": [source.n_min, source.n_max],
            "target_band": [target.n_min, target.n_max],
        },
    }
    _write_json(payload, args.out)
    return 0


def cmd_boundary(args) -> int:
    pmap = _load_pipeline_map(args)
    source, target, result = _pipeline(pmap, args)
    bnd = analysis.boundary_map(result.vertex_map, source, target)
    payload = {
        "forward": list(bnd.forward),
        "mu": list(bnd.mu),
        "bijective": bnd.bijective,
        "equals_input": list(bnd.forward) == list(pmap.forward),
    }
    _write_json(payload, args.out)
    return 0


def cmd_roundtrip(args) -> int:
    pmap = _load_pipeline_map(args)
    theta = _default_theta(args)
    report = analysis.roundtrip(
        pmap,
        theta,
        alphas=(args.alpha_z, args.alpha_w),
        taus=(args.tau_z, args.tau_w),
        depth=args.margin,
    )
    _write_json(report.to_dict(), args.out)
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=None,
                        help="worker threads (default: HYPFILL_JOBS or all cores)")
    parser.add_argument("--out", default=None, help="output path ('-' for stdout)")
    parser.add_argument("--tol", type=float, default=1e-6,
                        help="tolerance for parameter fits")


def _add_pipeline_args(parser: argparse.ArgumentParser) -> None:
    src = parser.add_mutually_exclusive_group(required=True)
    src.add_argument("--map", help="map file (source/target spaces + forward table)")
    src.add_argument("--space", help="space file; target is its snowflake by --eps")
    parser.add_argument("--eps", type=float, default=0.5,
                        help="snowflake exponent when --space is given")
    parser.add_argument("--theta", type=float, default=None)
    parser.add_argument("--alpha-z", dest="alpha_z", type=float, default=2.0)
    parser.add_argument("--alpha-w", dest="alpha_w", type=float, default=2.0)
    parser.add_argument("--tau-z", dest="tau_z", type=float, default=4.0)
    parser.add_argument("--tau-w", dest="tau_w", type=float, default=4.0)
    parser.add_argument("--margin", type=int, default=3, help="depth margin")
    parser.add_argument("--samples", type=int, default=20000)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hypfill",
        description="hyperbolic fillings and the quasi-symmetry correspondence",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a corpus space file")
    p.add_argument("--kind", choices=spaces.SPACE_KINDS, required=True)
    p.add_argument("--n", type=int, required=True)
    _add_common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("snowflake", help="snowflake a space file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--eps", type=float, required=True)
    _add_common(p)
    p.set_defaults(func=cmd_snowflake)

    p = sub.add_parser("fill", help="build a hyperbolic filling")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--n-min", dest="n_min", type=int, default=None)
    p.add_argument("--n-max", dest="n_max", type=int, default=None)
    p.add_argument("--margin", type=int, default=3)
    p.add_argument("--dot", default=None, help="also write a DOT dump here")
    _add_common(p)
    p.set_defaults(func=cmd_fill)

    p = sub.add_parser("delta", help="four-point hyperbolicity of a filling file")
    p.add_argument("--filling", required=True)
    p.add_argument("--mode", choices=("exhaustive", "sampled"), default="exhaustive")
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--space", default=None,
                   help="base space file; adds Busemann and visual fits")
    _add_common(p)
    p.set_defaults(func=cmd_delta)

    p = sub.add_parser("extend", help="extend a boundary map to the fillings")
    _add_pipeline_args(p)
    _add_common(p)
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("analyze", help="envelope and strong four-point fits")
    _add_pipeline_args(p)
    _add_common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("boundary", help="extract the boundary map of an extension")
    _add_pipeline_args(p)
    _add_common(p)
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("roundtrip", help="full extension + recovery report")
    _add_pipeline_args(p)
    _add_common(p)
    p.set_defaults(func=cmd_roundtrip)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "jobs", None) is None:
        args.jobs = _default_jobs()
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (FileFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
