"""Command-line front end: ``nvlab <subcommand> --scene SRC ...``.

Exit codes: 0 success, 2 input or parse error, 3 a verification failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path
from typing import Sequence

from .catalog import builtin_names, builtin_scene
from .errors import ConsistencyError, InputError, NVLabError
from .general_position import check_general_position
from .render import render_svg
from .sceneio import fmt, read_scene
from .scenes import Scene
from .stability import classify_stability, stability_sweep, trace_to_csv
from .topology import boundary_bisector_check, fat_bisector_detect, grid_classify
from .voronoi import DEFAULT_TOL, compute_cell, compute_diagram, estimate_lambda, extract_bisector

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_VERIFY = 3


def load_source(src: str) -> Scene:
    if src.startswith("builtin:"):
        return builtin_scene(src[len("builtin:"):])
    try:
        return read_scene(src)
    except OSError as exc:
        raise InputError(f"cannot read scene file {src!r}: {exc.strerror}") from None


def _emit(args, text: str) -> None:
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            raise InputError(f"cannot write {args.out!r}: {exc.strerror}") from None


def _sites(scene: Scene, arg: str | None) -> list[int]:
    if arg is None:
        return list(range(scene.n_sites))
    try:
        ks = [int(tok) - 1 for tok in arg.split(",") if tok.strip()]
    except ValueError:
        raise InputError(f"bad site list {arg!r}") from None
    for k in ks:
        scene._check_index(k)
    return ks


def _site(scene: Scene, arg: int) -> int:
    k = arg - 1
    scene._check_index(k)
    return k


def _floats(arg: str) -> list[float]:
    try:
        return [float(tok) for tok in arg.split(",") if tok.strip()]
    except ValueError:
        raise InputError(f"bad number list {arg!r}") from None


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# -- subcommands ------------------------------------------------------------------


def cmd_check_gp(args) -> int:
    scene = load_source(args.scene)
    report = check_general_position(scene)
    lines = [f"holds={'true' if report.holds else 'false'} margin={fmt(report.margin)}"]
    for v in report.violations:
        lines.append(
            f"violation {v.j + 1} {v.k + 1} ({fmt(v.p[0])},{fmt(v.p[1])}) "
            f"({fmt(v.q[0])},{fmt(v.q[1])}) dir({fmt(v.direction[0])},{fmt(v.direction[1])})"
        )
    _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK if report.holds else EXIT_VERIFY


def cmd_cells(args) -> int:
    scene = load_source(args.scene)
    if args.site is None:
        cells = compute_diagram(scene, args.n_dirs, args.tol, check_coverage=not args.no_coverage).cells
    else:
        cells = [compute_cell(scene, _site(scene, args.site), args.n_dirs, args.tol)]
    rows = []
    for c in cells:
        for px, py, tx, ty, T in c.rows():
            rows.append([c.site_index + 1, fmt(px), fmt(py), fmt(tx), fmt(ty), fmt(T)])
    _emit(args, _csv(rows, ["k", "px", "py", "theta_x", "theta_y", "T"]))
    return EXIT_OK


def cmd_bisector(args) -> int:
    scene = load_source(args.scene)
    rows = []
    for k in _sites(scene, args.sites):
        sample = extract_bisector(scene, k, args.resolution)
        rows.extend([k + 1, fmt(x), fmt(y)] for x, y in sample.points)
    _emit(args, _csv(rows, ["k", "x", "y"]))
    return EXIT_OK


def cmd_lambda(args) -> int:
    scene = load_source(args.scene)
    lines = []
    for k in _sites(scene, args.sites):
        est = estimate_lambda(scene, k, args.epsilon, args.samples, args.seed)
        lines.append(
            f"site={k + 1} epsilon={fmt(est.epsilon)} lambda_tilde={fmt(est.lambda_tilde)} "
            f"lambda={fmt(est.lam)} samples={est.sample_count} "
            f"witness=({fmt(est.witness_x[0])}, {fmt(est.witness_x[1])})"
        )
    _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_sweep(args) -> int:
    scene = load_source(args.scene)
    deltas = _floats(args.deltas)
    if not deltas:
        raise InputError("--deltas is empty")
    sites = None if args.sites is None else _sites(scene, args.sites)
    mode = "shift" if args.mode == "paper" else args.mode
    if mode == "shift" and sites is None and scene.centers:
        sites = list(scene.centers)
    trace = stability_sweep(
        scene, deltas, args.trials, args.seed, mode, args.n_dirs, args.density,
        sites=sites, epsilon=args.epsilon,
    )
    _emit(args, trace_to_csv(trace))
    for d, t in trace.skipped:
        print(f"skipped delta={fmt(d)} trial={t}: perturbed sites collided", file=sys.stderr)
    if len(trace.deltas()) >= 3:
        try:
            verdict = classify_stability(trace, args.shrink_factor, args.floor)
        except InputError as exc:
            verdict = f"unclassified ({exc})"
        print(f"verdict={verdict}", file=sys.stderr)
    return EXIT_OK


def cmd_topology(args) -> int:
    scene = load_source(args.scene)
    gp = check_general_position(scene)
    out = []
    failed = False
    for k in _sites(scene, args.sites):
        if gp.holds:
            report = boundary_bisector_check(scene, k, args.resolution, args.tol)
            out.append(report.to_text())
            failed |= not report.passed
        else:
            out.append(boundary_bisector_check(scene, k, args.resolution).to_text())
        fat, witness = fat_bisector_detect(grid_classify(scene, k, args.fat_resolution))
        if fat:
            out.append(f"FAT site={k + 1} resolution={args.fat_resolution} "
                       f"witness=({fmt(witness[0])}, {fmt(witness[1])})\n")
            failed |= gp.holds
        else:
            out.append(f"NOT FAT site={k + 1} resolution={args.fat_resolution}\n")
    _emit(args, "".join(out))
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_render(args) -> int:
    scene = load_source(args.scene)
    diagram = compute_diagram(scene, args.n_dirs, args.tol, check_coverage=not args.no_coverage)
    bis = []
    if args.bisectors:
        bis = [extract_bisector(scene, k, args.resolution) for k in range(scene.n_sites)]
    _emit(args, render_svg(diagram, {"width": args.width}, bis))
    return EXIT_OK


def cmd_scenes(args) -> int:
    sys.stdout.write("\n".join(f"builtin:{n}" for n in builtin_names()) + "\n")
    return EXIT_OK


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nvlab", description="Voronoi diagrams under polygonal norms and their stability."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, out=True, scene=True):
        p = sub.add_parser(name, help=help_)
        if scene:
            p.add_argument("--scene", required=True, help="scene file or builtin:NAME")
        if out:
            p.add_argument("--out", default=None, help="output path (default stdout)")
        p.set_defaults(func=fn)
        return p

    add("check-gp", cmd_check_gp, "check the general-position condition")

    p = add("cells", cmd_cells, "ray-bundle cells as CSV")
    p.add_argument("--n-dirs", type=int, default=512)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--site", type=int, default=None, help="single site number (1-based)")
    p.add_argument("--no-coverage", action="store_true", help="skip the grid coverage check")

    p = add("bisector", cmd_bisector, "bisector samples as CSV")
    p.add_argument("--sites", default=None, help="comma-separated site numbers")
    p.add_argument("--resolution", type=int, default=256)

    p = add("lambda", cmd_lambda, "sampled penetration constant")
    p.add_argument("--sites", default=None)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)

    p = add("sweep", cmd_sweep, "perturbation sweep, trace as CSV")
    p.add_argument("--deltas", required=True, help="comma-separated perturbation sizes")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=["random", "shift", "paper"], default="random",
                   help="'shift' (alias 'paper') moves non-center points toward the nearest center")
    p.add_argument("--n-dirs", type=int, default=512)
    p.add_argument("--density", type=float, default=8)
    p.add_argument("--sites", default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--shrink-factor", type=float, default=2.0)
    p.add_argument("--floor", type=float, default=0.1)

    p = add("topology", cmd_topology, "grid-scale boundary/interior/closure checks")
    p.add_argument("--sites", default=None)
    p.add_argument("--resolution", type=int, default=512)
    p.add_argument("--fat-resolution", type=int, default=1024)
    p.add_argument("--tol", type=float, default=None)

    p = add("render", cmd_render, "SVG drawing of the diagram")
    p.add_argument("--n-dirs", type=int, default=512)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--bisectors", action="store_true")
    p.add_argument("--resolution", type=int, default=256)
    p.add_argument("--width", type=int, default=600)
    p.add_argument("--no-coverage", action="store_true")

    p = add("scenes", cmd_scenes, "builtin scenes", out=False, scene=False)
    p.add_argument("--list", action="store_true", required=True)
    return parser


def run_cli(argv: Sequence[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args)
    except ConsistencyError as exc:
        print(f"nvlab: verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (NVLabError, ValueError) as exc:
        print(f"nvlab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
