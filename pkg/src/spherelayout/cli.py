"""Command-line driver: ``python -m spherelayout {layout,report,mesh}``."""

from __future__ import annotations

import argparse
import logging
import sys
import warnings

import numpy as np

from .errors import SphereLayoutError
from .io import MESH_FORMATS, dumps_layout, ingest_tree, mesh_text, report_comparison
from .lloyd import LloydConfig, run_wscvt
from .tree import ALGORITHMS, TreeLayoutConfig, layout_tree
from .trisphere import build_icosphere


def _counts(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _solver_flags(p):
    p.add_argument("--epsilon", type=float, default=5e-4, help="size error threshold (default 5e-4)")
    p.add_argument("--delta", type=float, default=1e-6, help="weight floor (default 1e-6)")
    p.add_argument("--max-iters", type=int, default=10000, help="iteration cap (default 10000)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--error-mode", choices=("max", "avg"), default="max", help="size error norm (default max)")


def _lloyd_config(args):
    return LloydConfig(
        epsilon=args.epsilon,
        delta=args.delta,
        max_iterations=args.max_iters,
        seed=args.seed,
        error_mode=args.error_mode,
    )


def build_parser():
    parser = argparse.ArgumentParser(prog="spherelayout", description="Spherical tree layouts and tessellations.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("layout", help="lay out a tree and write the layout document")
    p.add_argument("--algorithm", choices=ALGORITHMS, default="wscvt")
    p.add_argument("--input", required=True, help="tree JSON file or directory")
    p.add_argument("--max-depth", type=int, default=None, help="depth cap for directory input")
    p.add_argument("--radius-scale", type=float, default=1.0, help="sphere spacing (default 1)")
    p.add_argument("--out", default="-", help="output path, '-' for stdout (default)")
    _solver_flags(p)

    p = sub.add_parser("report", help="TriSphere vs WSCVT comparison table")
    p.add_argument("--counts", type=_counts, default=[20, 50, 1000, 1500], help="node counts (default 20,50,1000,1500)")
    p.add_argument("--skip-wscvt", action="store_true", help="only the analytic TriSphere columns")
    p.add_argument("--out", default="-")
    _solver_flags(p)

    p = sub.add_parser("mesh", help="export a tessellation or icosphere as OBJ")
    p.add_argument("--format", choices=MESH_FORMATS, default="cell-mesh")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--icosphere", type=int, metavar="LEVEL", help="subdivided icosahedron")
    src.add_argument("--count", type=int, metavar="N", help="WSCVT with N equal weights")
    src.add_argument("--weights", type=_floats, help="WSCVT with these weights")
    src.add_argument("--input", help="first-level cells of a tree layout (JSON file or directory)")
    p.add_argument("--out", default="-")
    _solver_flags(p)
    return parser


def _emit(text, out):
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _run(args):
    if args.command == "layout":
        tree = ingest_tree(args.input, args.max_depth)
        config = TreeLayoutConfig(lloyd=_lloyd_config(args), radius_scale=args.radius_scale)
        layout = layout_tree(tree, args.algorithm, config)
        labels = {n.id: n.label for n in tree.walk()}
        _emit(dumps_layout(layout, labels), args.out)
    elif args.command == "report":
        text = report_comparison(args.counts, not args.skip_wscvt, _lloyd_config(args))
        _emit(text, args.out)
    elif args.command == "mesh":
        if args.icosphere is not None:
            obj = build_icosphere(args.icosphere)
        elif args.input is not None:
            tree = ingest_tree(args.input)
            layout = layout_tree(tree, "wscvt", TreeLayoutConfig(lloyd=_lloyd_config(args)))
            obj = [n.region for n in layout.level_of(1)]
            if any(r is None for r in obj):
                raise ValueError("the root has a single child, so there are no cells to export")
        else:
            w = np.ones(args.count) if args.count is not None else np.array(args.weights)
            # a diverging run overflows before it gives up; the error says so
            with np.errstate(over="ignore", invalid="ignore"):
                _, obj, _ = run_wscvt(w, _lloyd_config(args))
        _emit(mesh_text(obj, args.format), args.out)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    with warnings.catch_warnings():
        warnings.simplefilter("default")
        warnings.showwarning = _warning_to_stderr
        try:
            _run(args)
        except (SphereLayoutError, ValueError, OSError) as exc:
            print(f"spherelayout: error: {type(exc).__name__}: {exc}", file=sys.stderr)
            return 1
    return 0


def _warning_to_stderr(message, category, filename, lineno, file=None, line=None):
    print(f"spherelayout: warning: {message}", file=sys.stderr)
