"""Command-line entry point: ``isumap [--config FILE] [flags]``.

Exit codes: 0 success, 2 invalid configuration, 3 stage failure.
"""

from __future__ import annotations

import argparse
import sys

from ._errors import IsumapError
from .pipeline import PipelineConfig, StageError, load_config, run_pipeline

EXIT_OK, EXIT_CONFIG, EXIT_STAGE = 0, 2, 3

# flag -> (config field, type, choices)
FLAGS = {
    "--input": ("input", str, None),
    "--generate": ("generate", str, ["hemisphere", "torus", "swisshole", "blobs"]),
    "--n": ("n", int, None),
    "--k": ("k", int, None),
    "--tconorm": ("tconorm", str, ["max", "probsum", "bsum"]),
    "--rho": ("rho", str, ["zero", "nn"]),
    "--sigma": ("sigma", str, ["one", "knn", "smooth"]),
    "--fill": ("fill", str, ["none", "sum", "sum-sqrt2", "ambient"]),
    "--mode": ("mode", str, ["um", "epmet"]),
    "--dim": ("dim", int, None),
    "--mds": ("mds", str, ["cmds", "cmds+sgd"]),
    "--epochs": ("epochs", int, None),
    "--clusters": ("clusters", int, None),
    "--linkage": ("linkage", str, ["single", "average", "complete"]),
    "--labels": ("labels", str, None),
    "--alpha": ("alpha", float, None),
    "--beta": ("beta", float, None),
    "--iters": ("iters", int, None),
    "--lr": ("lr", float, None),
    "--sample-fraction": ("sample_fraction", float, None),
    "--seed": ("seed", int, None),
    "--out": ("out", str, None),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="isumap", description="Manifold embedding pipeline.")
    p.add_argument("--config", help="key = value config file or a run manifest.json")
    for flag, (dest, typ, choices) in FLAGS.items():
        p.add_argument(flag, dest=dest, type=typ, choices=choices, default=None)
    p.add_argument("--rotation", dest="rotation", action="store_true", default=None,
                   help="also optimize per-cluster rotations")
    p.add_argument("--quiet", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else PipelineConfig()
        for dest, _, _ in FLAGS.values():
            val = getattr(args, dest)
            if val is not None:
                setattr(cfg, dest, val)
        if args.rotation:
            cfg.rotation = True
        if args.input is not None and args.generate is None:
            cfg.generate = None
        if args.generate is not None and args.input is None:
            cfg.input = None
        cfg.validate()
    except (IsumapError, OSError, ValueError) as exc:
        print(f"isumap: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    progress = None if args.quiet else (lambda stage: print(f"[isumap] {stage}", file=sys.stderr))
    try:
        run_pipeline(cfg, progress=progress)
    except StageError as exc:
        print(f"isumap: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except IsumapError as exc:
        print(f"isumap: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not args.quiet:
        print(f"[isumap] wrote {cfg.out}", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
