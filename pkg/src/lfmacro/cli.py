"""Command-line entry point: ``lfmacro <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data error (the module's error
message is printed verbatim on stderr).
"""

from __future__ import annotations

import argparse
import logging
import re
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .core import CenterPolicy, noise_texture, ramp_texture, required_texture_shape, synth_planar
from .costmodel import load_layers, pipeline_cost
from .dataset import (
    CATEGORIES,
    DatasetManifest,
    LayoutSpec,
    ReprSpec,
    export_representation,
    scan_corpus,
    split_by_variation,
)
from .disparity import block_match_disparity
from .errors import LightFieldError
from .io import read_lightfield_with_policy, write_json, write_lightfield, write_png
from .representations import build_macropixel, extract_epi, extract_view

log = logging.getLogger("lfmacro")


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # let "-3,3" through as a value for the comma-separated integer options
        self._negative_number_matcher = re.compile(r"^-\d+(,-?\d+)*$|^-\d*\.\d+$")

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _ints(text: str, n: int | None = None) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if n is not None and len(values) != n:
        raise argparse.ArgumentTypeError(f"expected {n} comma-separated integers, got {text!r}")
    return values


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _pair(text):
    return _ints(text, 2)


def _triple(text):
    return _ints(text, 3)


def _quad(text):
    return _ints(text, 4)


def _policy(center, fallback: CenterPolicy) -> CenterPolicy:
    return fallback if center is None else CenterPolicy(*center)


# -- subcommands ----------------------------------------------------------------

def cmd_view(args):
    lf, policy = read_lightfield_with_policy(args.input)
    idx = args.view if args.view is not None else policy.resolve(*lf.angular_shape)
    write_png(args.output, extract_view(lf, idx))


def cmd_macropixel(args):
    lf, policy = read_lightfield_with_policy(args.input)
    image = build_macropixel(lf, args.k, _policy(args.center, policy), args.size_policy)
    write_png(args.output, image.pixels)
    if args.metadata:
        write_json(args.metadata, image.metadata())


def cmd_epi(args):
    lf, _ = read_lightfield_with_policy(args.input)
    epi = extract_epi(lf, args.orientation, args.fixed_spatial, args.fixed_angular)
    write_png(args.output, epi.values)


def cmd_lenslet(args):
    lf, policy = read_lightfield_with_policy(args.input)
    write_lightfield(lf, args.output, form="lenslet", policy=policy)


def cmd_delenslet(args):
    lf, policy = read_lightfield_with_policy(args.input)
    write_lightfield(lf, args.output, form="views", policy=policy)


def cmd_disparity(args):
    lf, policy = read_lightfield_with_policy(args.input)
    reference = args.reference if args.reference is not None else policy.resolve(*lf.angular_shape)
    d_min, d_max = args.range
    dmap = block_match_disparity(lf, reference, args.target, (d_min, d_max), args.radius)
    # affine code: disparity = offset + scale * pixel
    codes = (dmap.values - d_min).astype(np.uint16)
    write_png(args.output, codes)
    sidecar = {"offset": d_min, "scale": 1, **dmap.params()}
    write_json(Path(args.output).with_suffix(".json"), sidecar)
    if args.confidence:
        write_png(args.confidence, np.round(dmap.confidence * 65535).astype(np.uint16))


def cmd_cost(args):
    report = pipeline_cost(args.input, load_layers(args.layers))
    text = report.to_json()
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_synth(args):
    U, V, H, W = args.dims
    d = args.disparity
    dtype = np.uint8 if args.bit_depth == 8 else np.uint16
    shape = required_texture_shape(U, V, H, W, d)
    if args.texture == "noise":
        texture = noise_texture(shape, rng=args.seed, dtype=dtype)
    else:
        texture = ramp_texture(shape, dtype=dtype)
    lf = synth_planar(U, V, H, W, texture, d)
    write_lightfield(lf, args.output, form=args.form)


def cmd_dataset_scan(args):
    layout = LayoutSpec(pattern=args.pattern) if args.pattern else LayoutSpec()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        manifest = scan_corpus(args.root, layout)
    for w in caught:
        log.warning("%s", w.message)
    for rel in manifest.skipped:
        log.warning("skipped %s", rel)
    manifest.save(args.output)


def cmd_dataset_split(args):
    manifest = DatasetManifest.load(args.manifest)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        manifest = split_by_variation(manifest, args.held_out)
    for w in caught:
        log.warning("%s", w.message)
    manifest.save(args.output)


def cmd_dataset_export(args):
    manifest = DatasetManifest.load(args.manifest)
    spec = ReprSpec(kind=args.kind, k=args.k, size_policy=args.size_policy,
                    center=args.center, orientation=args.orientation,
                    fixed_spatial=args.fixed_spatial, fixed_angular=args.fixed_angular)
    report = export_representation(manifest, spec, args.out_dir, root=args.root, jobs=args.jobs)
    for name in report.outputs:
        log.info("wrote %s", name)
    for failure in report.failed:
        log.warning("failed %s: %s", failure["path"], failure["reason"])


# -- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lfmacro", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--verbose", action="store_true", help="log one line per record")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("view", help="extract one sub-aperture view as PNG")
    p.add_argument("input", help="light-field directory")
    p.add_argument("output", help="output PNG")
    p.add_argument("--view", type=_pair, metavar="U,V", help="view index (default: middle view)")
    p.set_defaults(func=cmd_view)

    p = sub.add_parser("macropixel", help="build a macro-pixel image")
    p.add_argument("input", help="light-field directory")
    p.add_argument("output", help="output PNG")
    p.add_argument("--k", type=int, required=True, help="views per macro-pixel side")
    p.add_argument("--size-policy", choices=("crop", "pad"), default="crop",
                   help="crop the remainder or keep the full size (default: crop)")
    p.add_argument("--center", type=_pair, metavar="R,C", help="middle perspective override")
    p.add_argument("--metadata", metavar="FILE.json", help="also write construction metadata")
    p.set_defaults(func=cmd_macropixel)

    p = sub.add_parser("epi", help="extract an epipolar-plane image")
    p.add_argument("input", help="light-field directory")
    p.add_argument("output", help="output PNG")
    p.add_argument("--orientation", choices=("h", "v"), required=True,
                   help="h: fix (u, x); v: fix (v, y)")
    p.add_argument("--fixed-spatial", type=int, required=True,
                   help="spatial row (h) or column (v) held constant")
    p.add_argument("--fixed-angular", type=int, required=True,
                   help="angular row (h) or column (v) held constant")
    p.set_defaults(func=cmd_epi)

    p = sub.add_parser("lenslet", help="convert a light field to lenslet form")
    p.add_argument("input", help="light-field directory")
    p.add_argument("output", help="output directory (lenslet.png + meta.json)")
    p.set_defaults(func=cmd_lenslet)

    p = sub.add_parser("delenslet", help="convert a light field to view-directory form")
    p.add_argument("input", help="light-field directory (lenslet or views)")
    p.add_argument("output", help="output directory (view_UU_VV.png + meta.json)")
    p.set_defaults(func=cmd_delenslet)

    p = sub.add_parser("disparity", help="block-matching disparity between two views")
    p.add_argument("input", help="light-field directory")
    p.add_argument("output", help="16-bit PNG; an affine-coding sidecar .json is written next to it")
    p.add_argument("--target", type=_pair, required=True, metavar="U,V", help="target view")
    p.add_argument("--reference", type=_pair, metavar="U,V",
                   help="reference view (default: middle view)")
    p.add_argument("--range", type=_pair, required=True, metavar="MIN,MAX",
                   help="integer disparity search range")
    p.add_argument("--radius", type=int, default=2, help="block radius (default: 2)")
    p.add_argument("--confidence", metavar="FILE.png", help="also write confidence as 16-bit PNG")
    p.set_defaults(func=cmd_disparity)

    p = sub.add_parser("cost", help="convolution cost report as JSON")
    p.add_argument("--layers", required=True, metavar="FILE.json", help="layer stack")
    p.add_argument("--input", type=_triple, required=True, metavar="H,W,C", help="input dimensions")
    p.add_argument("--output", metavar="FILE.json", help="write here instead of stdout")
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("synth", help="synthesise a constant-disparity light field")
    p.add_argument("output", help="output light-field directory")
    p.add_argument("--disparity", type=int, required=True, help="pixels per view step")
    p.add_argument("--texture", choices=("noise", "ramp"), required=True)
    p.add_argument("--dims", type=_quad, required=True, metavar="U,V,H,W")
    p.add_argument("--seed", type=int, default=0, help="noise seed (default: 0)")
    p.add_argument("--bit-depth", type=int, choices=(8, 16), default=16)
    p.add_argument("--form", choices=("views", "lenslet"), default="views")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("dataset", help="corpus scan, split and export")
    dsub = p.add_subparsers(dest="dataset_command", metavar="ACTION", parser_class=_Parser)
    dsub.required = True

    q = dsub.add_parser("scan", help="scan a corpus into a manifest")
    q.add_argument("root", help="corpus root directory")
    q.add_argument("--output", required=True, metavar="MANIFEST.csv",
                   help="manifest CSV; a JSON twin is written alongside")
    q.add_argument("--pattern", help="regex with subject/session/variation[/sublabel] groups")
    q.set_defaults(func=cmd_dataset_scan)

    q = dsub.add_parser("split", help="hold out one variation category as test")
    q.add_argument("manifest", help="input manifest (.csv or .json)")
    q.add_argument("--held-out", required=True, choices=CATEGORIES)
    q.add_argument("--output", required=True, metavar="MANIFEST.csv")
    q.set_defaults(func=cmd_dataset_split)

    q = dsub.add_parser("export", help="render every record to a PNG")
    q.add_argument("manifest", help="input manifest (.csv or .json)")
    q.add_argument("--root", required=True, help="corpus root the manifest paths are relative to")
    q.add_argument("--out-dir", required=True, help="output directory")
    q.add_argument("--kind", choices=("center", "macropixel", "lenslet", "epi"), default="macropixel")
    q.add_argument("--k", type=int, default=1, help="macro-pixel size (default: 1)")
    q.add_argument("--size-policy", choices=("crop", "pad"), default="crop")
    q.add_argument("--center", type=_pair, metavar="R,C")
    q.add_argument("--orientation", choices=("h", "v"), default="h", help="EPI orientation")
    q.add_argument("--fixed-spatial", type=int, help="EPI spatial index (default: middle)")
    q.add_argument("--fixed-angular", type=int, help="EPI angular index (default: middle view)")
    q.add_argument("--jobs", type=_positive_int, default=1, help="parallel workers (default: 1)")
    q.set_defaults(func=cmd_dataset_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        args.func(args)
    except (LightFieldError, OSError) as exc:
        print(f"lfmacro: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
