"""
Command-line interface.

Subcommands follow the order of the analysis: ``edges`` and ``bench`` for
edge maps, ``axis`` for the symmetry verdict, ``detect`` for the full
tumor report, and ``phantom`` to generate synthetic inputs.

Exit codes: 0 success, 1 I/O or parse failure, 2 invalid parameters,
3 degenerate input (for example no edge rows to fit).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import edge_detect, symmetry
from .edge_detect import CannyParams
from .errors import BrainSymError, DegenerateInput, InvalidParameter, PipelineError, PnmError
from .image_core import GrayImage, read_pnm, write_pgm
from .phantom import Lesion, PhantomSpec, render_phantom, standard_corpus
from .tumor_detect import PipelineConfig, run_pipeline

log = logging.getLogger("brainsym")

EXIT_OK, EXIT_IO, EXIT_PARAMS, EXIT_DEGENERATE = 0, 1, 2, 3
BENCH_SUFFIXES = {".pgm", ".pnm", ".ppm"}


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class RunConfig:
    operator: str = "canny"
    threshold: float = edge_detect.DEFAULT_THRESHOLD
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)

    def __post_init__(self):
        if self.operator not in edge_detect.OPERATORS:
            raise CliError(f"unknown operator {self.operator!r}", EXIT_PARAMS)
        if not 0 < self.threshold <= 1:
            raise CliError(f"--threshold must lie in (0, 1], got {self.threshold}", EXIT_PARAMS)

    @property
    def canny(self) -> CannyParams:
        return self.pipeline.canny

    def edge_map(self, img: GrayImage, operator: str | None = None):
        op = operator or self.operator
        if op == "roberts":
            return edge_detect.roberts(img, self.threshold)
        if op == "prewitt":
            return edge_detect.prewitt(img, self.threshold)
        return edge_detect.canny(img, self.canny)

    def params(self):
        out = self.pipeline.to_dict()
        out["operator"] = self.operator
        out["threshold"] = self.threshold
        return out


def _error_code(exc: BaseException) -> int:
    if isinstance(exc, PipelineError):
        exc = exc.cause
    if isinstance(exc, CliError):
        return exc.code
    if isinstance(exc, (OSError, PnmError)):
        return EXIT_IO
    if isinstance(exc, InvalidParameter):
        return EXIT_PARAMS
    if isinstance(exc, DegenerateInput):
        return EXIT_DEGENERATE
    return EXIT_IO


def config_from_args(args) -> RunConfig:
    try:
        canny = CannyParams(args.sigma, args.low, args.high)
        pipe = PipelineConfig(
            canny=canny,
            degree=getattr(args, "degree", symmetry.DEFAULT_DEGREE),
            tau_rms=getattr(args, "tau_rms", symmetry.DEFAULT_TAU_RMS),
            tau_improve=getattr(args, "tau_improve", symmetry.DEFAULT_TAU_IMPROVE),
            diff_threshold=getattr(args, "diff_threshold", 30),
            min_area=getattr(args, "min_area", 50),
        )
    except InvalidParameter as exc:
        raise CliError(str(exc), EXIT_PARAMS) from exc
    return RunConfig(getattr(args, "operator", "canny"), args.threshold, pipe)


def load_image(path) -> GrayImage:
    return read_pnm(Path(path).read_bytes())


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _write_outputs(outputs):
    """Write every ``(path, bytes)`` pair; called only once all work succeeded."""
    for path, data in outputs:
        if path is not None:
            Path(path).write_bytes(data)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_edges(args, out) -> int:
    cfg = config_from_args(args)
    img = load_image(args.input)
    em = cfg.edge_map(img)
    count = edge_detect.count_edges(em)
    pgm = write_pgm(GrayImage(em.bits.astype("uint8") * 255))
    _write_outputs([(args.out, pgm)])
    if args.json:
        out.write(dump_json({"operator": cfg.operator, "count": count, "params": cfg.params()}))
    else:
        out.write(f"{cfg.operator} {count}\n")
    return EXIT_OK


def axis_record(verdict, cs) -> dict:
    axis = verdict.axis.to_dict()
    axis["improvement_ratio"] = verdict.improvement_ratio
    return {"verdict": verdict.classification.value, "axis": axis, "rows": len(cs)}


def cmd_axis(args, out) -> int:
    cfg = config_from_args(args)
    img = load_image(args.input)
    em = cfg.edge_map(img)
    cs = symmetry.edge_centroids(em)
    if len(cs) == 0:
        raise CliError("no edge rows found; cannot fit a symmetry axis", EXIT_DEGENERATE)
    p = cfg.pipeline
    verdict = symmetry.classify_axis(cs, p.degree, p.tau_rms, p.tau_improve)
    record = axis_record(verdict, cs)
    record["params"] = cfg.params()
    text = dump_json(record)
    _write_outputs([(args.report, text.encode())])
    out.write(text)
    return EXIT_OK


def cmd_detect(args, out) -> int:
    cfg = config_from_args(args)
    img = load_image(args.input)
    result = run_pipeline(img, cfg.pipeline)
    report = result.to_dict(cfg.pipeline.to_dict())
    if args.label:
        report["label"] = args.label
    text = dump_json(report)
    _write_outputs([
        (args.report, text.encode()),
        (args.overlay, result.overlay),
        (args.out, write_pgm(result.asymmetry)),
    ])
    if args.report is None or args.json:
        out.write(text)
    else:
        r = result.report
        out.write(f"{report['verdict']} area={r.total_tumor_area} damage={r.damage_percent:.2f}%\n")
    return EXIT_OK


def bench_row(path: Path, cfg: RunConfig):
    img = load_image(path)
    counts = [edge_detect.count_edges(cfg.edge_map(img, op)) for op in edge_detect.OPERATORS]
    return path.name, counts


def bench_table(directory, cfg: RunConfig, jobs: int = 1):
    """Per-file edge counts sorted by filename; failures are returned separately."""
    files = sorted(p for p in Path(directory).iterdir()
                   if p.is_file() and p.suffix.lower() in BENCH_SUFFIXES)

    def work(path):
        try:
            return bench_row(path, cfg), None
        except (OSError, BrainSymError) as exc:
            return None, (path.name, exc)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, files))
    else:
        results = [work(p) for p in files]
    rows = [r for r, _ in results if r is not None]
    failures = [f for _, f in results if f is not None]
    return rows, failures


def format_csv(rows) -> str:
    lines = ["image," + ",".join(edge_detect.OPERATORS)]
    lines += [name + "," + ",".join(str(c) for c in counts) for name, counts in rows]
    return "\n".join(lines) + "\n"


def cmd_bench(args, out) -> int:
    cfg = config_from_args(args)
    if not Path(args.input).is_dir():
        raise CliError(f"{args.input}: not a directory", EXIT_IO)
    if args.jobs < 1:
        raise CliError("--jobs must be >= 1", EXIT_PARAMS)
    rows, failures = bench_table(args.input, cfg, args.jobs)
    for name, exc in failures:
        print(f"brainsym bench: {name}: {exc}", file=sys.stderr)
    text = format_csv(rows)
    out.write(text)
    if failures:
        return EXIT_IO
    _write_outputs([(args.out, text.encode())])
    return EXIT_OK


def phantom_spec_from_args(args) -> PhantomSpec:
    lesion = None
    if args.lesion is not None:
        cx, cy, r, delta = args.lesion
        lesion = Lesion(cx, cy, r, int(delta))
    cx, cy = args.center if args.center is not None else (None, None)
    return PhantomSpec(
        width=args.size[0], height=args.size[1], cx=cx, cy=cy,
        semi_x=args.semi_axes[0], semi_y=args.semi_axes[1],
        intensity=args.intensity, lesion=lesion, tilt=args.tilt, bow=args.bow,
        noise=args.noise, seed=args.seed,
    )


def cmd_phantom(args, out) -> int:
    if args.corpus is not None:
        images = [(Path(args.corpus) / name, render_phantom(spec))
                  for name, spec in standard_corpus().items()]
        Path(args.corpus).mkdir(parents=True, exist_ok=True)
        _write_outputs([(p, write_pgm(img)) for p, img in images])
        for p, _ in images:
            out.write(f"{p}\n")
        return EXIT_OK
    if args.out is None:
        raise CliError("phantom needs --out or --corpus", EXIT_PARAMS)
    try:
        spec = phantom_spec_from_args(args)
    except InvalidParameter as exc:
        raise CliError(str(exc), EXIT_PARAMS) from exc
    _write_outputs([(args.out, write_pgm(render_phantom(spec)))])
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _edge_flags(p, operator=True):
    if operator:
        p.add_argument("--operator", choices=edge_detect.OPERATORS, default="canny")
    p.add_argument("--threshold", type=float, default=edge_detect.DEFAULT_THRESHOLD,
                   help="roberts/prewitt threshold as a fraction of the peak magnitude")
    p.add_argument("--sigma", type=float, default=1.4, help="Canny Gaussian sigma")
    p.add_argument("--low", type=float, default=0.10, help="Canny low ratio")
    p.add_argument("--high", type=float, default=0.20, help="Canny high ratio")


def _axis_flags(p):
    p.add_argument("--degree", type=int, default=symmetry.DEFAULT_DEGREE)
    p.add_argument("--tau-rms", type=float, default=symmetry.DEFAULT_TAU_RMS)
    p.add_argument("--tau-improve", type=float, default=symmetry.DEFAULT_TAU_IMPROVE)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="brainsym", description="Symmetry-based brain tumor localization on PGM slices.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("edges", help="edge map and edge count")
    p.add_argument("input")
    _edge_flags(p)
    p.add_argument("--out", help="edge map PGM (edges 255)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_edges)

    p = sub.add_parser("axis", help="fit the symmetry axis and classify it")
    p.add_argument("input")
    _edge_flags(p)
    _axis_flags(p)
    p.add_argument("--report", help="also write the JSON record here")
    p.set_defaults(func=cmd_axis)

    p = sub.add_parser("detect", help="full pipeline with region report")
    p.add_argument("input")
    _edge_flags(p, operator=False)
    _axis_flags(p)
    p.add_argument("--diff-threshold", type=int, default=30)
    p.add_argument("--min-area", type=int, default=50)
    p.add_argument("--report", help="JSON report path (default: stdout)")
    p.add_argument("--overlay", help="PPM overlay path")
    p.add_argument("--out", help="asymmetry map PGM path")
    p.add_argument("--label", help="lesion-site label copied into the report")
    p.add_argument("--json", action="store_true", help="print the report even with --report")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("bench", help="edge counts per operator for every image in a directory")
    p.add_argument("input", help="directory of PGM/PPM files")
    _edge_flags(p, operator=False)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="CSV path (default: stdout only)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("phantom", help="render a synthetic slice")
    p.add_argument("--out")
    p.add_argument("--corpus", metavar="DIR", help="write the six-image benchmark corpus")
    p.add_argument("--size", type=int, nargs=2, default=(256, 256), metavar=("W", "H"))
    p.add_argument("--center", type=float, nargs=2, metavar=("CX", "CY"))
    p.add_argument("--semi-axes", type=float, nargs=2, default=(90.0, 110.0), metavar=("A", "B"))
    p.add_argument("--intensity", type=int, default=120)
    p.add_argument("--lesion", type=float, nargs=4, metavar=("CX", "CY", "R", "DELTA"))
    p.add_argument("--tilt", type=float, default=0.0)
    p.add_argument("--bow", type=float, default=0.0)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_phantom)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, out)
    except (CliError, OSError, BrainSymError) as exc:
        code = _error_code(exc)
        print(f"brainsym {args.command}: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
