"""Command line: ``localbin binarize`` and ``localbin bench``.

Exit statuses: 0 success, 1 usage error, 2 I/O error, 3 unsupported
engine/rule combination.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import bench as bench_mod
from .engines import ENGINES, binarize, check_combination
from .image import NetpbmError, read_pgm, write_pbm
from .reference import UnsupportedRuleError
from .rules import RULES, RuleParams
from .sliding import AccumulatorCapacityError, COLUMN_MAJOR, ROW_MAJOR
from .window import WindowSpec

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_UNSUPPORTED = 0, 1, 2, 3

log = logging.getLogger("localbin")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_rule_options(parser: argparse.ArgumentParser) -> None:
    d = RuleParams()
    parser.add_argument("--rule", default="sauvola", choices=sorted(RULES))
    parser.add_argument("-k", type=float, default=d.k, help="rule weight (default %(default)s)")
    parser.add_argument("-R", type=float, default=d.R, help="std-dev dynamic range (default %(default)s)")
    parser.add_argument("-h", "--height", dest="h", type=int, default=32, help="window height")
    parser.add_argument("-w", "--width", dest="w", type=int, default=32, help="window width")
    parser.add_argument("--p", type=float, default=d.p, help="phansalkar p (library default, not from the method's source)")
    parser.add_argument("--q", type=float, default=d.q, help="phansalkar q per gray level (library default)")
    parser.add_argument("--alpha1", type=float, default=d.alpha1, help="feng alpha1 (library default)")
    parser.add_argument("--k1", type=float, default=d.k1, help="feng k1 (library default)")
    parser.add_argument("--k2", type=float, default=d.k2, help="feng k2 (library default)")
    parser.add_argument("--gamma", type=float, default=d.gamma, help="feng gamma (library default)")
    parser.add_argument("--contrast", type=float, default=d.contrast, help="bernsen-contrast minimum range")
    parser.add_argument("--khurshid-effective-n", action="store_true",
                        help="use the clamped pixel count instead of h*w in khurshid's factor")
    parser.add_argument("--adaptive-R", action="store_true",
                        help="replace R by the largest local standard deviation (two passes)")


def _params(args) -> RuleParams:
    return RuleParams(k=args.k, R=args.R, p=args.p, q=args.q, alpha1=args.alpha1, k1=args.k1,
                      k2=args.k2, gamma=args.gamma, contrast=args.contrast,
                      khurshid_effective_n=args.khurshid_effective_n, adaptive_R=args.adaptive_R)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="localbin", description="Local adaptive binarization.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("binarize", add_help=False, help="binarize a PGM into a PBM")
    b.add_argument("--help", action="help")
    b.add_argument("input", type=Path)
    b.add_argument("output", type=Path)
    b.add_argument("--engine", default="sliding", choices=ENGINES)
    b.add_argument("--axis", choices=(ROW_MAJOR, COLUMN_MAJOR), default=None,
                   help="force the sweep axis of the sliding engine")
    _add_rule_options(b)

    t = sub.add_parser("bench", add_help=False, help="time engines, emit CSV")
    t.add_argument("--help", action="help")
    t.add_argument("--sizes", default="1000x1000", help="comma separated HxW list")
    t.add_argument("--windows", default="15,31,63,127", help="comma separated window list (N or HxW)")
    t.add_argument("--engines", default="naive,integral,sliding,otsu")
    t.add_argument("--rules", default="sauvola")
    t.add_argument("--repeats", type=int, default=3)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--input", type=Path, action="append", default=[],
                   help="benchmark this PGM instead of random images (repeatable)")
    t.add_argument("--out", type=Path, default=None, help="CSV path (default stdout)")
    t.add_argument("--summary", action="store_true", help="print speed ratios to stderr")
    t.add_argument("-k", type=float, default=0.5)
    t.add_argument("-R", type=float, default=128.0)
    return parser


def _split(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _run_binarize(args) -> int:
    spec = WindowSpec(args.h, args.w)
    params = _params(args)
    check_combination(args.engine, args.rule)
    try:
        image = read_pgm(args.input.read_bytes())
    except OSError as exc:
        log.error("cannot read %s: %s", args.input, exc)
        return EXIT_IO
    except NetpbmError as exc:
        log.error("%s: %s", args.input, exc)
        return EXIT_IO
    result = binarize(image, args.rule, args.engine, spec, params, axis=args.axis)
    try:
        args.output.write_bytes(write_pbm(result))
    except OSError as exc:
        log.error("cannot write %s: %s", args.output, exc)
        return EXIT_IO
    log.info("wrote %s (%d foreground pixels)", args.output, int(result.foreground.sum()))
    return EXIT_OK


def _run_bench(args) -> int:
    sizes = []
    for token in _split(args.sizes):
        window = WindowSpec.parse(token)
        sizes.append((window.h, window.w))
    windows = [WindowSpec.parse(token) for token in _split(args.windows)]
    images = None
    if args.input:
        try:
            images = [read_pgm(path.read_bytes()) for path in args.input]
        except (OSError, NetpbmError) as exc:
            log.error("cannot load benchmark input: %s", exc)
            return EXIT_IO
    records = bench_mod.run_bench(sizes, windows, _split(args.engines), _split(args.rules),
                                  args.repeats, args.seed, RuleParams(k=args.k, R=args.R),
                                  images=images)
    text = bench_mod.to_csv(records)
    if args.out is None:
        sys.stdout.write(text)
    else:
        try:
            args.out.write_text(text)
        except OSError as exc:
            log.error("cannot write %s: %s", args.out, exc)
            return EXIT_IO
    if args.summary:
        for line in bench_mod.summarize(records):
            print(line, file=sys.stderr)
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(format="%(name)s: %(message)s", level=logging.WARNING)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.verbose:
            log.setLevel(logging.INFO)
        if args.command == "binarize":
            return _run_binarize(args)
        return _run_bench(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        log.error("%s", exc)
        return EXIT_USAGE
    except UnsupportedRuleError as exc:
        log.error("%s", exc)
        return EXIT_UNSUPPORTED
    except (ValueError, AccumulatorCapacityError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE


def binarize_main(argv=None) -> int:
    """``binarize IN OUT [options]`` shorthand for ``localbin binarize``."""
    argv = sys.argv[1:] if argv is None else list(argv)
    return main(["binarize", *argv])


if __name__ == "__main__":
    sys.exit(main())
