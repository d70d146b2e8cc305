"""Command-line interface.

Subcommands: ``bound closed-form``, ``bound ba``, ``achieve fixed``,
``achieve huffman``, ``achieve block``, ``count detection``, ``compare``,
``plot``.  Exit codes: 0 on success, 2 on input validation errors, 3 when a
bound computation stopped before reaching its convergence tolerance.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from fractions import Fraction

from . import blahut_arimoto as ba
from . import coding, detection, harness
from .dms import Pmf, RaCurve, closed_form_curve

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NONCONVERGED = 3


def _add_out_flags(p: argparse.ArgumentParser, default_format: str = "csv") -> None:
    p.add_argument("--out", metavar="FILE", help="output file (default: stdout)")
    p.add_argument(
        "--format",
        choices=("csv", "svg"),
        default=default_format,
        help=f"output format (default: {default_format})",
    )
    p.add_argument(
        "--log-x", action="store_true", help="logarithmic rate axis (SVG only)"
    )


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="rabounds",
        description="Rate-accuracy bounds, achievable codes, and gap analysis "
        "for discrete analysis tasks.",
    )
    sub = top.add_subparsers(dest="command", required=True)

    bound = sub.add_parser("bound", help="compute a rate-accuracy bound curve")
    bound_sub = bound.add_subparsers(dest="bound_kind", required=True)

    cf = bound_sub.add_parser("closed-form", help="equiprobable-label closed form")
    cf.add_argument("--classes", type=int, required=True, metavar="K")
    cf.add_argument("--grid", type=int, default=1001, metavar="N", help="grid points")
    _add_out_flags(cf)

    bab = bound_sub.add_parser("ba", help="alternating-minimization bound")
    bab.add_argument("--pmf", metavar="FILE", help="label histogram file")
    bab.add_argument(
        "--classes", type=int, metavar="K", help="uniform source when no --pmf"
    )
    bab.add_argument(
        "--slopes", type=int, default=62, metavar="N", help="interior slope count"
    )
    _add_out_flags(bab)

    ach = sub.add_parser("achieve", help="rates of concrete coding schemes")
    ach_sub = ach.add_subparsers(dest="scheme", required=True)

    fx = ach_sub.add_parser("fixed", help="fixed-length decision code")
    fx.add_argument("--classes", type=int, required=True, metavar="K")
    fx.add_argument("--accuracy", type=float, required=True, metavar="A")

    hf = ach_sub.add_parser("huffman", help="optimal prefix decision code")
    hf.add_argument("--pmf", metavar="FILE")
    hf.add_argument("--classes", type=int, metavar="K")
    hf.add_argument("--accuracy", type=float, required=True, metavar="A")

    bl = ach_sub.add_parser("block", help="fixed-length code over decision blocks")
    bl.add_argument("--classes", type=int, required=True, metavar="K")
    bl.add_argument("--block-n", type=int, required=True, metavar="N")
    bl.add_argument("--accuracy", type=float, required=True, metavar="A")

    cnt = sub.add_parser("count", help="configuration counting")
    cnt_sub = cnt.add_subparsers(dest="what", required=True)
    det = cnt_sub.add_parser("detection", help="detection output configurations")
    det.add_argument("--positions", type=int, required=True, metavar="P")
    det.add_argument("--obj-classes", type=int, required=True, metavar="M")
    det.add_argument("--max-objects", type=int, required=True, metavar="N")
    det.add_argument("--width", type=int, metavar="W")
    det.add_argument("--height", type=int, metavar="H")

    cmp_ = sub.add_parser("compare", help="gap factors of published points vs a bound")
    cmp_.add_argument("--sota", required=True, metavar="FILE")
    cmp_.add_argument(
        "--bound", choices=("closed-form", "ba"), default="closed-form"
    )
    cmp_.add_argument("--classes", type=int, metavar="K")
    cmp_.add_argument("--pmf", metavar="FILE")
    cmp_.add_argument("--grid", type=int, default=1001, metavar="N")
    cmp_.add_argument("--slopes", type=int, default=62, metavar="N")
    cmp_.add_argument("--out", metavar="FILE")
    cmp_.add_argument("--format", choices=("csv",), default="csv")

    plot = sub.add_parser("plot", help="SVG chart of a bound and published points")
    plot.add_argument(
        "--bound", choices=("closed-form", "ba"), default="closed-form"
    )
    plot.add_argument("--classes", type=int, metavar="K")
    plot.add_argument("--pmf", metavar="FILE")
    plot.add_argument("--grid", type=int, default=1001, metavar="N")
    plot.add_argument("--slopes", type=int, default=62, metavar="N")
    plot.add_argument(
        "--sota", action="append", default=[], metavar="FILE", help="repeatable"
    )
    plot.add_argument("--out", default="plot.svg", metavar="FILE")
    plot.add_argument("--log-x", action="store_true")
    plot.add_argument("--title", default=None)

    return top


def _source_from(args) -> Pmf:
    if getattr(args, "pmf", None):
        return harness.load_pmf(args.pmf)
    if getattr(args, "classes", None):
        return Pmf.uniform(args.classes)
    raise ValueError("provide --pmf FILE or --classes K")


def _bound_curve(args, caught: list) -> RaCurve:
    if args.bound == "closed-form":
        if not getattr(args, "classes", None):
            raise ValueError("--bound closed-form requires --classes")
        return closed_form_curve(args.classes, args.grid)
    source = _source_from(args)
    spec = ba.hamming_matrix(len(source))
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always", ba.BaConvergenceWarning)
        curve = ba.ba_curve(source, spec, num_points=args.slopes + 2)
    caught.extend(w for w in rec if issubclass(w.category, ba.BaConvergenceWarning))
    return curve


def _emit_or_print(curve: RaCurve, args) -> None:
    if args.out:
        harness.emit_curve(
            curve, args.out, args.format, log_x=getattr(args, "log_x", False)
        )
        print(f"wrote {args.out}")
    else:
        if args.format == "svg":
            raise ValueError("--format svg requires --out FILE")
        sys.stdout.write(harness._curve_csv(curve))


def _cmd_bound(args) -> int:
    caught: list = []
    if args.bound_kind == "closed-form":
        curve = closed_form_curve(args.classes, args.grid)
    else:
        source = _source_from(args)
        spec = ba.hamming_matrix(len(source))
        with warnings.catch_warnings(record=True) as rec:
            warnings.simplefilter("always", ba.BaConvergenceWarning)
            curve = ba.ba_curve(source, spec, num_points=args.slopes + 2)
        caught = [w for w in rec if issubclass(w.category, ba.BaConvergenceWarning)]
    _emit_or_print(curve, args)
    if caught:
        print(f"warning: {caught[0].message}", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def _cmd_achieve(args) -> int:
    if args.scheme == "fixed":
        rate = coding.fixed_length_rate(args.classes)
        point = coding.classify_then_code_point(
            args.accuracy, rate, method_tag="fixed"
        )
        print(f"scheme: fixed-length over {args.classes} classes")
        print(f"rate_bits_per_image: {rate}")
    elif args.scheme == "huffman":
        source = _source_from(args)
        book = coding.huffman_code(source)
        point = coding.classify_then_code_point(
            args.accuracy, book.avg_length, method_tag="huffman"
        )
        print(f"scheme: optimal prefix code over {len(source)} classes")
        print(f"rate_bits_per_image: {book.avg_length:.6g}")
        print("codebook:")
        sys.stdout.write(book.to_text())
    else:
        rate = coding.block_fixed_rate(args.classes, args.block_n)
        point = coding.classify_then_code_point(
            args.accuracy, rate, method_tag="block-fixed", block_size=args.block_n
        )
        print(
            f"scheme: fixed-length over blocks of {args.block_n} "
            f"({args.classes} classes)"
        )
        print(f"rate_bits_per_image: {rate} = {float(rate):.6g}")
    print(f"operating point: rate={point.rate:.6g} bits/image, "
          f"accuracy={point.accuracy:.6g}")
    return EXIT_OK


def _cmd_count(args) -> int:
    model = detection.DetectionModel(args.positions, args.obj_classes, args.max_objects)
    count = detection.detection_config_count(model)
    bits = detection.log2_of_count(count)
    print(f"configurations: {count}")
    print(f"configurations (2 significant digits): {detection.sci_notation(count)}")
    print(f"bits per image (exact log2 of count): {bits:.7f}")
    if args.width and args.height:
        bpp = detection.bits_per_pixel(bits, args.width, args.height)
        rounded_budget = round(bits / 10) * 10
        bpp_rounded = detection.bits_per_pixel(rounded_budget, args.width, args.height)
        print(
            f"bits per pixel at {args.width}x{args.height}: {bpp:.4e} "
            f"(exact); {bpp_rounded:.4e} at a rounded {rounded_budget}-bit budget"
        )
    return EXIT_OK


def _cmd_compare(args) -> int:
    series = harness.load_sota(args.sota)
    caught: list = []
    curve = _bound_curve(args, caught)
    if series.metric == "map":
        base = harness.to_bits_per_image(series)
        zero_error_rate = curve.points[0].rate
        print(
            f"series {base.method} ({base.dataset}) reports mAP, which does "
            "not convert to classification accuracy; gap factors are undefined."
        )
        print(
            f"rate-only comparison against the zero-error rate "
            f"({zero_error_rate:.4f} bits/image):"
        )
        for rate, acc in base.points:
            print(
                f"  mAP {acc:.3f} at {rate:.6g} bits/image = "
                f"{rate / zero_error_rate:.3g}x the zero-error rate"
            )
    else:
        report = harness.gap_report(curve, series)
        print(f"gap report: {report.method} ({report.dataset})")
        print(f"  {harness.GAP_CSV_HEADER}")
        for e in report.entries:
            flag = f"  [{e.note}]" if e.note else ""
            print(
                f"  {e.accuracy:.6g},{e.sota_rate_bits:.6g},"
                f"{e.bound_rate_bits:.6g},{e.gap_factor:.6g}{flag}"
            )
        print(
            f"summary: min {report.min_factor:.4g}, max {report.max_factor:.4g}, "
            f"geometric mean {report.geomean_factor:.4g}"
        )
        if args.out:
            harness.emit_curve(report, args.out, "csv")
            print(f"wrote {args.out}")
    if caught:
        print(f"warning: {caught[0].message}", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def _cmd_plot(args) -> int:
    caught: list = []
    curve = _bound_curve(args, caught)
    series = tuple(harness.load_sota(f) for f in args.sota)
    harness.emit_curve(
        curve, args.out, "svg", series=series, log_x=args.log_x, title=args.title
    )
    print(f"wrote {args.out}")
    if caught:
        print(f"warning: {caught[0].message}", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "bound":
            return _cmd_bound(args)
        if args.command == "achieve":
            return _cmd_achieve(args)
        if args.command == "count":
            return _cmd_count(args)
        if args.command == "compare":
            return _cmd_compare(args)
        if args.command == "plot":
            return _cmd_plot(args)
        raise ValueError(f"unknown command {args.command!r}")
    except (ValueError, OSError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
