"""Data ingestion, unit normalization, gap analysis, and curve emission.

Published operating points arrive in presentation units (bits per pixel,
bits per point); internally everything is normalized to bits per image --
the bound is defined per task instance -- and compared against a bound curve
by horizontal (rate) ratio at matched accuracy.  Curves and reports are
emitted as deterministic CSV or self-contained SVG.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .dms import Pmf, RaCurve, RaPoint

__all__ = [
    "UNITS",
    "SotaSeries",
    "GapEntry",
    "GapReport",
    "UndefinedGapWarning",
    "AccuracyClampWarning",
    "load_pmf",
    "load_sota",
    "to_bits_per_image",
    "convert_series_unit",
    "interpolate_bound_rate",
    "gap_factor",
    "gap_report",
    "emit_curve",
    "read_curve_csv",
    "CURVE_CSV_HEADER",
    "GAP_CSV_HEADER",
]

UNITS = ("bits_per_image", "bits_per_point", "bits_per_pixel")
METRICS = ("accuracy", "map")

CURVE_CSV_HEADER = "rate_bits,distortion,accuracy"
GAP_CSV_HEADER = "accuracy,sota_rate_bits,bound_rate_bits,gap_factor"


class UndefinedGapWarning(UserWarning):
    """Accuracy at or below chance level; no finite gap factor exists."""


class AccuracyClampWarning(UserWarning):
    """Accuracy above the curve maximum; clamped to the curve endpoint."""


@dataclass(frozen=True)
class SotaSeries:
    """Published (rate, accuracy) measurements with unit metadata.

    Attributes:
        dataset: dataset name.
        method: method name.
        unit: one of ``UNITS``.
        points: (rate-in-unit, accuracy) pairs.
        pixels: (width, height), required when ``unit`` is bits_per_pixel.
        points_per_cloud: required when ``unit`` is bits_per_point.
        metric: "accuracy" for classification accuracy, "map" for detection
            mAP (ingested and plotted, but never assigned gap factors: the
            two scales are not interconvertible).
    """

    dataset: str
    method: str
    unit: str
    points: tuple[tuple[float, float], ...]
    pixels: tuple[int, int] | None = None
    points_per_cloud: int | None = None
    metric: str = "accuracy"

    def __post_init__(self) -> None:
        if self.unit not in UNITS:
            raise ValueError(f"unit must be one of {UNITS}, got {self.unit!r}")
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if not self.points:
            raise ValueError("a series needs at least one point")
        pts = []
        for rate, acc in self.points:
            rate, acc = float(rate), float(acc)
            if rate < 0.0 or not math.isfinite(rate):
                raise ValueError(f"rates must be finite and non-negative, got {rate}")
            if not 0.0 <= acc <= 1.0:
                raise ValueError(f"accuracies must lie in [0, 1], got {acc}")
            pts.append((rate, acc))
        object.__setattr__(self, "points", tuple(pts))
        if self.unit == "bits_per_pixel":
            if self.pixels is None:
                raise ValueError("bits_per_pixel requires (width, height) resolution")
            w, h = self.pixels
            if w < 1 or h < 1:
                raise ValueError("resolution must be at least 1x1")
            object.__setattr__(self, "pixels", (int(w), int(h)))
        if self.unit == "bits_per_point":
            if self.points_per_cloud is None or self.points_per_cloud < 1:
                raise ValueError("bits_per_point requires a positive points-per-cloud")
            object.__setattr__(self, "points_per_cloud", int(self.points_per_cloud))


@dataclass(frozen=True)
class GapEntry:
    """One measurement compared against the bound at its accuracy."""

    accuracy: float
    sota_rate_bits: float
    bound_rate_bits: float
    gap_factor: float
    note: str = ""


@dataclass(frozen=True)
class GapReport:
    """Per-point gaps plus min / max / geometric-mean summary."""

    dataset: str
    method: str
    entries: tuple[GapEntry, ...]

    def finite_factors(self) -> np.ndarray:
        return np.array(
            [e.gap_factor for e in self.entries if math.isfinite(e.gap_factor)]
        )

    @property
    def min_factor(self) -> float:
        f = self.finite_factors()
        return float(f.min()) if f.size else math.nan

    @property
    def max_factor(self) -> float:
        f = self.finite_factors()
        return float(f.max()) if f.size else math.nan

    @property
    def geomean_factor(self) -> float:
        f = self.finite_factors()
        return float(np.exp(np.mean(np.log(f)))) if f.size else math.nan


def load_pmf(path) -> Pmf:
    """Read a label histogram: one ``label,count`` line per label.

    Blank lines and lines starting with ``#`` are skipped.  Counts are
    non-negative integers; repeated labels accumulate onto their first
    appearance, and label order is preserved.  Errors carry line numbers.
    """
    path = Path(path)
    order: list[str] = []
    counts: dict[str, int] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        label, sep, count_text = line.partition(",")
        label = label.strip()
        if not sep or not label:
            raise ValueError(f"{path}: line {lineno}: expected 'label,count', got {raw!r}")
        try:
            count = int(count_text.strip())
        except ValueError:
            raise ValueError(
                f"{path}: line {lineno}: count must be an integer, got {count_text.strip()!r}"
            ) from None
        if count < 0:
            raise ValueError(f"{path}: line {lineno}: negative count {count}")
        if label not in counts:
            order.append(label)
            counts[label] = 0
        counts[label] += count
    if not order:
        raise ValueError(f"{path}: no histogram entries found")
    weights = np.array([counts[l] for l in order], dtype=np.float64)
    if weights.sum() <= 0:
        raise ValueError(f"{path}: all counts are zero")
    return Pmf.from_weights(weights, tuple(order))


def load_sota(path) -> SotaSeries:
    """Read a published-results series from its JSON file.

    Schema: ``{dataset, method, unit, resolution?: {width, height} |
    {points}, points: [{rate, accuracy}], metric?}``; resolution is
    mandatory unless the unit is already bits_per_image.
    """
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(payload, dict):
        raise ValueError(f"{path}: expected a JSON object")
    missing = {"dataset", "method", "unit", "points"} - payload.keys()
    if missing:
        raise ValueError(f"{path}: missing keys {sorted(missing)}")
    resolution = payload.get("resolution") or {}
    if not isinstance(resolution, dict):
        raise ValueError(f"{path}: resolution must be an object")
    pixels = None
    per_cloud = None
    if "width" in resolution or "height" in resolution:
        if not {"width", "height"} <= resolution.keys():
            raise ValueError(f"{path}: pixel resolution needs both width and height")
        pixels = (int(resolution["width"]), int(resolution["height"]))
    if "points" in resolution:
        per_cloud = int(resolution["points"])
    raw_points = payload["points"]
    if not isinstance(raw_points, list) or not raw_points:
        raise ValueError(f"{path}: points must be a non-empty list")
    pts = []
    for i, item in enumerate(raw_points):
        if not isinstance(item, dict) or not {"rate", "accuracy"} <= item.keys():
            raise ValueError(f"{path}: points[{i}] must have rate and accuracy")
        pts.append((float(item["rate"]), float(item["accuracy"])))
    try:
        return SotaSeries(
            dataset=str(payload["dataset"]),
            method=str(payload["method"]),
            unit=str(payload["unit"]),
            points=tuple(pts),
            pixels=pixels,
            points_per_cloud=per_cloud,
            metric=str(payload.get("metric", "accuracy")),
        )
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None


def _per_image_factor(series: SotaSeries) -> float:
    if series.unit == "bits_per_image":
        return 1.0
    if series.unit == "bits_per_point":
        return float(series.points_per_cloud)
    w, h = series.pixels
    return float(w * h)


def to_bits_per_image(series: SotaSeries) -> SotaSeries:
    """Express all rates in bits per image; presentation metadata is kept."""
    factor = _per_image_factor(series)
    if factor == 1.0 and series.unit == "bits_per_image":
        return series
    pts = tuple((r * factor, a) for r, a in series.points)
    return replace(series, unit="bits_per_image", points=pts)


def convert_series_unit(series: SotaSeries, unit: str) -> SotaSeries:
    """Convert between per-image and presentation units (exact scaling)."""
    if unit not in UNITS:
        raise ValueError(f"unit must be one of {UNITS}, got {unit!r}")
    base = to_bits_per_image(series)
    if unit == "bits_per_image":
        return base
    probe = replace(series, unit=unit)  # validates required metadata
    factor = _per_image_factor(probe)
    pts = tuple((r / factor, a) for r, a in base.points)
    return replace(base, unit=unit, points=pts)


def interpolate_bound_rate(bound: RaCurve, accuracy) -> np.ndarray:
    """Bound rate at given accuracies by monotone piecewise-linear lookup.

    The bound is sampled on its own grid; between samples the rate is
    interpolated linearly in accuracy, which is monotone non-decreasing
    because the curve is.  Queries outside the curve's accuracy span clamp
    to the nearest endpoint.
    """
    acc = np.atleast_1d(np.asarray(accuracy, dtype=np.float64))
    xs = bound.accuracies[::-1]  # ascending accuracy
    ys = bound.rates[::-1]
    return np.interp(acc, xs, ys)


def gap_factor(bound: RaCurve, point: tuple[float, float]) -> float:
    """Ratio of a measured rate to the bound rate at the same accuracy.

    ``point`` is (rate in bits per image, accuracy).  At or below the
    curve's chance accuracy the bound rate is zero and the factor is
    undefined (NaN, with `UndefinedGapWarning`); accuracies above the curve
    maximum clamp to the endpoint with `AccuracyClampWarning`.
    """
    rate, acc = float(point[0]), float(point[1])
    if rate < 0.0:
        raise ValueError(f"rate must be non-negative, got {rate}")
    if not 0.0 <= acc <= 1.0:
        raise ValueError(f"accuracy must lie in [0, 1], got {acc}")
    chance = bound.points[-1].accuracy
    top = bound.points[0].accuracy
    if acc <= chance:
        warnings.warn(
            f"accuracy {acc} is at or below the chance level {chance:.6g}; "
            "gap factor undefined",
            UndefinedGapWarning,
            stacklevel=2,
        )
        return math.nan
    if acc > top:
        warnings.warn(
            f"accuracy {acc} exceeds the curve maximum {top:.6g}; clamped",
            AccuracyClampWarning,
            stacklevel=2,
        )
        acc = top
    bound_rate = float(interpolate_bound_rate(bound, acc)[0])
    return rate / bound_rate


def gap_report(bound: RaCurve, series: SotaSeries) -> GapReport:
    """Compare every point of a series against the bound.

    The series is normalized to bits per image first.  Refused for mAP
    series: mAP does not convert to classification accuracy, so no gap
    factor exists for them.
    """
    if series.metric != "accuracy":
        raise ValueError(
            "gap factors are undefined for mAP series; compare raw rates "
            "against the zero-error rate instead"
        )
    base = to_bits_per_image(series)
    chance = bound.points[-1].accuracy
    top = bound.points[0].accuracy
    entries = []
    for rate, acc in base.points:
        if acc <= chance:
            entries.append(GapEntry(acc, rate, 0.0, math.nan, "at-or-below-chance"))
            continue
        note = ""
        eff_acc = acc
        if acc > top:
            eff_acc = top
            note = "clamped-to-curve-max"
        bound_rate = float(interpolate_bound_rate(bound, eff_acc)[0])
        entries.append(GapEntry(acc, rate, bound_rate, rate / bound_rate, note))
    return GapReport(base.dataset, base.method, tuple(entries))


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _curve_csv(curve: RaCurve) -> str:
    lines = [CURVE_CSV_HEADER]
    for p in curve.points:
        lines.append(f"{_fmt(p.rate)},{_fmt(p.distortion)},{_fmt(p.accuracy)}")
    return "\n".join(lines) + "\n"


def _series_csv(series: SotaSeries) -> str:
    base = to_bits_per_image(series)
    lines = [CURVE_CSV_HEADER]
    for rate, acc in base.points:
        lines.append(f"{_fmt(rate)},{_fmt(1.0 - acc)},{_fmt(acc)}")
    return "\n".join(lines) + "\n"


def _gap_csv(report: GapReport) -> str:
    lines = [GAP_CSV_HEADER]
    for e in report.entries:
        lines.append(
            f"{_fmt(e.accuracy)},{_fmt(e.sota_rate_bits)},"
            f"{_fmt(e.bound_rate_bits)},{_fmt(e.gap_factor)}"
        )
    return "\n".join(lines) + "\n"


def emit_curve(
    obj,
    path,
    format: str = "csv",
    *,
    series: tuple[SotaSeries, ...] = (),
    log_x: bool = False,
    title: str | None = None,
) -> Path:
    """Write a curve, series, or gap report to CSV or SVG.

    CSV output is deterministic (12 significant digits, LF newlines) and
    loss-free for round-tripping curve points.  SVG output is a single
    self-contained 800x600 chart: the bound as a polyline, series points as
    markers, linear axes by default and a log rate axis with ``log_x``.
    """
    path = Path(path)
    if format == "csv":
        if isinstance(obj, RaCurve):
            text = _curve_csv(obj)
        elif isinstance(obj, SotaSeries):
            text = _series_csv(obj)
        elif isinstance(obj, GapReport):
            text = _gap_csv(obj)
        else:
            raise TypeError(f"cannot emit {type(obj).__name__} as CSV")
        path.write_text(text, encoding="utf-8", newline="\n")
        return path
    if format == "svg":
        if isinstance(obj, RaCurve):
            text = _render_svg(obj, series, log_x=log_x, title=title)
        elif isinstance(obj, SotaSeries):
            text = _render_svg(None, (obj, *series), log_x=log_x, title=title)
        else:
            raise TypeError(f"cannot emit {type(obj).__name__} as SVG")
        path.write_text(text, encoding="utf-8", newline="\n")
        return path
    raise ValueError(f"format must be 'csv' or 'svg', got {format!r}")


def read_curve_csv(path, source_kind: str = "closed-form-uniform") -> RaCurve:
    """Parse a curve CSV produced by :func:`emit_curve`."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != CURVE_CSV_HEADER:
        raise ValueError(f"{path}: expected header {CURVE_CSV_HEADER!r}")
    pts = []
    for lineno, line in enumerate(lines[1:], 2):
        if not line:
            continue
        fields = line.split(",")
        if len(fields) != 3:
            raise ValueError(f"{path}: line {lineno}: expected 3 fields")
        rate, dist, acc = (float(f) for f in fields)
        if abs((1.0 - dist) - acc) > 1e-9:
            raise ValueError(
                f"{path}: line {lineno}: accuracy column disagrees with distortion"
            )
        pts.append(RaPoint(rate, dist))
    return RaCurve(tuple(pts), source_kind)


# ---------------------------------------------------------------------------
# SVG rendering (dependency-free)
# ---------------------------------------------------------------------------

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
_PLOT = (80.0, 40.0, 770.0, 540.0)  # x0, y0, x1, y1 of the data area


def _nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        step = mult * mag
        if raw <= step:
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 else t)
        t += step
    return ticks


def _render_svg(
    bound: RaCurve | None,
    series: tuple[SotaSeries, ...],
    *,
    log_x: bool,
    title: str | None,
) -> str:
    x0, y0, x1, y1 = _PLOT

    bound_pts: list[tuple[float, float]] = []
    if bound is not None:
        bound_pts = [(p.rate, p.accuracy) for p in bound.points]
    series_pts = [
        (s, [(r, a) for r, a in to_bits_per_image(s).points]) for s in series
    ]

    all_rates = [r for r, _ in bound_pts] + [r for _, pts in series_pts for r, _ in pts]
    all_accs = [a for _, a in bound_pts] + [a for _, pts in series_pts for _, a in pts]
    if not all_rates:
        raise ValueError("nothing to plot")

    if log_x:
        positive = [r for r in all_rates if r > 0]
        if not positive:
            raise ValueError("log rate axis needs at least one positive rate")
        xlo = math.floor(math.log10(min(positive)))
        xhi = math.ceil(math.log10(max(positive)))
        if xhi == xlo:
            xhi += 1
        xticks = [10.0**e for e in range(int(xlo), int(xhi) + 1)]

        def xmap(r: float) -> float | None:
            if r <= 0:
                return None
            t = (math.log10(r) - xlo) / (xhi - xlo)
            return x0 + t * (x1 - x0)

    else:
        xmax = max(all_rates) * 1.05 or 1.0
        xticks = _nice_ticks(0.0, xmax)

        def xmap(r: float) -> float | None:
            return x0 + (r / xmax) * (x1 - x0)

    ylo = max(0.0, min(all_accs) - 0.05)
    yhi = 1.0
    yticks = _nice_ticks(ylo, yhi, 5)

    def ymap(a: float) -> float:
        return y1 - (a - ylo) / (yhi - ylo) * (y1 - y0)

    out = [
        '<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 800 600" '
        'font-family="sans-serif">',
        '<rect x="0" y="0" width="800" height="600" fill="white"/>',
        f'<rect x="{x0:.2f}" y="{y0:.2f}" width="{x1 - x0:.2f}" '
        f'height="{y1 - y0:.2f}" fill="none" stroke="#333" stroke-width="1"/>',
    ]
    if title:
        out.append(
            f'<text x="400" y="25" font-size="15" text-anchor="middle">{title}</text>'
        )

    for t in xticks:
        px = xmap(t)
        if px is None or not x0 - 1e-6 <= px <= x1 + 1e-6:
            continue
        label = f"{t:.6g}"
        out.append(
            f'<line x1="{px:.2f}" y1="{y1:.2f}" x2="{px:.2f}" y2="{y1 + 5:.2f}" '
            'stroke="#333" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{px:.2f}" y="{y1 + 20:.2f}" font-size="11" '
            f'text-anchor="middle">{label}</text>'
        )
    for t in yticks:
        py = ymap(t)
        out.append(
            f'<line x1="{x0 - 5:.2f}" y1="{py:.2f}" x2="{x0:.2f}" y2="{py:.2f}" '
            'stroke="#333" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{x0 - 8:.2f}" y="{py + 4:.2f}" font-size="11" '
            f'text-anchor="end">{t:.6g}</text>'
        )
    xlabel = "rate (bits per image, log scale)" if log_x else "rate (bits per image)"
    out.append(
        f'<text x="{(x0 + x1) / 2:.2f}" y="585" font-size="13" '
        f'text-anchor="middle">{xlabel}</text>'
    )
    out.append(
        f'<text x="20" y="{(y0 + y1) / 2:.2f}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 20 {(y0 + y1) / 2:.2f})">accuracy</text>'
    )

    if bound_pts:
        coords = []
        for r, a in sorted(bound_pts):
            px = xmap(r)
            if px is not None:
                coords.append(f"{px:.2f},{ymap(a):.2f}")
        out.append(
            f'<polyline points="{" ".join(coords)}" fill="none" '
            f'stroke="{_PALETTE[0]}" stroke-width="2"/>'
        )
        out.append(
            f'<text x="{x1 - 8:.2f}" y="{y0 + 18:.2f}" font-size="12" '
            f'text-anchor="end" fill="{_PALETTE[0]}">bound</text>'
        )

    for i, (s, pts) in enumerate(series_pts):
        color = _PALETTE[1 + i % (len(_PALETTE) - 1)]
        for r, a in pts:
            px = xmap(r)
            if px is None:
                continue
            out.append(
                f'<circle cx="{px:.2f}" cy="{ymap(a):.2f}" r="4" fill="{color}"/>'
            )
        out.append(
            f'<text x="{x1 - 8:.2f}" y="{y0 + 36 + 16 * i:.2f}" font-size="12" '
            f'text-anchor="end" fill="{color}">{s.method} ({s.dataset})</text>'
        )

    out.append("</svg>")
    return "\n".join(out) + "\n"
